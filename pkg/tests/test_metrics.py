import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from solcot.cot import deviation_detail, percent_deviation, sign_agreement
from solcot.report import IdMismatch, LengthMismatch, evaluate
from solcot.surrogate import NonFiniteInput, Prediction

# ------------------------------------------------------------------ brute-force oracle


def oracle_deviation(pred, actual):
    if -0.000001 < actual < 0.000001:
        return 100.0 * abs(pred - actual), True
    return 100.0 * abs(pred - actual) / abs(actual), False


def oracle_sign(pred, actual):
    if pred == 0 or actual == 0:
        return pred == 0 and actual == 0
    return (pred > 0) == (actual > 0)


def oracle_summary(pairs):
    success = 0
    under, over = [], []
    for pred, actual in pairs:
        d, _ = oracle_deviation(pred, actual)
        if oracle_sign(pred, actual):
            success += 1
        if d > 100:
            over.append(d)
        else:
            under.append(d)
    mean_under = 0.0
    for d in under:
        mean_under += d / len(under)
    mean_over = 0.0
    for d in over:
        mean_over += d / len(over)
    return success, len(over), mean_under, mean_over


def random_pairs(n, seed):
    rng = random.Random(seed)
    pairs = []
    for _ in range(n):
        actual = rng.choice([rng.uniform(-9, 2), 0.0, rng.uniform(-2e-6, 2e-6), rng.uniform(-0.5, 0.5)])
        pred = rng.choice([actual, -actual, 0.0, actual + rng.gauss(0, 1.5), rng.uniform(-12, 4)])
        pairs.append((pred, actual))
    return pairs


PAIRS = random_pairs(1000, 11)


def metric_mismatches(pairs=PAIRS) -> int:
    bad = 0
    for pred, actual in pairs:
        dev, near = deviation_detail(pred, actual)
        odev, onear = oracle_deviation(pred, actual)
        bad += abs(dev - odev) > 1e-9 * max(1.0, odev) or near != onear
        bad += sign_agreement(pred, actual) != oracle_sign(pred, actual)
    s = evaluate([(str(k), p) for k, (p, _) in enumerate(pairs)], [(str(k), a) for k, (_, a) in enumerate(pairs)])
    success, n_over, mean_under, mean_over = oracle_summary(pairs)
    bad += (s.success_count, s.n_over_100) != (success, n_over)
    bad += abs(s.mean_dev_under_100 - mean_under) > 1e-9 * max(1.0, mean_under)
    bad += abs(s.mean_dev_over_100 - mean_over) > 1e-9 * max(1.0, mean_over)
    return bad


def test_metrics_match_brute_force_oracle():
    assert metric_mismatches() == 0


# ------------------------------------------------------------------ worked examples


def test_percent_deviation_examples():
    assert percent_deviation(-2.0, -4.0) == 50.0
    assert percent_deviation(-3.3, -3.3) == 0.0
    assert deviation_detail(0.5, 0.0000005) == (pytest.approx(49.99995), True)


def test_percent_deviation_rejects_non_finite():
    with pytest.raises(NonFiniteInput):
        percent_deviation(math.nan, 1.0)
    with pytest.raises(NonFiniteInput):
        percent_deviation(1.0, math.inf)


@pytest.mark.parametrize(
    "pred, actual, expected",
    [(-3.2, -1.1, True), (0.5, -0.5, False), (0.0, 0.0, True), (0.0, 0.3, False), (0.3, 0.0, False), (2.0, 0.1, True)],
)
def test_sign_agreement(pred, actual, expected):
    assert sign_agreement(pred, actual) is expected


def test_constructed_four_molecule_case():
    # deviations 50, 150, 0 and 200 percent; only the last has the wrong sign
    preds = [("a", -1.0), ("b", -2.5), ("c", -3.0), ("d", 2.0)]
    actuals = [("a", -2.0), ("b", -1.0), ("c", -3.0), ("d", -2.0)]
    s = evaluate(preds, actuals)
    assert [r.deviation_pct for r in s.per_molecule] == [50.0, 150.0, 0.0, 200.0]
    assert [r.sign_ok for r in s.per_molecule] == [True, True, True, False]
    assert (s.success_count, s.n_over_100, s.mean_dev_under_100, s.mean_dev_over_100) == (3, 2, 25.0, 175.0)


def test_identity_predictions():
    pairs = [("x", -2.0), ("y", 0.5), ("z", 0.0)]
    s = evaluate(pairs, pairs)
    assert (s.success_count, s.n_over_100, s.mean_dev_under_100, s.mean_dev_over_100) == (3, 0, 0.0, 0.0)


def test_exactly_100_is_under():
    s = evaluate([("a", 0.0)], [("a", -2.0)])
    assert s.n_over_100 == 0 and s.mean_dev_under_100 == 100.0


def test_near_zero_reference_flagged():
    s = evaluate([("a", 0.5)], [("a", 0.0)])
    assert s.per_molecule[0].near_zero_reference and s.per_molecule[0].deviation_pct == 50.0


def test_accepts_predictions_and_records(esol_split):
    recs = esol_split.similar[:3]
    preds = [Prediction(r.log_s, 0.1, "gp", r.id) for r in recs]
    assert evaluate(preds, recs).mean_dev_under_100 == 0.0


def test_length_and_id_mismatch():
    with pytest.raises(LengthMismatch):
        evaluate([("a", 1.0)], [])
    with pytest.raises(IdMismatch):
        evaluate([("a", 1.0), ("b", 1.0)], [("a", 1.0), ("c", 1.0)])


@given(st.permutations(list(range(40))))
def test_evaluate_permutation_invariant(order):
    pairs = PAIRS[:40]
    base = evaluate([(f"m{k:02d}", p) for k, (p, _) in enumerate(pairs)], [(f"m{k:02d}", a) for k, (_, a) in enumerate(pairs)])
    shuffled = evaluate(
        [(f"m{k:02d}", pairs[k][0]) for k in order], [(f"m{k:02d}", pairs[k][1]) for k in order]
    )
    assert (shuffled.success_count, shuffled.n_over_100) == (base.success_count, base.n_over_100)
    assert shuffled.mean_dev_under_100 == pytest.approx(base.mean_dev_under_100, rel=1e-12, abs=1e-9)
    assert shuffled.mean_dev_over_100 == pytest.approx(base.mean_dev_over_100, rel=1e-12, abs=1e-9)
    assert shuffled.per_molecule == base.per_molecule
