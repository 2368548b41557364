import math

import numpy as np
import pytest

from solcot.surrogate import (
    DEFAULT_BOUNDS,
    FactorizationFailure,
    GpModel,
    NonFiniteInput,
    Prediction,
    _factorize,
    gp_predict,
    leave_one_out,
    log_marginal_likelihood,
    train_gp,
)

# ------------------------------------------------------------------ independent oracles


def dense_lml(sf2: float, ell: float, sn2: float, X: np.ndarray, y: np.ndarray) -> float:
    """Textbook LML with an explicit pairwise kernel, a dense inverse and slogdet."""
    n = len(y)
    K = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            d2 = float(np.sum((X[i] - X[j]) ** 2))
            K[i, j] = sf2 * math.exp(-d2 / (2 * ell * ell))
    C = K + sn2 * np.eye(n)
    sign, logdet = np.linalg.slogdet(C)
    assert sign > 0
    return float(-0.5 * y @ np.linalg.inv(C) @ y - 0.5 * logdet - 0.5 * n * math.log(2 * math.pi))


def zscore(X: np.ndarray) -> np.ndarray:
    std = X.std(axis=0)
    return (X - X.mean(axis=0)) / np.where(std > 0, std, 1.0)


def grid_oracle_best_lml(X: np.ndarray, y: np.ndarray, points: int = 20) -> float:
    """Best LML over a log-spaced grid spanning the default bounds, on z-scored X and centered y."""
    Xs, yc = zscore(X), y - y.mean()
    D2 = ((Xs[:, None, :] - Xs[None, :, :]) ** 2).sum(-1)
    axes = [np.geomspace(*DEFAULT_BOUNDS[k], points) for k in ("signal_variance", "lengthscale", "noise_variance")]
    n, best = len(y), -math.inf
    for sf2 in axes[0]:
        for ell in axes[1]:
            K = sf2 * np.exp(-D2 / (2 * ell * ell))
            for sn2 in axes[2]:
                C = K + sn2 * np.eye(n)
                sign, logdet = np.linalg.slogdet(C)
                if sign <= 0:
                    continue
                try:
                    quad = yc @ np.linalg.solve(C, yc)
                except np.linalg.LinAlgError:
                    continue
                best = max(best, -0.5 * quad - 0.5 * logdet - 0.5 * n * math.log(2 * math.pi))
    return best


def duplicate_descriptor_pairs(X: np.ndarray) -> list[tuple[int, int]]:
    return [(i, j) for i in range(len(X)) for j in range(i + 1, len(X)) if np.array_equal(X[i], X[j])]


# ------------------------------------------------------------------ training on the seeds


def test_seed_gp_optimum_beats_every_start(seed_gp):
    opt = seed_gp.optimization
    assert math.isfinite(opt["final_lml"])
    assert opt["final_lml"] >= opt["initial_lml"]
    assert all(opt["final_lml"] >= s for s in opt["start_lmls"])
    assert len(opt["start_lmls"]) == 1 + 8
    assert seed_gp.lml() == pytest.approx(opt["final_lml"], abs=1e-9)
    seed_gp.check_invariants()


def test_seed_gp_against_grid_oracle(seed_xy, seed_gp):
    X, y = seed_xy
    oracle = grid_oracle_best_lml(X, y)
    assert oracle - seed_gp.optimization["final_lml"] <= 0.5


def test_hyperparameters_within_bounds(seed_gp):
    for value, key in [
        (seed_gp.signal_variance, "signal_variance"),
        (seed_gp.lengthscale, "lengthscale"),
        (seed_gp.noise_variance, "noise_variance"),
    ]:
        lo, hi = DEFAULT_BOUNDS[key]
        assert lo * (1 - 1e-12) <= value <= hi * (1 + 1e-12)


def test_training_is_bit_deterministic(seed_xy, seed_gp):
    X, y = seed_xy
    again = train_gp(X, y, restarts=8, seed=0)
    assert again.log_params.tobytes() == seed_gp.log_params.tobytes()


def test_seed_split_contains_descriptor_duplicates(seed_xy):
    """Two seed PCBs share every descriptor but differ in logS, which no interpolant can honour."""
    X, y = seed_xy
    pairs = duplicate_descriptor_pairs(X)
    assert pairs
    assert any(abs(y[i] - y[j]) > 2e-3 for i, j in pairs)


def pinned_noise_residuals(X, y):
    model = train_gp(X, y, noise_variance=1e-8)
    assert model.noise_variance == pytest.approx(1e-8)
    mean, _ = model.predict(X)
    return np.abs(mean - y)


@pytest.mark.xfail(
    strict=True,
    reason="two seed molecules have identical descriptor vectors and logS 0.11 apart, "
    "so a pinned-noise GP must miss each by about 0.055",
)
def test_pinned_noise_interpolates_every_seed(seed_xy):
    X, y = seed_xy
    assert np.max(pinned_noise_residuals(X, y)) <= 1e-3


def test_pinned_noise_interpolates_every_distinct_seed(seed_xy):
    X, y = seed_xy
    dup = {k for pair in duplicate_descriptor_pairs(X) for k in pair}
    resid = pinned_noise_residuals(X, y)
    assert all(resid[k] <= 1e-3 for k in range(len(y)) if k not in dup)


def test_leave_one_out_is_finite(seed_xy, seed_gp):
    X, y = seed_xy
    means, stds = leave_one_out(X, y, seed_gp)
    assert np.all(np.isfinite(means)) and np.all(np.isfinite(stds)) and np.all(stds >= 0)


def test_posterior_variance_bound_at_training_inputs(seed_xy, seed_gp):
    X, _ = seed_xy
    _, std = seed_gp.predict(X)
    assert np.all(std >= 0)
    assert np.all(std**2 <= seed_gp.signal_variance + seed_gp.noise_variance)


# ------------------------------------------------------------------ analytic cases


def test_contradictory_duplicates_force_noise():
    X = np.array([[0.0, 1.0], [0.0, 1.0], [3.0, -1.0]])
    y = np.array([1.0, -1.0, 0.5])
    model = train_gp(X, y)
    assert model.noise_variance > 0.1
    model.check_invariants()


def test_constant_targets_predict_the_constant():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(8, 3))
    model = train_gp(X, np.full(8, -2.5))
    mean, _ = model.predict(rng.normal(size=(5, 3)) * 4)
    assert np.allclose(mean, -2.5)


def test_interpolation_with_pinned_noise():
    rng = np.random.default_rng(4)
    X = rng.uniform(-2, 2, size=(12, 2))
    y = np.sin(X[:, 0]) + X[:, 1] ** 2
    model = train_gp(X, y, noise_variance=1e-8)
    assert np.max(np.abs(model.predict(X)[0] - y)) <= 1e-3


def test_far_point_reverts_to_prior():
    X = np.array([[0.0], [1.0], [2.0]])
    model = train_gp(X, np.array([-1.0, -2.0, -4.0]))
    p = gp_predict(model, np.array([1e6]))
    assert p.mean == pytest.approx(model.target_mean)
    assert p.std == pytest.approx(model.signal_std)
    assert p.source == "gp"


def test_midpoint_of_symmetric_pair():
    X = np.array([[-1.0, 0.0], [1.0, 0.0]])
    model = train_gp(X, np.array([2.0, -2.0]) + 0.7)
    assert gp_predict(model, np.array([0.0, 0.0])).mean == pytest.approx(0.7, abs=1e-12)


def test_single_point_closed_form():
    sf2, sn2 = 1.7, 0.3
    got = log_marginal_likelihood(np.log([sf2, 2.0, sn2]), np.array([[0.4, 1.0]]), np.array([0.0]))
    assert got == pytest.approx(-0.5 * math.log(2 * math.pi * (sf2 + sn2)), abs=1e-12)


def test_noise_axis_unimodal_on_contradictory_pair():
    X, y = np.array([[0.0], [0.0]]), np.array([1.0, -1.0])
    grid = np.linspace(math.log(1e-6), math.log(1e2), 200)
    values = np.array([log_marginal_likelihood([0.0, 0.0, g], X, y) for g in grid])
    peak = int(values.argmax())
    assert 0 < peak < len(grid) - 1
    assert np.all(np.diff(values[: peak + 1]) > 0) and np.all(np.diff(values[peak:]) < 0)


def test_lml_matches_dense_inverse_oracle():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        X = rng.normal(size=(5, 3))
        y = rng.normal(size=5)
        yc = y - y.mean()
        sf2, ell, sn2 = np.exp(rng.uniform(-1, 1)), np.exp(rng.uniform(-0.5, 1)), np.exp(rng.uniform(-3, 0))
        ours = log_marginal_likelihood(np.log([sf2, ell, sn2]), X, yc)
        worst = max(worst, abs(ours - dense_lml(sf2, ell, sn2, X, yc)))
    assert worst <= 1e-9


# ------------------------------------------------------------------ guards and persistence


def test_rejects_non_finite_and_tiny_inputs():
    with pytest.raises(NonFiniteInput):
        train_gp(np.array([[0.0], [np.nan]]), np.array([1.0, 2.0]))
    with pytest.raises(NonFiniteInput):
        train_gp(np.array([[0.0], [1.0]]), np.array([1.0, np.inf]))
    with pytest.raises(ValueError):
        train_gp(np.array([[0.0]]), np.array([1.0]))


def test_jitter_repairs_singular_covariance():
    L, jitter = _factorize(np.ones((3, 3)))
    assert jitter > 0 and np.all(np.isfinite(L))


def test_indefinite_covariance_fails():
    with pytest.raises(FactorizationFailure):
        _factorize(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_prediction_rejects_negative_std():
    with pytest.raises(ValueError):
        Prediction(mean=0.0, std=-1.0)


def test_json_round_trip(tmp_path, seed_xy, seed_gp):
    X, _ = seed_xy
    path = tmp_path / "gp.json"
    seed_gp.save(path)
    back = GpModel.load(path)
    assert back.log_params.tolist() == seed_gp.log_params.tolist()
    m1, s1 = seed_gp.predict(X)
    m2, s2 = back.predict(X)
    assert np.allclose(m1, m2, atol=1e-10) and np.allclose(s1, s2, atol=1e-10)
    back.check_invariants()


def test_load_rejects_other_documents():
    with pytest.raises(ValueError):
        GpModel.from_dict({"format": "something-else"})
    with pytest.raises(ValueError):
        GpModel.from_dict({"format": "solcot-gp", "version": 99})
