import csv

import pytest

from solcot.cot import RethinkStats
from solcot.report import (
    RETHINK_COLUMNS,
    SUMMARY_COLUMNS,
    EvaluationSummary,
    emit_report,
    evaluate,
    read_predictions,
    write_predictions,
)
from solcot.surrogate import Prediction

# published table rows: (split, model, success, n_over, mean_under, mean_over)
PUBLISHED_ROWS = [
    ("dissimilar", "Gaussian", 15, 7, 30.49, 1253.88),
    ("dissimilar", "LLM-CoT", 16, 6, 66.43, 1011.20),
    ("dissimilar", "ML-LLM-CoT", 18, 4, 37.54, 424.96),
    ("similar", "gaussian", 20, 0, 20.87, 0.0),
    ("similar", "LLM-CoT", 17, 3, 57.25, 301.43),
    ("similar", "ML-LLM-CoT", 20, 0, 38.49, 0.0),
]
PUBLISHED_RETHINK = [("LLM-CoT", RethinkStats(5, 34)), ("ML-LLM-CoT", RethinkStats(2, 4))]


def published_summaries():
    return [EvaluationSummary(m, split, 20, s, o, u, v) for split, m, s, o, u, v in PUBLISHED_ROWS]


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_published_tables_render_in_schema(tmp_path):
    emit_report(published_summaries(), PUBLISHED_RETHINK, tmp_path)
    header, *rows = read_csv(tmp_path / "summary.csv")
    assert header == ["Split", *SUMMARY_COLUMNS]
    assert len(rows) == 6
    for row, (split, model, success, n_over, under, over) in zip(rows, PUBLISHED_ROWS):
        assert row[:4] == [split, model, f"Success count: {success}", str(n_over)]
        assert float(row[4]) == pytest.approx(under, abs=0.005) and float(row[5]) == pytest.approx(over, abs=0.005)
    for split in ("dissimilar", "similar"):
        header, *rows = read_csv(tmp_path / f"summary_{split}.csv")
        assert header == list(SUMMARY_COLUMNS) and len(rows) == 3
    assert read_csv(tmp_path / "rethink.csv") == [list(RETHINK_COLUMNS), ["LLM-CoT", "5", "34"], ["ML-LLM-CoT", "2", "4"]]
    md = (tmp_path / "report.md").read_text()
    assert "## Summarized results for 20 dissimilar molecules" in md
    assert "| ML-LLM-CoT | Success count: 18 | 4 | 37.54 | 424.96 |" in md
    assert "| LLM-CoT | 5 | 34 |" in md


def test_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    files_a = emit_report(published_summaries(), dict(PUBLISHED_RETHINK), a)
    files_b = emit_report(published_summaries(), dict(PUBLISHED_RETHINK), b)
    assert [p.name for p in files_a] == [p.name for p in files_b]
    assert all(pa.read_bytes() == pb.read_bytes() for pa, pb in zip(files_a, files_b))


def test_empty_inputs_give_header_only_files(tmp_path):
    emit_report([], {}, tmp_path)
    assert read_csv(tmp_path / "summary.csv") == [["Split", *SUMMARY_COLUMNS]]
    assert read_csv(tmp_path / "rethink.csv") == [list(RETHINK_COLUMNS)]
    assert "No evaluation summaries" in (tmp_path / "report.md").read_text()


def test_single_stats_pair_gives_one_row(tmp_path):
    emit_report([], [("LLM-CoT", RethinkStats(1, 2))], tmp_path)
    assert read_csv(tmp_path / "rethink.csv")[1:] == [["LLM-CoT", "1", "2"]]


def test_per_molecule_files(tmp_path):
    s = evaluate([("a", -1.0), ("b", 0.5), ("c", -6.0)], [("a", -2.0), ("b", 0.0), ("c", -2.0)], "ML-LLM-CoT", "similar")
    emit_report([s], {}, tmp_path)
    header, *rows = read_csv(tmp_path / "deviation_ml-llm-cot_similar.csv")
    assert header[:5] == ["id", "predicted", "actual", "deviation_pct", "bucket"]
    assert [(r[0], r[3], r[4], r[5], r[6]) for r in rows] == [
        ("a", "50.00", "under", "true", "false"),
        ("b", "50.00", "under", "false", "true"),
        ("c", "200.00", "over", "true", "false"),
    ]
    assert read_csv(tmp_path / "consistency_ml-llm-cot_similar.csv")[1] == ["0.6667", "0.3333"]
    md = (tmp_path / "report.md").read_text()
    assert "b (near-zero reference)" in md and "Sign agreement: 2 of 3" in md


def test_summary_count_validation():
    with pytest.raises(ValueError):
        EvaluationSummary("x", "y", 3, 4, 0, 0.0, 0.0)


def test_predictions_round_trip(tmp_path):
    preds = [Prediction(-2.123456789012345, 0.5, "gp", "a"), Prediction(0.1, 0.0, "llm", "b,c")]
    path = tmp_path / "p.csv"
    write_predictions(preds, path)
    assert read_predictions(path) == preds


def test_read_predictions_rejects_other_files(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_predictions(tmp_path / "missing.csv")
    (tmp_path / "bad.csv").write_text("x,y\n1,2\n")
    with pytest.raises(ValueError):
        read_predictions(tmp_path / "bad.csv")
