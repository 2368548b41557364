"""Evaluation metrics and report emission in the published table layouts.

Percentages are written with two decimals everywhere, so re-running on
the same inputs reproduces every file byte for byte.
"""

from __future__ import annotations

import csv
import io
import logging
import re
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from .cot import RethinkStats, deviation_detail, sign_agreement
from .surrogate import Prediction

log = logging.getLogger(__name__)

__all__ = [
    "EvaluationSummary",
    "IdMismatch",
    "LengthMismatch",
    "MoleculeResult",
    "RETHINK_COLUMNS",
    "SUMMARY_COLUMNS",
    "emit_report",
    "evaluate",
    "read_predictions",
    "write_predictions",
]

SUMMARY_COLUMNS = (
    "Model",
    "Solubility Judgment",
    "Number with Deviation higher than 100%",
    "Deviation less than 100%",
    "Deviation greater than 100%",
)
RETHINK_COLUMNS = (
    "Model",
    "Number of Points Requiring Rethink (to Error Less than 100%)",
    "Total Rethink Times",
)
DEVIATION_COLUMNS = ("id", "predicted", "actual", "deviation_pct", "bucket", "sign_ok", "near_zero_reference")
CONSISTENCY_COLUMNS = ("success_fraction", "failure_fraction")
PREDICTION_COLUMNS = ("id", "mean", "std", "source")
OVER = 100.0


class LengthMismatch(ValueError):
    pass


class IdMismatch(ValueError):
    pass


@dataclass(frozen=True)
class MoleculeResult:
    id: str
    predicted: float
    actual: float
    deviation_pct: float
    sign_ok: bool
    near_zero_reference: bool = False

    @property
    def bucket(self) -> str:
        return "over" if self.deviation_pct > OVER else "under"


@dataclass(frozen=True)
class EvaluationSummary:
    """One row of a results table: a model evaluated on one split.

    ``mean_dev_under_100`` averages the molecules with deviation at most
    100% and ``mean_dev_over_100`` those strictly above; an empty bucket
    averages to 0.0.
    """

    label: str
    split: str
    n: int
    success_count: int
    n_over_100: int
    mean_dev_under_100: float
    mean_dev_over_100: float
    per_molecule: tuple[MoleculeResult, ...] = field(default=())

    def __post_init__(self) -> None:
        if not 0 <= self.success_count <= self.n or not 0 <= self.n_over_100 <= self.n:
            raise ValueError("counts must lie in [0, n]")

    @property
    def slug(self) -> str:
        return _slug(f"{self.label}_{self.split}")

    @property
    def success_fraction(self) -> float:
        return self.success_count / self.n if self.n else 0.0


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9.-]+", "_", text).strip("_").lower()


def _pair(item, kind: str) -> tuple[str, float]:
    if isinstance(item, Prediction):
        return str(item.molecule_id), item.mean
    if hasattr(item, "log_s"):
        return item.id, item.log_s
    try:
        rid, value = item
    except (TypeError, ValueError):
        raise TypeError(f"cannot read an (id, value) pair from {kind} item {item!r}") from None
    return str(rid), float(value)


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values) if values else 0.0


def evaluate(predictions: Sequence, actuals: Sequence, label: str = "", split: str = "") -> EvaluationSummary:
    """Score predictions against measured values.

    Parameters
    ----------
    predictions
        :class:`~solcot.surrogate.Prediction` objects or ``(id, value)`` pairs.
    actuals
        Records with ``id`` and ``log_s`` or ``(id, value)`` pairs, in the
        same order as ``predictions``.

    Raises
    ------
    LengthMismatch
        The sequences differ in length.
    IdMismatch
        Position ``k`` of the two sequences names different molecules.
    """
    if len(predictions) != len(actuals):
        raise LengthMismatch(f"{len(predictions)} predictions for {len(actuals)} actual values")
    results = []
    for k, (p, a) in enumerate(zip(predictions, actuals)):
        pid, pred = _pair(p, "prediction")
        aid, actual = _pair(a, "actual")
        if pid != aid:
            raise IdMismatch(f"position {k}: prediction for {pid!r} but actual for {aid!r}")
        dev, near_zero = deviation_detail(pred, actual)
        results.append(MoleculeResult(pid, pred, actual, dev, sign_agreement(pred, actual), near_zero))
    under = [r.deviation_pct for r in results if r.deviation_pct <= OVER]
    over = [r.deviation_pct for r in results if r.deviation_pct > OVER]
    return EvaluationSummary(
        label=label,
        split=split,
        n=len(results),
        success_count=sum(r.sign_ok for r in results),
        n_over_100=len(over),
        mean_dev_under_100=_mean(under),
        mean_dev_over_100=_mean(over),
        per_molecule=tuple(sorted(results, key=lambda r: r.id)),
    )


# ------------------------------------------------------------------ files


def _pct(x: float) -> str:
    return f"{x:.2f}"


def _summary_row(s: EvaluationSummary) -> list[str]:
    return [s.label, f"Success count: {s.success_count}", str(s.n_over_100), _pct(s.mean_dev_under_100), _pct(s.mean_dev_over_100)]


def _csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _md_table(header: Sequence[str], rows: Iterable[Sequence]) -> list[str]:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(str(c) for c in row) + " |" for row in rows]
    return lines


def _rethink_rows(stats: Mapping[str, RethinkStats] | Sequence[tuple[str, RethinkStats]]) -> list[list[str]]:
    items = stats.items() if isinstance(stats, Mapping) else stats
    return [[name, str(st.points_requiring_rethink), str(st.total_rethinks)] for name, st in items]


def emit_report(
    summaries: Sequence[EvaluationSummary],
    corpus_stats: Mapping[str, RethinkStats] | Sequence[tuple[str, RethinkStats]],
    out_dir: str | Path,
) -> list[Path]:
    """Write the report files and return their paths.

    Files
    -----
    ``summary.csv``
        One row per summary: ``Split`` followed by the five table columns.
    ``summary_<split>.csv``
        The five-column table for one split, rows in input order.
    ``rethink.csv``
        One row per model: rethink points and total rethinks.
    ``deviation_<label>_<split>.csv``
        Per-molecule deviation and bucket, for deviation bar charts.
    ``consistency_<label>_<split>.csv``
        Sign-agreement success and failure fractions, for pie charts.
    ``report.md``
        All of the above rendered as markdown.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files: dict[str, str] = {}
    files["summary.csv"] = _csv_text(("Split", *SUMMARY_COLUMNS), ([s.split, *_summary_row(s)] for s in summaries))
    splits = list(dict.fromkeys(s.split for s in summaries))
    for split in splits:
        rows = [_summary_row(s) for s in summaries if s.split == split]
        files[f"summary_{_slug(split)}.csv"] = _csv_text(SUMMARY_COLUMNS, rows)
    rethink = _rethink_rows(corpus_stats)
    files["rethink.csv"] = _csv_text(RETHINK_COLUMNS, rethink)
    for s in summaries:
        files[f"deviation_{s.slug}.csv"] = _csv_text(
            DEVIATION_COLUMNS,
            (
                [r.id, f"{r.predicted:.4f}", f"{r.actual:.4f}", _pct(r.deviation_pct), r.bucket,
                 str(r.sign_ok).lower(), str(r.near_zero_reference).lower()]
                for r in s.per_molecule
            ),
        )
        files[f"consistency_{s.slug}.csv"] = _csv_text(
            CONSISTENCY_COLUMNS, [[f"{s.success_fraction:.4f}", f"{1.0 - s.success_fraction:.4f}" if s.n else "0.0000"]]
        )
    files["report.md"] = _markdown(summaries, splits, rethink)
    written = []
    for name, text in files.items():
        path = out / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
    log.info("wrote %d report files to %s", len(written), out)
    return written


def _markdown(summaries: Sequence[EvaluationSummary], splits: Sequence[str], rethink: list[list[str]]) -> str:
    lines = ["# Solubility prediction report", ""]
    if not summaries:
        lines += ["No evaluation summaries were supplied.", ""]
    for split in splits:
        members = [s for s in summaries if s.split == split]
        n = max(s.n for s in members)
        lines += [f"## Summarized results for {n} {split} molecules", ""]
        lines += _md_table(SUMMARY_COLUMNS, (_summary_row(s) for s in members))
        lines.append("")
    lines += ["## Rethink points and total rethink times during construction", ""]
    lines += _md_table(RETHINK_COLUMNS, rethink)
    lines.append("")
    for s in summaries:
        if not s.per_molecule:
            continue
        lines += [f"### Per-molecule deviations: {s.label}, {s.split}", ""]
        lines += _md_table(
            ("Molecule", "Predicted logS", "Measured logS", "Deviation %", "Sign agrees"),
            (
                [r.id + (" (near-zero reference)" if r.near_zero_reference else ""), f"{r.predicted:.2f}",
                 f"{r.actual:.2f}", _pct(r.deviation_pct), "yes" if r.sign_ok else "no"]
                for r in s.per_molecule
            ),
        )
        lines += ["", f"Sign agreement: {s.success_count} of {s.n} ({100 * s.success_fraction:.2f}%).", ""]
    return "\n".join(lines).rstrip("\n") + "\n"


# ------------------------------------------------------------------ predictions


def write_predictions(predictions: Sequence[Prediction], path: str | Path) -> None:
    rows = ([p.molecule_id, repr(p.mean), repr(p.std), p.source] for p in predictions)
    Path(path).write_text(_csv_text(PREDICTION_COLUMNS, rows), encoding="utf-8")


def read_predictions(path: str | Path) -> list[Prediction]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"predictions file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != PREDICTION_COLUMNS:
            raise ValueError(f"{path}: expected columns {PREDICTION_COLUMNS}, got {reader.fieldnames}")
        return [Prediction(float(r["mean"]), float(r["std"]), r["source"], r["id"]) for r in reader]
