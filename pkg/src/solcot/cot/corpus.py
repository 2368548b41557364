"""Corpus entries, loop configuration, rethink statistics and JSONL persistence."""

from __future__ import annotations

import json
import re
from collections.abc import Iterable, Sequence
from dataclasses import asdict, dataclass, fields
from pathlib import Path

__all__ = [
    "ANNOTATIONS",
    "CORPUS_FORMAT",
    "CorpusEntry",
    "CorpusHeader",
    "CotConfig",
    "RethinkStats",
    "annotate",
    "compute_stats",
    "read_corpus",
    "write_corpus",
]

CORPUS_FORMAT = "solcot-corpus"
CORPUS_VERSION = 1
MODES = ("llm-cot", "ml-llm-cot")
SOURCES = ("gp", "llm", "llm_refined")
ANNOTATIONS = ("agree_minor_revision", "structure_based", "ml_correction", "none")


@dataclass(frozen=True)
class CotConfig:
    """Gates and budgets for corpus building and inference.

    ``uncertainty_gate_std`` of ``None`` means half the trained GP's
    signal standard deviation, resolved when a model is available.
    """

    rethink_threshold_pct: float = 100.0
    refine_threshold_pct: float = 30.0
    max_rethinks_per_molecule: int = 25
    basis_size: int = 10
    uncertainty_gate_std: float | None = None
    digest_budget: int = 4000
    n_neighbors: int = 3

    def __post_init__(self) -> None:
        if not self.rethink_threshold_pct > 0 or not self.refine_threshold_pct > 0:
            raise ValueError("deviation thresholds must be > 0")
        if self.max_rethinks_per_molecule < 1:
            raise ValueError(f"max_rethinks_per_molecule must be >= 1, got {self.max_rethinks_per_molecule}")
        if self.basis_size < 1:
            raise ValueError(f"basis_size must be >= 1, got {self.basis_size}")
        if self.uncertainty_gate_std is not None and self.uncertainty_gate_std < 0:
            raise ValueError("uncertainty_gate_std must be >= 0")
        if self.digest_budget < 256:
            raise ValueError(f"digest_budget must be >= 256, got {self.digest_budget}")
        if self.n_neighbors < 0:
            raise ValueError("n_neighbors must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "CotConfig":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


@dataclass(frozen=True)
class CorpusEntry:
    """One prediction attempt for one molecule.

    ``status`` is ``"rethink"`` for an attempt that was rejected and
    retried, and ``"final"`` for the last attempt of a molecule. The
    ``accepted_*`` fields are set on final entries only. They differ from
    the entry's own values when the attempt cap was hit, in which case the
    best earlier attempt is kept and ``cap_exhausted`` is set.
    """

    molecule_id: str
    molecule_name: str
    attempt_index: int
    actual: float
    prompt: str
    raw_response: str
    parsed_value: float | None
    deviation_pct: float | None
    source: str
    status: str
    error_analysis: str = ""
    annotation: str = "none"
    near_zero_reference: bool = False
    cap_exhausted: bool = False
    accepted_value: float | None = None
    accepted_deviation_pct: float | None = None
    accepted_attempt: int | None = None

    def __post_init__(self) -> None:
        if self.attempt_index < 1:
            raise ValueError("attempt_index is 1-based")
        if self.deviation_pct is not None and self.deviation_pct < 0:
            raise ValueError("deviation_pct must be >= 0")
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")
        if self.status not in ("rethink", "final"):
            raise ValueError(f"unknown status {self.status!r}")
        if self.annotation not in ANNOTATIONS:
            raise ValueError(f"unknown annotation {self.annotation!r}")


@dataclass(frozen=True)
class RethinkStats:
    points_requiring_rethink: int = 0
    total_rethinks: int = 0


def compute_stats(entries: Iterable[CorpusEntry]) -> RethinkStats:
    """Molecules with two or more attempts, and the sum of (attempts - 1)."""
    attempts: dict[str, int] = {}
    for e in entries:
        attempts[e.molecule_id] = attempts.get(e.molecule_id, 0) + 1
    return RethinkStats(
        points_requiring_rethink=sum(1 for n in attempts.values() if n >= 2),
        total_rethinks=sum(n - 1 for n in attempts.values()),
    )


_KEYWORDS = (
    ("agree_minor_revision", re.compile(r"\bagree|\bminor (?:revision|adjustment)|\bclose(?:ly)? to", re.I)),
    ("ml_correction", re.compile(r"\bsurrogate|\bgaussian|\bGP\b|machine[- ]learning|\bmodel (?:under|over)", re.I)),
    ("structure_based", re.compile(r"\bstructur|\bring|\baromatic|functional group|substituent|heterocycl", re.I)),
)


def annotate(analysis: str) -> str:
    """Classify an analyzer text by keyword; the first matching class wins.

    >>> annotate("I agree with the estimate, with a minor revision.")
    'agree_minor_revision'
    >>> annotate("The fused aromatic ring system lowers solubility.")
    'structure_based'
    >>> annotate("")
    'none'
    """
    for label, pattern in _KEYWORDS:
        if pattern.search(analysis):
            return label
    return "none"


# ------------------------------------------------------------------ persistence


@dataclass(frozen=True)
class CorpusHeader:
    mode: str
    config: dict
    split_checksum: str = ""
    backends: dict | None = None

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")

    def to_dict(self) -> dict:
        return {
            "format": CORPUS_FORMAT,
            "version": CORPUS_VERSION,
            "mode": self.mode,
            "config": self.config,
            "split_checksum": self.split_checksum,
            "backends": self.backends or {},
        }


def _dumps(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True)


def write_corpus(path: str | Path, header: CorpusHeader, entries: Sequence[CorpusEntry]) -> None:
    """Write the header line followed by one JSON object per entry."""
    lines = [_dumps(header.to_dict())] + [_dumps(asdict(e)) for e in entries]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_corpus(path: str | Path) -> tuple[CorpusHeader, list[CorpusEntry]]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"corpus file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        rows = [json.loads(line) for line in fh if line.strip()]
    if not rows or rows[0].get("format") != CORPUS_FORMAT:
        raise ValueError(f"{path} is not a corpus file (missing header line)")
    head = rows[0]
    if head.get("version") != CORPUS_VERSION:
        raise ValueError(f"unsupported corpus version {head.get('version')!r}")
    header = CorpusHeader(
        mode=head["mode"],
        config=head.get("config", {}),
        split_checksum=head.get("split_checksum", ""),
        backends=head.get("backends") or {},
    )
    return header, [CorpusEntry(**row) for row in rows[1:]]
