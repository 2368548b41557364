"""ESOL ingestion and similarity-based seed / similar / dissimilar splits.

The split mirrors the evaluation protocol: a set of seed molecules with
known solubility, the molecules most similar to them and the molecules
least similar to them. Similarity of a candidate to the seed set is its
maximum (or, optionally, mean) Tanimoto similarity to any seed, on
radius-2, 2048-bit circular fingerprints.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import warnings
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .chem import SmilesError, morgan_fingerprint, parse_smiles, tanimoto

log = logging.getLogger(__name__)

__all__ = [
    "DatasetError",
    "DatasetSplit",
    "DuplicateSeedId",
    "EmptyDataset",
    "InsufficientRecords",
    "MissingColumn",
    "SolubilityRecord",
    "UnknownSeedId",
    "load_esol",
    "load_split",
    "save_split",
    "select_splits",
]

ESOL_ID_COLUMN = "Compound ID"
ESOL_SMILES_COLUMN = "smiles"
ESOL_LOGS_COLUMN = "measured log solubility in mols per litre"


class DatasetError(Exception):
    """Base class for dataset problems."""


class MissingColumn(DatasetError, KeyError):
    def __str__(self) -> str:  # KeyError would otherwise repr() the message
        return str(self.args[0])


class EmptyDataset(DatasetError, ValueError):
    pass


class DuplicateSeedId(DatasetError, ValueError):
    pass


class UnknownSeedId(DatasetError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0])


class InsufficientRecords(DatasetError, ValueError):
    pass


@dataclass(frozen=True)
class SolubilityRecord:
    id: str
    name: str
    smiles: str
    log_s: float


@dataclass
class DatasetSplit:
    """Seed, similar and dissimilar records plus each candidate's similarity score."""

    seed: list[SolubilityRecord]
    similar: list[SolubilityRecord]
    dissimilar: list[SolubilityRecord]
    scores: dict[str, float] = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def checksum(self) -> str:
        """SHA-256 over the member ids of each part, for provenance headers."""
        payload = json.dumps(
            {part: [r.id for r in getattr(self, part)] for part in ("seed", "similar", "dissimilar")},
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()

    def part(self, name: str) -> list[SolubilityRecord]:
        if name not in ("seed", "similar", "dissimilar"):
            raise KeyError(f"unknown split part {name!r}")
        return getattr(self, name)


def load_esol(
    path: str | Path,
    id_column: str = ESOL_ID_COLUMN,
    smiles_column: str = ESOL_SMILES_COLUMN,
    logs_column: str = ESOL_LOGS_COLUMN,
    name_column: str | None = None,
) -> list[SolubilityRecord]:
    """Read a solubility CSV into records, in file order.

    Rows whose SMILES cannot be parsed, or whose solubility is not a
    finite number, are skipped with a warning. Identifiers and names are
    stripped of surrounding whitespace (several ESOL names carry a
    trailing space).

    Raises
    ------
    FileNotFoundError
        ``path`` does not exist.
    MissingColumn
        A required column is absent from the header.
    EmptyDataset
        No usable rows remain.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"dataset file not found: {path}")
    records: list[SolubilityRecord] = []
    skipped = 0
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in (id_column, smiles_column, logs_column) + ((name_column,) if name_column else ()):
            if col not in header:
                raise MissingColumn(f"column {col!r} not in header {header}")
        for line_no, row in enumerate(reader, start=2):
            smiles = (row[smiles_column] or "").strip()
            rec_id = (row[id_column] or "").strip()
            try:
                log_s = float(row[logs_column])
                if not math.isfinite(log_s):
                    raise ValueError("non-finite")
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    parse_smiles(smiles)
            except (SmilesError, ValueError) as exc:
                skipped += 1
                msg = f"{path.name}:{line_no}: skipping {rec_id!r} ({exc})"
                log.warning(msg)
                warnings.warn(msg, stacklevel=2)
                continue
            name = (row[name_column] or "").strip() if name_column else rec_id
            records.append(SolubilityRecord(id=rec_id, name=name, smiles=smiles, log_s=log_s))
    if not records:
        raise EmptyDataset(f"no usable records in {path}")
    log.info("loaded %d records from %s (%d skipped)", len(records), path, skipped)
    return records


def _seed_indices(records: Sequence[SolubilityRecord], selector, n_seed: int) -> list[int]:
    if isinstance(selector, str):
        if selector not in ("first-30", "first30"):
            raise ValueError(f"unknown seed selector {selector!r}")
        return list(range(n_seed))
    ids = list(selector)
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        raise DuplicateSeedId(f"seed ids listed more than once: {dupes}")
    index = {}
    for k, r in enumerate(records):
        index.setdefault(r.id, k)
    missing = [i for i in ids if i not in index]
    if missing:
        raise UnknownSeedId(f"seed ids not in dataset: {missing}")
    return [index[i] for i in ids]


def select_splits(
    records: Sequence[SolubilityRecord],
    seed_selector: str | Sequence[str] = "first-30",
    similarity: str = "max",
    n_seed: int = 30,
    n_similar: int = 20,
    n_dissimilar: int = 20,
    radius: int = 2,
    n_bits: int = 2048,
) -> DatasetSplit:
    """Choose seeds and rank every other record by similarity to them.

    Parameters
    ----------
    records
        Candidate pool in dataset order.
    seed_selector
        ``"first-30"`` (the first ``n_seed`` records) or an explicit id list.
    similarity
        ``"max"`` (nearest seed) or ``"mean"`` aggregation of the Tanimoto
        similarities between a candidate and the seeds.

    Notes
    -----
    Ties are broken by dataset order, the earlier record winning in both
    rankings. The similar part is chosen first and the dissimilar part is
    drawn from the remainder, so the parts are disjoint even when every
    score is equal.
    """
    if similarity not in ("max", "mean"):
        raise ValueError(f"similarity must be 'max' or 'mean', got {similarity!r}")
    need = n_seed + n_similar + n_dissimilar
    if len(records) < need:
        raise InsufficientRecords(f"need at least {need} records, got {len(records)}")
    seed_idx = _seed_indices(records, seed_selector, n_seed)
    if len(seed_idx) != n_seed:
        raise InsufficientRecords(f"expected {n_seed} seed ids, got {len(seed_idx)}")

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fps = [morgan_fingerprint(parse_smiles(r.smiles), radius, n_bits) for r in records]
    seed_set = set(seed_idx)
    pool = [k for k in range(len(records)) if k not in seed_set]
    scores: dict[int, float] = {}
    for k in pool:
        sims = [tanimoto(fps[k], fps[s]) for s in seed_idx]
        scores[k] = max(sims) if similarity == "max" else sum(sims) / len(sims)

    similar = sorted(pool, key=lambda k: (-scores[k], k))[:n_similar]
    taken = set(similar)
    dissimilar = sorted((k for k in pool if k not in taken), key=lambda k: (scores[k], k))[:n_dissimilar]
    log.info(
        "split: %d seeds, similar s in [%.3f, %.3f], dissimilar s in [%.3f, %.3f]",
        n_seed, scores[similar[-1]], scores[similar[0]], scores[dissimilar[0]], scores[dissimilar[-1]],
    )
    chosen = similar + dissimilar
    return DatasetSplit(
        seed=[records[k] for k in seed_idx],
        similar=[records[k] for k in similar],
        dissimilar=[records[k] for k in dissimilar],
        scores={records[k].id: scores[k] for k in chosen},
        config={
            "seed_selector": seed_selector if isinstance(seed_selector, str) else list(seed_selector),
            "similarity": similarity,
            "radius": radius,
            "n_bits": n_bits,
        },
    )


def save_split(split: DatasetSplit, path: str | Path) -> None:
    """Write the split manifest as JSON (ids, SMILES, log_s, similarity scores)."""

    def rows(part: list[SolubilityRecord], scored: bool) -> list[dict]:
        out = []
        for r in part:
            d = asdict(r)
            if scored:
                d["similarity"] = split.scores[r.id]
            out.append(d)
        return out

    doc = {
        "format": "solcot-split",
        "version": 1,
        "config": split.config,
        "checksum": split.checksum(),
        "seed": rows(split.seed, False),
        "similar": rows(split.similar, True),
        "dissimilar": rows(split.dissimilar, True),
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_split(path: str | Path) -> DatasetSplit:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"split manifest not found: {path}")
    doc = json.loads(path.read_text(encoding="utf-8"))
    if doc.get("format") != "solcot-split":
        raise DatasetError(f"{path} is not a split manifest")

    def recs(rows: list[dict]) -> list[SolubilityRecord]:
        return [SolubilityRecord(r["id"], r["name"], r["smiles"], float(r["log_s"])) for r in rows]

    scores = {r["id"]: float(r["similarity"]) for part in ("similar", "dissimilar") for r in doc[part]}
    return DatasetSplit(
        seed=recs(doc["seed"]),
        similar=recs(doc["similar"]),
        dissimilar=recs(doc["dissimilar"]),
        scores=scores,
        config=doc.get("config", {}),
    )
