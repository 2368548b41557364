"""The deviation-gated corpus-building loops and inference on unknown molecules.

LLM-CoT
    The first ``basis_size`` seed molecules serve as in-prompt examples.
    Every other seed molecule is predicted by the LLM and re-predicted
    while its deviation exceeds ``rethink_threshold_pct``, then the
    analyzer explains the accepted prediction's error.

ML-LLM-CoT
    The GP predicts each non-basis seed molecule first. A molecule within
    ``refine_threshold_pct`` is recorded without any LLM call. Otherwise
    the analyzer explains the miss and the predictor refines, alternating
    until the deviation falls within the threshold.

In both loops the GP or first LLM prediction is attempt 1, so a molecule
with ``n`` corpus entries accounts for ``n - 1`` rethinks, and no molecule
gets more than ``max_rethinks_per_molecule`` attempts.
"""

from __future__ import annotations

import logging
import warnings
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from ..chem import DescriptorVector, Fingerprint, compute_descriptors, morgan_fingerprint, parse_smiles, tanimoto
from ..dataset import SolubilityRecord
from ..llm import (
    Example,
    ExtractionError,
    LlmClient,
    Neighbor,
    PriorAttempt,
    Target,
    build_error_analysis_prompt,
    build_prediction_prompt,
    condense_corpus,
    extract_numeric_prediction,
)
from ..surrogate import GpModel, Prediction, gp_predict
from .corpus import CorpusEntry, CotConfig, RethinkStats, annotate, compute_stats
from .metrics import deviation_detail

log = logging.getLogger(__name__)

__all__ = ["PreparedMolecule", "build_llm_cot", "build_ml_llm_cot", "predict_unknown", "prepare"]


@dataclass(frozen=True)
class PreparedMolecule:
    record: SolubilityRecord
    descriptors: DescriptorVector
    fingerprint: Fingerprint

    @property
    def target(self) -> Target:
        return Target(self.record.name, self.record.smiles, self.descriptors)

    @property
    def example(self) -> Example:
        return Example(self.record.name, self.record.smiles, self.descriptors, self.record.log_s)


def prepare(records: Sequence[SolubilityRecord]) -> list[PreparedMolecule]:
    """Parse each record once and attach its descriptors and fingerprint."""
    out = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # stereo markers are irrelevant here
        for r in records:
            mol = parse_smiles(r.smiles)
            out.append(PreparedMolecule(r, compute_descriptors(mol), morgan_fingerprint(mol)))
    return out


def _neighbors(target: PreparedMolecule, pool: Sequence[PreparedMolecule], n: int) -> list[Neighbor]:
    """The ``n`` most similar pool members; ties go to the earlier one."""
    scored = [(tanimoto(target.fingerprint, m.fingerprint), k) for k, m in enumerate(pool)]
    scored.sort(key=lambda t: (-t[0], t[1]))
    return [
        Neighbor(pool[k].record.name, pool[k].record.smiles, sim, pool[k].record.log_s)
        for sim, k in scored[:n]
    ]


def _score(text: str, actual: float) -> tuple[float | None, float | None, bool]:
    try:
        value = extract_numeric_prediction(text)
    except ExtractionError as exc:
        log.info("unusable response (%s)", exc)
        return None, None, False
    dev, near_zero = deviation_detail(value, actual)
    return value, dev, near_zero


def _best(attempts: Sequence[CorpusEntry]) -> CorpusEntry | None:
    scored = [e for e in attempts if e.deviation_pct is not None]
    return min(scored, key=lambda e: (e.deviation_pct, e.attempt_index)) if scored else None


def _finalize(last: CorpusEntry, history: Sequence[CorpusEntry], within: bool) -> CorpusEntry:
    """Turn the last attempt into the final entry, keeping the best attempt if the cap was hit."""
    chosen = last if within else _best([*history, last])
    return replace(
        last,
        status="final",
        cap_exhausted=not within,
        accepted_value=None if chosen is None else chosen.parsed_value,
        accepted_deviation_pct=None if chosen is None else chosen.deviation_pct,
        accepted_attempt=None if chosen is None else chosen.attempt_index,
    )


def _analyze(analyzer: LlmClient, entry: CorpusEntry, mol: PreparedMolecule, gp_hint=None) -> dict:
    """Ask the analyzer about ``entry``'s miss; returns the fields to set on the entry."""
    text = analyzer.generate(build_error_analysis_prompt(entry, entry.actual, mol.target, gp_hint)).response
    return {"error_analysis": text, "annotation": annotate(text)}


def _split_basis(seed: Sequence[SolubilityRecord], cfg: CotConfig) -> list[PreparedMolecule]:
    if cfg.basis_size >= len(seed):
        raise ValueError(f"basis_size ({cfg.basis_size}) must be smaller than the seed set ({len(seed)})")
    return prepare(seed)


def build_llm_cot(
    seed: Sequence[SolubilityRecord],
    predictor: LlmClient,
    analyzer: LlmClient,
    cfg: CotConfig | None = None,
) -> tuple[list[CorpusEntry], RethinkStats]:
    """Build the LLM-CoT corpus over the non-basis seed molecules.

    A response without a usable number counts as a failed attempt. Retry
    prompts list the earlier rejected values so that a deterministic
    backend is not asked the identical question twice.
    """
    cfg = cfg or CotConfig()
    mols = _split_basis(seed, cfg)
    known = [m.example for m in mols[: cfg.basis_size]]
    cap = cfg.max_rethinks_per_molecule
    entries: list[CorpusEntry] = []
    for k in range(cfg.basis_size, len(mols)):
        mol = mols[k]
        rec = mol.record
        neighbors = _neighbors(mol, mols[:k], cfg.n_neighbors)
        digest = condense_corpus(entries, cfg.digest_budget)
        history: list[CorpusEntry] = []
        for attempt in range(1, cap + 1):
            prior = [PriorAttempt(e.parsed_value, e.deviation_pct) for e in history]
            prompt = build_prediction_prompt(known, neighbors, digest, mol.target, previous_attempts=prior)
            text = predictor.generate(prompt).response
            value, dev, near_zero = _score(text, rec.log_s)
            entry = CorpusEntry(
                molecule_id=rec.id,
                molecule_name=rec.name,
                attempt_index=attempt,
                actual=rec.log_s,
                prompt=prompt,
                raw_response=text,
                parsed_value=value,
                deviation_pct=dev,
                source="llm",
                status="rethink",
                near_zero_reference=near_zero,
            )
            within = dev is not None and dev <= cfg.rethink_threshold_pct
            if within or attempt == cap:
                break
            history.append(entry)
        final = _finalize(entry, history, within)
        if final.accepted_value is not None:
            view = replace(final, parsed_value=final.accepted_value, deviation_pct=final.accepted_deviation_pct)
            final = replace(final, **_analyze(analyzer, view, mol))
        entries += [*history, final]
        log.info("%s: %d attempt(s), accepted deviation %s", rec.id, final.attempt_index, final.accepted_deviation_pct)
    return entries, compute_stats(entries)


def build_ml_llm_cot(
    model: GpModel,
    seed: Sequence[SolubilityRecord],
    predictor: LlmClient,
    analyzer: LlmClient,
    cfg: CotConfig | None = None,
) -> tuple[list[CorpusEntry], RethinkStats]:
    """Build the ML-LLM-CoT corpus: GP first, LLM refinement only where the GP misses.

    Each rejected attempt carries the analyzer's explanation of its error,
    which is fed to the next refinement prompt together with the GP mean
    and standard deviation.
    """
    cfg = cfg or CotConfig()
    mols = _split_basis(seed, cfg)
    known = [m.example for m in mols[: cfg.basis_size]]
    cap = cfg.max_rethinks_per_molecule
    entries: list[CorpusEntry] = []
    for k in range(cfg.basis_size, len(mols)):
        mol = mols[k]
        rec = mol.record
        gp = gp_predict(model, mol.descriptors, molecule_id=rec.id)
        hint = (gp.mean, gp.std)
        dev, near_zero = deviation_detail(gp.mean, rec.log_s)
        entry = CorpusEntry(
            molecule_id=rec.id,
            molecule_name=rec.name,
            attempt_index=1,
            actual=rec.log_s,
            prompt="",
            raw_response="",
            parsed_value=gp.mean,
            deviation_pct=dev,
            source="gp",
            status="rethink",
            near_zero_reference=near_zero,
        )
        if dev <= cfg.refine_threshold_pct:
            entries.append(_finalize(entry, [], True))
            log.info("%s: GP within threshold (%.1f%%)", rec.id, dev)
            continue
        neighbors = _neighbors(mol, mols[:k], cfg.n_neighbors)
        digest = condense_corpus(entries, cfg.digest_budget)
        history: list[CorpusEntry] = []
        analysis = ""
        within = False
        for attempt in range(2, cap + 1):
            if entry.parsed_value is not None:
                entry = replace(entry, **_analyze(analyzer, entry, mol, hint if entry.source == "gp" else None))
                analysis = entry.error_analysis
            history.append(entry)
            prior = [PriorAttempt(e.parsed_value, e.deviation_pct) for e in history if e.source != "gp"]
            prompt = build_prediction_prompt(
                known, neighbors, digest, mol.target, gp_hint=hint, analysis=analysis, previous_attempts=prior
            )
            text = predictor.generate(prompt).response
            value, dev, near_zero = _score(text, rec.log_s)
            entry = CorpusEntry(
                molecule_id=rec.id,
                molecule_name=rec.name,
                attempt_index=attempt,
                actual=rec.log_s,
                prompt=prompt,
                raw_response=text,
                parsed_value=value,
                deviation_pct=dev,
                source="llm_refined",
                status="rethink",
                near_zero_reference=near_zero,
            )
            within = dev is not None and dev <= cfg.refine_threshold_pct
            if within:
                break
        entries += [*history, _finalize(entry, history, within)]
        log.info("%s: GP missed, %d attempt(s) in total", rec.id, entry.attempt_index)
    return entries, compute_stats(entries)


def predict_unknown(
    corpus: Sequence[CorpusEntry],
    seed: Sequence[SolubilityRecord],
    targets: Sequence[SolubilityRecord],
    predictor: LlmClient,
    cfg: CotConfig | None = None,
    model: GpModel | None = None,
    mode: str = "llm-cot",
    max_workers: int = 1,
) -> list[Prediction]:
    """Predict ``targets`` without looking at their measured values.

    Parameters
    ----------
    corpus
        Entries from one of the building loops; condensed into the prompt.
    seed
        All seed records, shown to the predictor as known examples and
        searched for each target's nearest neighbours.
    mode
        ``"llm-cot"``: every target is predicted by the LLM, ``std = 0``.
        ``"ml-llm-cot"``: the GP predicts every target and only targets
        whose GP std exceeds the uncertainty gate are sent to the LLM.
    max_workers
        Targets are independent, so they may be predicted in parallel
        threads. Output order always follows ``targets``. Keep the default
        of 1 with a list-scripted backend, whose replay order would
        otherwise depend on thread scheduling.

    Raises
    ------
    ExtractionError
        LLM-CoT mode only, when a response and its re-ask both lack a
        usable number. ML-LLM-CoT mode falls back to the GP prediction.
    """
    cfg = cfg or CotConfig()
    if mode not in ("llm-cot", "ml-llm-cot"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "llm-cot" and not corpus:
        raise ValueError("LLM-CoT inference needs a non-empty corpus")
    if mode == "ml-llm-cot" and model is None:
        raise ValueError("ML-LLM-CoT inference needs a trained GP model")
    seeds = prepare(seed)
    known = [m.example for m in seeds]
    digest = condense_corpus(corpus, cfg.digest_budget)
    gate = None
    if model is not None:
        gate = cfg.uncertainty_gate_std if cfg.uncertainty_gate_std is not None else model.signal_std / 2.0

    def ask(mol: PreparedMolecule, hint) -> float | None:
        neighbors = _neighbors(mol, seeds, cfg.n_neighbors)
        prior: list[PriorAttempt] = []
        for _ in range(2):  # one re-ask on an unusable response
            prompt = build_prediction_prompt(known, neighbors, digest, mol.target, gp_hint=hint, previous_attempts=prior)
            try:
                return extract_numeric_prediction(predictor.generate(prompt).response)
            except ExtractionError as exc:
                last = exc
                prior = [PriorAttempt(None, None)]
        if mode == "llm-cot":
            raise last
        log.warning("%s: no usable LLM value after a re-ask; keeping the GP mean", mol.record.id)
        return None

    def one(mol: PreparedMolecule) -> Prediction:
        rid = mol.record.id
        if mode == "llm-cot":
            return Prediction(mean=ask(mol, None), std=0.0, source="llm", molecule_id=rid)
        gp = gp_predict(model, mol.descriptors, molecule_id=rid)
        if gp.std <= gate:
            return gp
        value = ask(mol, (gp.mean, gp.std))
        if value is None:
            return gp
        return Prediction(mean=value, std=gp.std, source="llm_refined", molecule_id=rid)

    mols = prepare(targets)
    if max_workers <= 1:
        return [one(m) for m in mols]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(one, mols))
