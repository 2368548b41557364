"""Prompt construction for the predictor and analyzer roles, and corpus condensation.

All builders are pure functions of their inputs. Prediction prompts end
with an output contract (a ``PREDICTION: <number>`` line) that
:func:`~solcot.llm.extract.extract_numeric_prediction` relies on.
"""

from __future__ import annotations

import re
from collections.abc import Sequence
from dataclasses import dataclass

from ..chem import DescriptorVector

__all__ = [
    "DESCRIPTOR_LABELS",
    "Example",
    "Neighbor",
    "PriorAttempt",
    "Target",
    "build_error_analysis_prompt",
    "build_prediction_prompt",
    "condense_corpus",
    "format_descriptors",
]

DESCRIPTOR_LABELS: dict[str, str] = {
    "mw": "MW",
    "logp": "LogP",
    "tpsa": "TPSA",
    "num_h_acceptors": "NumHAcceptors",
    "num_h_donors": "NumHDonors",
    "num_rotatable_bonds": "NumRotatableBonds",
    "heavy_atom_count": "HeavyAtomCount",
    "num_aromatic_rings": "NumAromaticRings",
    "fraction_csp3": "FractionCSP3",
    "ring_count": "RingCount",
}

UNITS = "log10 solubility in mol/L"


@dataclass(frozen=True)
class Target:
    name: str
    smiles: str
    descriptors: DescriptorVector


@dataclass(frozen=True)
class Example:
    name: str
    smiles: str
    descriptors: DescriptorVector
    log_s: float


@dataclass(frozen=True)
class Neighbor:
    name: str
    smiles: str
    similarity: float
    log_s: float


@dataclass(frozen=True)
class PriorAttempt:
    value: float | None  # None when the response held no usable number
    deviation_pct: float | None


def _fmt(value: float) -> str:
    if isinstance(value, int):
        return str(value)
    return repr(round(float(value), 2) + 0.0)  # + 0.0 turns -0.0 into 0.0


def format_descriptors(d: DescriptorVector) -> str:
    """``"MW: 78.11, LogP: 1.69, TPSA: 0.0, ..."`` in a fixed order."""
    return ", ".join(f"{label}: {_fmt(getattr(d, key))}" for key, label in DESCRIPTOR_LABELS.items())


def example_line(ex: Example) -> str:
    return f"- {ex.name} (SMILES {ex.smiles}): {format_descriptors(ex.descriptors)} -> logS = {_fmt(ex.log_s)}"


def build_prediction_prompt(
    known: Sequence[Example],
    similar: Sequence[Neighbor],
    corpus_digest: str,
    target: Target,
    gp_hint: tuple[float, float] | None = None,
    analysis: str = "",
    previous_attempts: Sequence[PriorAttempt] = (),
) -> str:
    """Assemble a prediction prompt.

    Sections appear in this order: task framing, known examples, nearest
    known molecules, the condensed error-analysis digest (omitted when
    empty), optional surrogate estimate / analysis / earlier attempts, the
    target's descriptors and the output contract.
    """
    if not known:
        raise ValueError("at least one known example is required")
    parts = [
        "TASK: Predict the aqueous solubility of a molecule as logS "
        f"({UNITS}) from its molecular descriptors.",
        "",
        "KNOWN EXAMPLES (descriptors -> measured logS):",
        *(example_line(ex) for ex in known),
    ]
    if similar:
        parts += ["", "MOST SIMILAR KNOWN MOLECULES (Tanimoto similarity to the target):"]
        parts += [
            f"- {n.name} (SMILES {n.smiles}): similarity {n.similarity:.2f}, logS = {_fmt(n.log_s)}"
            for n in similar
        ]
    if corpus_digest.strip():
        parts += ["", "LESSONS FROM EARLIER ERROR ANALYSES (newest first):", corpus_digest.strip()]
    if gp_hint is not None:
        mean, std = gp_hint
        parts += [
            "",
            "SURROGATE MODEL ESTIMATE (Gaussian process on the same descriptors):",
            f"GP mean: {mean:.2f}, GP std: {std:.2f}",
        ]
    if analysis.strip():
        parts += ["", "ANALYSIS OF THE CURRENT ESTIMATE:", analysis.strip()]
    if previous_attempts:
        parts += ["", "YOUR EARLIER ATTEMPTS FOR THIS MOLECULE (rejected):"]
        for k, att in enumerate(previous_attempts, start=1):
            if att.value is None:
                parts.append(f"- attempt {k}: no usable number")
            else:
                parts.append(f"- attempt {k}: {att.value:.2f} (deviation {att.deviation_pct:.1f}%)")
    parts += [
        "",
        f"TARGET MOLECULE: {target.name} (SMILES {target.smiles})",
        format_descriptors(target.descriptors),
        "",
        "Reason briefly, then finish with one line of exactly this form:",
        "PREDICTION: <number>",
    ]
    return "\n".join(parts) + "\n"


def build_error_analysis_prompt(
    entry,
    actual: float,
    target: Target,
    gp_hint: tuple[float, float] | None = None,
) -> str:
    """Ask the analyzer why a prediction missed.

    ``entry`` needs ``parsed_value`` and ``deviation_pct`` attributes
    (a :class:`~solcot.cot.CorpusEntry` qualifies).
    """
    lines = [
        "ERROR ANALYSIS: A solubility prediction is compared with the measured value.",
        "",
        f"Molecule: {target.name} (SMILES {target.smiles})",
        f"Descriptors: {format_descriptors(target.descriptors)}",
        f"Predicted logS: {entry.parsed_value:.2f}",
        f"Measured logS: {actual:.2f}",
        f"deviation: {entry.deviation_pct:.1f}%",
    ]
    if gp_hint is not None:
        lines.append(f"The prediction came from a Gaussian-process surrogate (std {gp_hint[1]:.2f}).")
    lines += [
        "",
        "In at most 5 sentences, state which structural features or descriptors were "
        "mis-weighted and in which direction the estimate should move. Say whether you "
        "agree with the estimate with a minor revision, judge from the structure, or "
        "correct a surrogate-model error.",
    ]
    return "\n".join(lines) + "\n"


_SENTENCE_END = re.compile(r"(?<=[.!?])\s")


def first_sentence(text: str, limit: int = 160) -> str:
    flat = " ".join(text.split())
    sentence = _SENTENCE_END.split(flat, maxsplit=1)[0] if flat else ""
    if len(sentence) > limit:
        sentence = sentence[: limit - 3].rstrip() + "..."
    return sentence


def condense_corpus(entries: Sequence, budget: int = 4000) -> str:
    """Pack one line per molecule, newest first, into at most ``budget`` characters.

    Only each molecule's final entry is summarized (its name, accepted
    deviation and the first sentence of the latest analysis for that
    molecule). Packing stops at the first summary that no longer fits, so
    the digest is always a contiguous run of the most recent molecules.
    """
    if budget < 256:
        raise ValueError(f"budget must be >= 256 characters, got {budget}")
    order: list[str] = []
    finals: dict[str, object] = {}
    analyses: dict[str, str] = {}
    attempts: dict[str, int] = {}
    for e in entries:
        mid = e.molecule_id
        if mid not in attempts:
            order.append(mid)
            attempts[mid] = 0
        attempts[mid] += 1
        if e.error_analysis:
            analyses[mid] = e.error_analysis
        if e.status == "final":
            finals[mid] = e
    lines: list[str] = []
    used = 0
    for mid in reversed(order):
        if mid not in finals:
            continue
        e = finals[mid]
        dev = e.accepted_deviation_pct
        dev_text = "no usable prediction" if dev is None else f"deviation {dev:.1f}%"
        line = f"- {e.molecule_name}: {dev_text} after {attempts[mid]} attempt(s)"
        excerpt = first_sentence(analyses.get(mid, ""))
        if excerpt:
            line += f"; {excerpt}"
        cost = len(line) + (1 if lines else 0)
        if used + cost > budget:
            break
        lines.append(line)
        used += cost
    return "\n".join(lines)
