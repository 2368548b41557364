"""Chain-of-thought corpus building (LLM-CoT and ML-LLM-CoT) and inference."""

from .corpus import (
    ANNOTATIONS,
    CorpusEntry,
    CorpusHeader,
    CotConfig,
    RethinkStats,
    annotate,
    compute_stats,
    read_corpus,
    write_corpus,
)
from .loops import PreparedMolecule, build_llm_cot, build_ml_llm_cot, predict_unknown, prepare
from .metrics import NEAR_ZERO_EPS, deviation_detail, percent_deviation, sign_agreement

__all__ = [
    "ANNOTATIONS",
    "CorpusEntry",
    "CorpusHeader",
    "CotConfig",
    "NEAR_ZERO_EPS",
    "PreparedMolecule",
    "RethinkStats",
    "annotate",
    "build_llm_cot",
    "build_ml_llm_cot",
    "compute_stats",
    "deviation_detail",
    "percent_deviation",
    "predict_unknown",
    "prepare",
    "read_corpus",
    "sign_agreement",
    "write_corpus",
]
