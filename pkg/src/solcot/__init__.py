"""Solubility prediction with GP surrogates and deviation-gated LLM refinement."""

__version__ = "0.1.0"
