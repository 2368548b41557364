"""Pull a numeric log-solubility prediction out of free-form model output."""

from __future__ import annotations

import re

__all__ = [
    "ExtractionError",
    "ImplausibleValue",
    "NoNumericValue",
    "PLAUSIBLE_RANGE",
    "extract_numeric_prediction",
]

PLAUSIBLE_RANGE = (-15.0, 5.0)

_NUMBER = r"[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?"
_TAGGED = re.compile(r"PREDICTION\s*:\s*\**\s*(" + _NUMBER + ")", re.IGNORECASE)
# a number not glued to letters, digits or a decimal point (so "log10" or "C6H6" do not count)
_STANDALONE = re.compile(r"(?<![\w.])(" + _NUMBER + r")(?!\w)(?!\.\d)")
_THINK = re.compile(r"<think>.*?(?:</think>|\Z)", re.DOTALL | re.IGNORECASE)
_MINUS_SIGNS = str.maketrans({"−": "-", "–": "-", "‒": "-", "－": "-"})


class ExtractionError(ValueError):
    """The response holds no usable prediction; the caller should re-ask."""


class NoNumericValue(ExtractionError):
    pass


class ImplausibleValue(ExtractionError):
    def __init__(self, value: float) -> None:
        lo, hi = PLAUSIBLE_RANGE
        super().__init__(f"value {value:g} outside plausible range [{lo:g}, {hi:g}]")
        self.value = value


def _search(text: str) -> float | None:
    m = _TAGGED.search(text)
    if m:
        return float(m.group(1))
    numbers = _STANDALONE.findall(text)
    if numbers:
        return float(numbers[-1])
    return None


def extract_numeric_prediction(response: str) -> float:
    """Return the predicted value from ``response``.

    The first ``PREDICTION: <number>`` line wins (case-insensitive);
    otherwise the last standalone number is used. Reasoning blocks
    (``<think>…</think>``) are ignored when the text outside them yields a
    value, since reasoning models tend to try out numbers there.

    Raises
    ------
    NoNumericValue
        No number found anywhere.
    ImplausibleValue
        The number lies outside :data:`PLAUSIBLE_RANGE` (or is not finite).
    """
    text = response.translate(_MINUS_SIGNS)
    visible = _THINK.sub(" ", text)
    value = _search(visible)
    if value is None and visible != text:
        value = _search(text)
    if value is None:
        raise NoNumericValue("no numeric value in response")
    lo, hi = PLAUSIBLE_RANGE
    if not lo <= value <= hi:  # also rejects inf and nan
        raise ImplausibleValue(value)
    return value
