"""Deviation and sign-agreement metrics shared by the loops and the reports."""

from __future__ import annotations

import math

from ..surrogate import NonFiniteInput

__all__ = ["NEAR_ZERO_EPS", "deviation_detail", "percent_deviation", "sign_agreement"]

NEAR_ZERO_EPS = 1e-6


def deviation_detail(pred: float, actual: float) -> tuple[float, bool]:
    """Percent deviation of ``pred`` from ``actual`` and a near-zero-reference flag.

    The deviation is ``100 * |pred - actual| / |actual|``. When
    ``|actual| < 1e-6`` the relative form is meaningless, so the actual is
    treated as unit scale, giving ``100 * |pred - actual|``, and the flag
    is set.

    Raises
    ------
    NonFiniteInput
        Either argument is NaN or infinite.
    """
    if not (math.isfinite(pred) and math.isfinite(actual)):
        raise NonFiniteInput(f"deviation needs finite values, got pred={pred!r}, actual={actual!r}")
    diff = abs(pred - actual)
    if abs(actual) < NEAR_ZERO_EPS:
        return 100.0 * diff, True
    return 100.0 * diff / abs(actual), False


def percent_deviation(pred: float, actual: float) -> float:
    """``deviation_detail(pred, actual)[0]``.

    >>> percent_deviation(-2.0, -4.0)
    50.0
    """
    return deviation_detail(pred, actual)[0]


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def sign_agreement(pred: float, actual: float) -> bool:
    """True when both values are positive, both negative, or both exactly zero."""
    return _sign(pred) == _sign(actual)
