"""Gaussian-process regression from descriptor vectors to log solubility.

Model
-----
Inputs are z-scored per feature and targets are centered on their mean.
The kernel is an isotropic squared exponential plus white noise::

    k(a, b) = sf2 * exp(-|a - b|^2 / (2 * ell^2)) + sn2 * [a == b]

Hyperparameters ``(sf2, ell, sn2)`` are fitted by maximising the log
marginal likelihood with bounded Nelder-Mead over their logarithms,
started from a data-driven initial guess plus ``restarts`` random points
drawn from a seeded generator, so training is fully deterministic.
"""

from __future__ import annotations

import json
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize

log = logging.getLogger(__name__)

__all__ = [
    "DEFAULT_BOUNDS",
    "FactorizationFailure",
    "GpModel",
    "NonFiniteInput",
    "Prediction",
    "Standardizer",
    "gp_predict",
    "leave_one_out",
    "log_marginal_likelihood",
    "rbf_kernel",
    "train_gp",
]

FORMAT_VERSION = 1

# (low, high) for signal variance, lengthscale and noise variance
DEFAULT_BOUNDS: dict[str, tuple[float, float]] = {
    "signal_variance": (1e-4, 1e3),
    "lengthscale": (1e-2, 1e3),
    "noise_variance": (1e-8, 1e1),
}
_JITTERS = (0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4)
_LOG_2PI = math.log(2.0 * math.pi)


class NonFiniteInput(ValueError):
    pass


class FactorizationFailure(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class Prediction:
    """A predicted log solubility with its uncertainty and provenance."""

    mean: float
    std: float
    source: str = "gp"  # gp | llm | llm_refined
    molecule_id: str | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.std) and self.std >= 0):
            raise ValueError(f"std must be finite and >= 0, got {self.std}")
        if self.source not in ("gp", "llm", "llm_refined"):
            raise ValueError(f"unknown prediction source {self.source!r}")


@dataclass
class Standardizer:
    mean: np.ndarray
    std: np.ndarray
    constant: np.ndarray  # bool per feature; such features get std = 1

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardizer":
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        constant = ~(std > 0)
        std = np.where(constant, 1.0, std)
        return cls(mean=mean, std=std, constant=constant)

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.std

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist(), "constant": self.constant.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        return cls(np.array(d["mean"], float), np.array(d["std"], float), np.array(d["constant"], bool))


def rbf_kernel(A: np.ndarray, B: np.ndarray, signal_variance: float, lengthscale: float) -> np.ndarray:
    """Squared-exponential covariance between the rows of ``A`` and ``B``."""
    sq = (
        np.sum(A * A, axis=1)[:, None]
        + np.sum(B * B, axis=1)[None, :]
        - 2.0 * A @ B.T
    )
    np.maximum(sq, 0.0, out=sq)
    return signal_variance * np.exp(-0.5 * sq / lengthscale**2)


def _factorize(K: np.ndarray) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of ``K``, adding escalating diagonal jitter if needed."""
    n = K.shape[0]
    for jitter in _JITTERS:
        try:
            L = cholesky(K + jitter * np.eye(n), lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            continue
        if np.all(np.isfinite(L)):
            return L, jitter
    raise FactorizationFailure(f"covariance not positive definite even with jitter {_JITTERS[-1]:g}")


def _check_finite(name: str, arr: np.ndarray) -> None:
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInput(f"{name} contains NaN or infinite values")


def log_marginal_likelihood(
    log_params: Sequence[float], X: np.ndarray, y: np.ndarray
) -> float:
    """Log marginal likelihood in nats for ``log_params = (log sf2, log ell, log sn2)``.

    ``X`` is used as given (already standardized) and ``y`` must already
    be centered. Evaluates ``-0.5 y^T alpha - sum(log diag L) - n/2 log 2 pi``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    _check_finite("X", X)
    _check_finite("y", y)
    sf2, ell, sn2 = (math.exp(v) for v in log_params)
    K = rbf_kernel(X, X, sf2, ell) + sn2 * np.eye(len(y))
    L, _ = _factorize(K)
    alpha = cho_solve((L, True), y, check_finite=False)
    return float(-0.5 * y @ alpha - np.sum(np.log(np.diag(L))) - 0.5 * len(y) * _LOG_2PI)


@dataclass
class GpModel:
    """Trained GP surrogate. The factor and weights are derived state."""

    log_signal_variance: float
    log_lengthscale: float
    log_noise_variance: float
    standardizer: Standardizer
    X_train: np.ndarray  # standardized inputs
    y_train: np.ndarray  # raw targets
    target_mean: float
    feature_names: tuple[str, ...] = ()
    optimization: dict = field(default_factory=dict)
    factor: np.ndarray = field(init=False, repr=False)
    alpha: np.ndarray = field(init=False, repr=False)
    jitter: float = field(init=False, default=0.0)

    def __post_init__(self) -> None:
        K = self._train_covariance()
        self.factor, self.jitter = _factorize(K)
        self.alpha = cho_solve((self.factor, True), self.y_centered, check_finite=False)

    @property
    def signal_variance(self) -> float:
        return math.exp(self.log_signal_variance)

    @property
    def lengthscale(self) -> float:
        return math.exp(self.log_lengthscale)

    @property
    def noise_variance(self) -> float:
        return math.exp(self.log_noise_variance)

    @property
    def signal_std(self) -> float:
        return math.sqrt(self.signal_variance)

    @property
    def y_centered(self) -> np.ndarray:
        return self.y_train - self.target_mean

    @property
    def log_params(self) -> np.ndarray:
        return np.array([self.log_signal_variance, self.log_lengthscale, self.log_noise_variance])

    def _train_covariance(self) -> np.ndarray:
        n = len(self.y_train)
        return rbf_kernel(self.X_train, self.X_train, self.signal_variance, self.lengthscale) + (
            self.noise_variance * np.eye(n)
        )

    def lml(self) -> float:
        return log_marginal_likelihood(self.log_params, self.X_train, self.y_centered)

    def check_invariants(self, rtol: float = 1e-8) -> None:
        """Raise ``AssertionError`` unless ``(K + sn2 I) alpha`` reproduces the centered targets."""
        K = self._train_covariance() + self.jitter * np.eye(len(self.y_train))
        resid = float(np.max(np.abs(K @ self.alpha - self.y_centered)))
        scale = max(float(np.max(np.abs(self.y_centered))), np.finfo(float).tiny)
        if resid > rtol * scale:
            raise AssertionError(f"alpha does not reproduce targets (max residual {resid:.3g})")

    def predict(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean and standard deviation for raw descriptor rows ``X``."""
        Xs = self.standardizer.transform(np.atleast_2d(X))
        _check_finite("X", Xs)
        Ks = rbf_kernel(Xs, self.X_train, self.signal_variance, self.lengthscale)
        mean = Ks @ self.alpha + self.target_mean
        v = solve_triangular(self.factor, Ks.T, lower=True, check_finite=False)
        var = self.signal_variance - np.sum(v * v, axis=0)
        return mean, np.sqrt(np.maximum(var, 0.0))

    # ------------------------------------------------------------ persistence

    def to_dict(self) -> dict:
        return {
            "format": "solcot-gp",
            "version": FORMAT_VERSION,
            "hyperparameters": {
                "log_signal_variance": self.log_signal_variance,
                "log_lengthscale": self.log_lengthscale,
                "log_noise_variance": self.log_noise_variance,
            },
            "standardizer": self.standardizer.to_dict(),
            "feature_names": list(self.feature_names),
            "X_raw": (self.X_train * self.standardizer.std + self.standardizer.mean).tolist(),
            "y": self.y_train.tolist(),
            "target_mean": self.target_mean,
            "optimization": self.optimization,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "GpModel":
        if doc.get("format") != "solcot-gp":
            raise ValueError("not a serialized GP model")
        if doc.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported GP model version {doc.get('version')!r}")
        std = Standardizer.from_dict(doc["standardizer"])
        hp = doc["hyperparameters"]
        return cls(
            log_signal_variance=float(hp["log_signal_variance"]),
            log_lengthscale=float(hp["log_lengthscale"]),
            log_noise_variance=float(hp["log_noise_variance"]),
            standardizer=std,
            X_train=std.transform(np.array(doc["X_raw"], dtype=float)),
            y_train=np.array(doc["y"], dtype=float),
            target_mean=float(doc["target_mean"]),
            feature_names=tuple(doc.get("feature_names", ())),
            optimization=doc.get("optimization", {}),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "GpModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _log_bounds(bounds: dict[str, tuple[float, float]]) -> tuple[np.ndarray, np.ndarray]:
    table = np.log(np.array([bounds["signal_variance"], bounds["lengthscale"], bounds["noise_variance"]]))
    return table[:, 0], table[:, 1]


def train_gp(
    X: np.ndarray,
    y: np.ndarray,
    restarts: int = 8,
    seed: int = 0,
    bounds: dict[str, tuple[float, float]] | None = None,
    noise_variance: float | None = None,
    feature_names: Sequence[str] = (),
    max_iter: int = 2000,
) -> GpModel:
    """Fit a GP by multi-start bounded Nelder-Mead on the log marginal likelihood.

    Parameters
    ----------
    X, y
        Raw descriptor matrix ``(n, d)`` and targets ``(n,)``, ``n >= 2``.
    restarts
        Random starting points in addition to the data-driven initial guess.
    seed
        Seed for the starting-point generator; equal seeds give
        bit-identical hyperparameters.
    bounds
        Per-hyperparameter ``(low, high)``; defaults to :data:`DEFAULT_BOUNDS`.
    noise_variance
        Pin the noise variance to this value instead of optimizing it.

    Returns
    -------
    GpModel
        ``model.optimization`` records the initial-guess LML, every start's
        LML and the final LML.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]} values")
    if len(y) < 2:
        raise ValueError("at least two training points are required")
    _check_finite("X", X)
    _check_finite("y", y)
    bounds = dict(DEFAULT_BOUNDS if bounds is None else bounds)
    if noise_variance is not None:
        bounds["noise_variance"] = (noise_variance, noise_variance)
    lo, hi = _log_bounds(bounds)
    free = hi > lo

    standardizer = Standardizer.fit(X)
    Xs = standardizer.transform(X)
    target_mean = float(y.mean())
    yc = y - target_mean

    def full(theta_free: np.ndarray) -> np.ndarray:
        theta = lo.copy()
        theta[free] = theta_free
        return theta

    def objective(theta_free: np.ndarray) -> float:
        try:
            return -log_marginal_likelihood(full(theta_free), Xs, yc)
        except FactorizationFailure:
            return 1e25

    y_var = float(np.var(yc)) if np.var(yc) > 0 else 1.0
    guess = np.log([y_var, math.sqrt(X.shape[1]), 0.1 * y_var])
    guess = np.clip(guess, lo, hi)
    rng = np.random.default_rng(seed)
    starts = [guess[free]] + [rng.uniform(lo[free], hi[free]) for _ in range(restarts)]

    best_theta, best_f = None, math.inf
    start_lmls = []
    for x0 in starts:
        f0 = objective(x0)
        start_lmls.append(-f0)
        res = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            bounds=list(zip(lo[free], hi[free])),
            options={"maxiter": max_iter, "xatol": 1e-8, "fatol": 1e-10},
        )
        theta, f = (res.x, res.fun) if res.fun <= f0 else (x0, f0)
        if f < best_f:
            best_theta, best_f = np.array(theta, dtype=float), float(f)
    if best_theta is None or not math.isfinite(best_f) or best_f >= 1e25:
        raise FactorizationFailure("no starting point produced a factorizable covariance")

    theta = full(best_theta)
    model = GpModel(
        log_signal_variance=float(theta[0]),
        log_lengthscale=float(theta[1]),
        log_noise_variance=float(theta[2]),
        standardizer=standardizer,
        X_train=Xs,
        y_train=y.copy(),
        target_mean=target_mean,
        feature_names=tuple(feature_names),
        optimization={
            "seed": seed,
            "restarts": restarts,
            "initial_lml": start_lmls[0],
            "start_lmls": start_lmls,
            "final_lml": -best_f,
            "bounds": {k: list(v) for k, v in bounds.items()},
        },
    )
    log.info(
        "trained GP on %d points: sf2=%.4g ell=%.4g sn2=%.4g lml=%.4f",
        len(y), model.signal_variance, model.lengthscale, model.noise_variance, -best_f,
    )
    return model


def gp_predict(model: GpModel, x, molecule_id: str | None = None) -> Prediction:
    """Predict one molecule from its descriptor vector (array-like or ``DescriptorVector``)."""
    row = x.as_array() if hasattr(x, "as_array") else np.asarray(x, dtype=float)
    mean, std = model.predict(row.reshape(1, -1))
    return Prediction(mean=float(mean[0]), std=float(std[0]), source="gp", molecule_id=molecule_id)


def leave_one_out(
    X: np.ndarray, y: np.ndarray, model: GpModel
) -> tuple[np.ndarray, np.ndarray]:
    """Leave-one-out means and stds with the model's hyperparameters held fixed."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    means, stds = np.empty(len(y)), np.empty(len(y))
    for k in range(len(y)):
        keep = np.arange(len(y)) != k
        std = Standardizer.fit(X[keep])
        sub = GpModel(
            log_signal_variance=model.log_signal_variance,
            log_lengthscale=model.log_lengthscale,
            log_noise_variance=model.log_noise_variance,
            standardizer=std,
            X_train=std.transform(X[keep]),
            y_train=y[keep],
            target_mean=float(y[keep].mean()),
        )
        m, s = sub.predict(X[k:k + 1])
        means[k], stds[k] = m[0], s[0]
    return means, stds
