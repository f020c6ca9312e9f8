"""Post-hoc temperature fitting: expectation consistency and temperature scaling.

Both methods rescale the logits ``z -> z / T``. Expectation consistency (EC)
picks the temperature at which the mean validation confidence equals the
validation accuracy; temperature scaling (TS) minimizes the validation
cross-entropy.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import log_softmax, softmax

from .metrics import InvalidInputError, LabeledLogits, accuracy, confidences

logger = logging.getLogger(__name__)

T_MIN = 1e-4
T_MAX = 1e4


class UnsatisfiableTargetError(ValueError):
    """The EC target accuracy lies below the confidence floor ``N / K``."""


@dataclass(frozen=True)
class TemperatureFit:
    temperature: float
    method: str
    residual: float
    iterations: int
    clamped: bool = False

    def to_dict(self) -> dict:
        return {
            "temperature": float(self.temperature),
            "method": self.method,
            "residual": float(self.residual),
            "iterations": int(self.iterations),
            "clamped": bool(self.clamped),
        }


def mean_confidence(data: LabeledLogits, T: float = 1.0) -> float:
    """Average over rows of the maximum softmax probability at temperature ``T``."""
    return float(np.mean(confidences(data, T)))


def _top_n(data: LabeledLogits, N: int):
    # columns of the N largest logits per row; the order does not depend on T
    order = np.argsort(-data.logits, axis=1, kind="stable")[:, :N]
    hit = np.any(order == data.labels[:, None], axis=1)
    return order, float(np.mean(hit))


def _top_n_confidence(data: LabeledLogits, order: np.ndarray, T: float) -> float:
    p = softmax(data.logits / T, axis=1)
    return float(np.mean(np.take_along_axis(p, order, axis=1).sum(axis=1)))


def _check_bracket(T_min, T_max):
    if not (0 < T_min < T_max and np.isfinite(T_max)):
        raise InvalidInputError(f"invalid temperature bracket [{T_min}, {T_max}]")


def _bisect(conf, target: float, floor: float, method: str, tol: float, T_min: float, T_max: float) -> TemperatureFit:
    """Find ``T`` with ``conf(T) = target`` for a decreasing ``conf``; bisection in ``log T``."""
    _check_bracket(T_min, T_max)
    if target < floor:
        raise UnsatisfiableTargetError(
            f"target accuracy {target:.6g} is below the confidence floor {floor:.6g}; "
            "no temperature satisfies expectation consistency"
        )
    c_lo = conf(T_min)
    if target >= c_lo:
        warnings.warn(f"{method}: target {target:.6g} only reachable as T -> 0; clamped at T_min={T_min:g}",
                      RuntimeWarning, stacklevel=3)
        return TemperatureFit(T_min, method, c_lo - target, 0, clamped=True)
    c_hi = conf(T_max)
    if target <= c_hi:
        warnings.warn(f"{method}: target {target:.6g} only reachable as T -> inf; clamped at T_max={T_max:g}",
                      RuntimeWarning, stacklevel=3)
        return TemperatureFit(T_max, method, c_hi - target, 0, clamped=True)
    lo, hi = np.log(T_min), np.log(T_max)
    it = 0
    while True:
        it += 1
        mid = 0.5 * (lo + hi)
        gap = conf(np.exp(mid)) - target
        if abs(gap) <= tol or (np.exp(hi) - np.exp(lo)) <= 1e-12 * np.exp(mid):
            return TemperatureFit(float(np.exp(mid)), method, float(gap), it)
        if gap > 0:
            lo = mid
        else:
            hi = mid


def fit_ec(data: LabeledLogits, tol: float = 1e-10, T_min: float = T_MIN, T_max: float = T_MAX) -> TemperatureFit:
    """Expectation-consistent temperature.

    Solves ``mean_confidence(data, T) = accuracy(data)`` by bisection. The
    mean confidence is strictly decreasing in ``T`` from 1 to ``1/K``, so the
    root is unique whenever the accuracy lies in ``(1/K, 1)``.

    Raises
    ------
    UnsatisfiableTargetError
        If the accuracy is below ``1/K``.
    """
    return _bisect(lambda T: mean_confidence(data, T), accuracy(data), 1.0 / data.K, "EC", tol, T_min, T_max)


def fit_ec_topn(data: LabeledLogits, N: int, tol: float = 1e-10, T_min: float = T_MIN,
                T_max: float = T_MAX) -> TemperatureFit:
    """EC variant matching the mean top-``N`` probability mass to the top-``N`` accuracy."""
    if not 1 <= N < data.K:
        raise InvalidInputError(f"N must satisfy 1 <= N < K={data.K}, got {N}")
    order, acc = _top_n(data, N)
    method = "EC" if N == 1 else "EC-topN"
    return _bisect(lambda T: _top_n_confidence(data, order, T), acc, N / data.K, method, tol, T_min, T_max)


def _nll_log_t(data: LabeledLogits):
    idx = np.arange(data.n)

    def f(s):
        logp = log_softmax(data.logits / np.exp(s), axis=1)
        return -float(np.sum(logp[idx, data.labels]))

    return f


def nll_grad_log_t(data: LabeledLogits, T: float) -> float:
    """Derivative of the summed NLL with respect to ``log T``."""
    p = softmax(data.logits / T, axis=1)
    z_y = data.logits[np.arange(data.n), data.labels]
    return float(np.sum(z_y - np.sum(p * data.logits, axis=1)) / T)


def fit_ts(data: LabeledLogits, T_min: float = T_MIN, T_max: float = T_MAX, n_grid: int = 64,
           xatol: float = 1e-10) -> TemperatureFit:
    """Temperature minimizing the validation cross-entropy.

    A coarse grid over ``log T`` picks the bracket, bounded Brent refines it.
    ``residual`` is the NLL gradient in ``log T`` at the returned point.
    """
    _check_bracket(T_min, T_max)
    f = _nll_log_t(data)
    lo, hi = np.log(T_min), np.log(T_max)
    grid = np.linspace(lo, hi, n_grid)
    vals = np.array([f(s) for s in grid])
    i = int(np.argmin(vals))
    res = minimize_scalar(f, bounds=(grid[max(i - 1, 0)], grid[min(i + 1, n_grid - 1)]),
                          method="bounded", options={"xatol": xatol})
    s, clamped = res.x, False
    if i in (0, n_grid - 1) and (vals[i] <= res.fun or abs(res.x - grid[i]) < 1e-6):
        s, clamped = grid[i], True
        warnings.warn(f"TS minimizer at the bracket edge; clamped at T={np.exp(s):g}", RuntimeWarning, stacklevel=2)
    T = float(np.exp(s))
    return TemperatureFit(T, "TS", nll_grad_log_t(data, T), res.nfev + n_grid, clamped)


def apply_temperature(data: LabeledLogits, fit) -> LabeledLogits:
    """Return the logits divided by the fitted temperature (labels unchanged).

    ``fit`` may be a :class:`TemperatureFit` or a bare temperature.
    """
    T = fit.temperature if isinstance(fit, TemperatureFit) else float(fit)
    if not T > 0:
        raise InvalidInputError("temperature must be positive")
    return LabeledLogits(data.logits / T, data.labels)
