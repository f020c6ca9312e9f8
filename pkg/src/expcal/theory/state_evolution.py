"""Fixed-point equations for the overlaps of ridge-penalized logistic regression.

In the proportional limit ``n, d -> inf`` with ``n / d = alpha`` the
teacher-student overlaps ``m = w*.w / d`` and ``q = |w|^2 / d`` concentrate on
the solution of a six-dimensional system (three overlaps and their conjugates).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import root

from ..synthetic import GenerativeModel
from .channels import ProxError, d_omega_z_star, f_out_and_derivative, z_star
from .quadrature import normal_rule

logger = logging.getLogger(__name__)

VSTAR_FLOOR = 1e-12
_LABELS = np.array([1.0, -1.0])


@dataclass(frozen=True)
class SEParams:
    alpha: float
    lam: float
    model: GenerativeModel = GenerativeModel()
    order: int = 100
    damping: float = 0.5
    max_iter: int = 10_000
    tol: float = 1e-9

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if not 0.0 <= self.damping < 1.0:
            raise ValueError("damping must lie in [0, 1)")


@dataclass(frozen=True)
class Overlaps:
    m: float
    q: float
    v: float
    m_hat: float = float("nan")
    q_hat: float = float("nan")
    v_hat: float = float("nan")
    converged: bool = False
    residual: float = float("inf")
    iterations: int = 0
    vstar_clamped: bool = False

    def vstar(self, rho: float = 1.0) -> float:
        """Teacher variance conditioned on the student pre-activation."""
        return max(rho - self.m**2 / self.q, VSTAR_FLOOR)

    def as_tuple(self):
        return (self.m, self.q, self.v)


DEFAULT_INIT = Overlaps(m=0.1, q=0.5, v=1.0)


def hat_overlaps(m: float, q: float, v: float, params: SEParams):
    """Conjugate overlaps ``(m_hat, q_hat, v_hat)`` and a v* clamp flag."""
    model = params.model
    vstar = model.rho - m * m / q
    clamped = vstar <= VSTAR_FLOOR
    if clamped:
        vstar = VSTAR_FLOOR
    omega, w = normal_rule(np.sqrt(q), params.order)  # student pre-activation ~ N(0, q)
    y = _LABELS[:, None]
    teacher_mean = (m / q) * omega
    Z = z_star(model, y, teacher_mean, vstar, params.order)
    dZ = d_omega_z_star(model, y, teacher_mean, vstar, params.order)
    g, dg = f_out_and_derivative(y, omega, v)
    a = params.alpha
    m_hat = a * np.sum((dZ * g) @ w)
    q_hat = a * np.sum((Z * g * g) @ w)
    v_hat = -a * np.sum((Z * dg) @ w)
    return m_hat, q_hat, v_hat, clamped


def se_update(current: Overlaps, params: SEParams) -> Overlaps:
    """One damped sweep: conjugates from the overlaps, then overlaps from the conjugates."""
    if not (current.q > 0 and current.v > 0):
        raise ValueError("need q > 0 and v > 0")
    m_hat, q_hat, v_hat, clamped = hat_overlaps(current.m, current.q, current.v, params)
    denom = params.lam + v_hat
    m = m_hat / denom
    q = (q_hat + m_hat**2) / denom**2
    v = 1.0 / denom
    g = params.damping
    return Overlaps(
        m=(1 - g) * m + g * current.m,
        q=(1 - g) * q + g * current.q,
        v=(1 - g) * v + g * current.v,
        m_hat=m_hat,
        q_hat=q_hat,
        v_hat=v_hat,
        iterations=current.iterations + 1,
        vstar_clamped=clamped,
    )


def _rel_change(new: Overlaps, old: Overlaps) -> float:
    a = np.array(new.as_tuple())
    b = np.array(old.as_tuple())
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-12)))


def _undamped_map(params: SEParams):
    """Fixed-point residual in ``(m, log q, log v)`` for the root finder."""
    undamped = replace(params, damping=0.0)

    def F(x):
        cur = Overlaps(m=x[0], q=np.exp(x[1]), v=np.exp(x[2]))
        new = se_update(cur, undamped)
        if not (new.q > 0 and new.v > 0):
            return np.full(3, 1e3)
        return np.array([new.m - x[0], np.log(new.q) - x[1], np.log(new.v) - x[2]])

    return F


def _polish(cur: Overlaps, params: SEParams) -> Overlaps | None:
    """Newton-type solve of the fixed point from ``cur``; None on failure."""
    F = _undamped_map(params)
    try:
        sol = root(F, [cur.m, np.log(cur.q), np.log(cur.v)], method="hybr", options={"xtol": 1e-13})
    except (ValueError, FloatingPointError, ProxError):
        return None
    if not (sol.success and np.all(np.isfinite(sol.x))):
        return None
    cand = Overlaps(m=sol.x[0], q=np.exp(sol.x[1]), v=np.exp(sol.x[2]), iterations=cur.iterations)
    new = se_update(cand, replace(params, damping=0.0))
    if _rel_change(new, cand) > params.tol:
        return None
    return replace(new, iterations=cur.iterations + sol.nfev)


def se_fixed_point(params: SEParams, init: Overlaps | None = None, polish_after: int = 100) -> Overlaps:
    """Iterate :func:`se_update` until the largest relative change is below ``tol``.

    Slowly contracting regimes (near the separability transition at small
    ``lam``) are handed to a hybrid Powell root solve after ``polish_after``
    damped sweeps; its result is accepted only if one further undamped sweep
    moves it by less than ``tol``. On non-convergence the last iterate is
    returned with ``converged=False``.
    """
    cur = replace(init or DEFAULT_INIT, iterations=0)
    res = np.inf
    polished = False
    for it in range(params.max_iter):
        new = se_update(cur, params)
        res = _rel_change(new, cur)
        cur = new
        if res <= params.tol:
            return replace(cur, converged=True, residual=res)
        if not polished and it + 1 >= polish_after:
            polished = True
            fp = _polish(cur, params)
            if fp is not None:
                return replace(fp, converged=True, residual=_rel_change(se_update(fp, params), fp))
    logger.warning("state evolution did not converge: alpha=%g lam=%g residual=%.2e",
                   params.alpha, params.lam, res)
    return replace(cur, converged=False, residual=res)
