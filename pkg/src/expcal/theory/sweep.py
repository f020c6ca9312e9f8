"""Regularization selection, per-point reports and parameter sweeps."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from ..synthetic import GenerativeModel
from .asymptotics import (
    asymptotic_brier,
    asymptotic_calibration,
    asymptotic_ece,
    asymptotic_error,
    asymptotic_loss,
    asymptotic_mean_confidence,
    fit_ec_asymptotic,
    fit_ts_asymptotic,
)
from .state_evolution import Overlaps, SEParams, se_fixed_point

logger = logging.getLogger(__name__)

LAMBDA_MIN, LAMBDA_MAX = 1e-6, 1e3


@dataclass(frozen=True)
class LambdaFit:
    lam: float
    objective: str
    value: float
    overlaps: Overlaps
    clamped: bool = False


def _objective(kind: str, model: GenerativeModel, order: int):
    if kind == "error":
        return lambda ov: asymptotic_error(ov, model, order)
    if kind == "loss":
        return lambda ov: asymptotic_loss(ov, model, 1.0, order)
    raise ValueError(f"objective must be 'error' or 'loss', got {kind!r}")


def optimize_lambda(alpha: float, model: GenerativeModel, objective: str = "error", order: int = 100,
                    n_grid: int = 16, xatol: float = 1e-4, **se_kw) -> LambdaFit:
    """Regularization minimizing the asymptotic test error or test loss.

    Coarse grid over ``log lambda`` in ``[1e-6, 1e3]`` followed by bounded
    Brent on the best cell. Each evaluation solves the fixed point, warm
    started from the nearest previously solved one.
    """
    obj = _objective(objective, model, order)
    cache: dict[float, Overlaps] = {}

    def solve(s: float) -> Overlaps:
        if s in cache:
            return cache[s]
        init = cache[min(cache, key=lambda k: abs(k - s))] if cache else None
        ov = se_fixed_point(SEParams(alpha, float(np.exp(s)), model, order=order, **se_kw), init)
        if not ov.converged:
            ov = se_fixed_point(SEParams(alpha, float(np.exp(s)), model, order=order, **se_kw))
        cache[s] = ov
        return ov

    lo, hi = np.log(LAMBDA_MIN), np.log(LAMBDA_MAX)
    # solve from the strongly regularized end, where the fixed point is trivial
    grid = np.linspace(lo, hi, n_grid)
    vals = {s: obj(solve(s)) for s in grid[::-1]}
    vals = np.array([vals[s] for s in grid])
    i = int(np.argmin(vals))
    res = minimize_scalar(lambda s: obj(solve(s)), bounds=(grid[max(i - 1, 0)], grid[min(i + 1, n_grid - 1)]),
                          method="bounded", options={"xatol": xatol})
    s, clamped = res.x, False
    if i in (0, n_grid - 1) and vals[i] <= res.fun:
        s, clamped = grid[i], True
        logger.warning("optimal lambda at the search boundary (%g)", np.exp(s))
    ov = solve(s)
    return LambdaFit(float(np.exp(s)), objective, float(obj(ov)), ov, clamped)


@dataclass
class AsymptoticReport:
    temperature: float
    error: float
    loss: float
    ece: float
    brier: float
    mean_confidence: float
    ell: list = field(default_factory=list)
    calibration: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "temperature": self.temperature,
            "error": self.error,
            "loss": self.loss,
            "ece": self.ece,
            "brier": self.brier,
            "mean_confidence": self.mean_confidence,
            "ell": list(self.ell),
            "calibration": list(self.calibration),
        }


def asymptotic_report(ov: Overlaps, model: GenerativeModel, T: float = 1.0, order: int = 100,
                      ell=None, ece_domain: str = "full") -> AsymptoticReport:
    ell = np.linspace(0.5, 0.99, 50) if ell is None else np.asarray(ell, float)
    return AsymptoticReport(
        temperature=float(T),
        error=asymptotic_error(ov, model, order),
        loss=asymptotic_loss(ov, model, T, order),
        ece=asymptotic_ece(ov, model, T, order, ece_domain),
        brier=asymptotic_brier(ov, model, T, order),
        mean_confidence=asymptotic_mean_confidence(ov, T, order),
        ell=[float(v) for v in ell],
        calibration=[float(v) for v in asymptotic_calibration(ov, model, T, ell, order)],
    )


SWEEP_COLUMNS = ("alpha", "lambda", "target", "m", "q", "v", "T_TS", "T_EC",
                 "ECE_raw", "ECE_TS", "ECE_EC", "BS_raw", "BS_TS", "BS_EC", "E_g", "converged")


def sweep_point(alpha: float, lam, target: str, order: int = 100, T_star: float = 1.0, **se_kw) -> dict:
    """All asymptotic quantities at one grid point.

    ``lam`` is a number or one of ``"error"``/``"loss"`` (optimized value).
    ECE columns use the full-line integral.
    """
    model = GenerativeModel(target, T_star=T_star)
    if isinstance(lam, str):
        fit = optimize_lambda(alpha, model, lam, order, **se_kw)
        lam_value, ov = fit.lam, fit.overlaps
    else:
        lam_value = float(lam)
        ov = se_fixed_point(SEParams(alpha, lam_value, model, order=order, **se_kw))
    ts = fit_ts_asymptotic(ov, model, order)
    ec = fit_ec_asymptotic(ov, model, order)
    temps = {"raw": 1.0, "TS": ts.temperature, "EC": ec.temperature}
    row = {"alpha": float(alpha), "lambda": lam_value, "target": target,
           "m": ov.m, "q": ov.q, "v": ov.v, "T_TS": ts.temperature, "T_EC": ec.temperature}
    for k, T in temps.items():
        row[f"ECE_{k}"] = asymptotic_ece(ov, model, T, order)
    for k, T in temps.items():
        row[f"BS_{k}"] = asymptotic_brier(ov, model, T, order)
    row["E_g"] = asymptotic_error(ov, model, order)
    row["converged"] = bool(ov.converged)
    return row


def _point(args):
    alpha, lam, target, kw = args
    return sweep_point(alpha, lam, target, **kw)


def sweep(alphas, lams, targets, jobs: int = 1, **kw) -> list[dict]:
    """Evaluate :func:`sweep_point` on the product grid, rows in grid order."""
    tasks = [(float(a), lam, t, kw) for t in targets for lam in lams for a in alphas]
    if jobs == 1:
        return [_point(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(_point, tasks))


def relative_temperature_gap(row: dict) -> float:
    return abs(row["T_EC"] - row["T_TS"]) / row["T_TS"]
