"""Finite-size repetitions: train on synthetic data, calibrate on a fresh validation split."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .calibrate import fit_ec, fit_ts
from .metrics import accuracy, binned_ece
from .synthetic import GenerativeModel, erm_train, sample_dataset

logger = logging.getLogger(__name__)

REP_COLUMNS = ("rep", "seed", "status", "m_emp", "q_emp", "grad_norm", "val_accuracy",
               "T_TS", "T_EC", "TS_clamped", "EC_clamped", "delta_T", "ECE_raw", "ECE_TS", "ECE_EC")
AGG_COLUMNS = ("alpha", "d", "lambda", "target", "reps", "n_ok", "m_mean", "m_se", "q_mean", "q_se",
               "T_TS_mean", "T_EC_mean", "delta_T_mean", "delta_T_se", "m_theory", "q_theory")


def run_repetition(model: GenerativeModel, alpha: float, d: int, lam: float, seed: int,
                   n_val: int | None = None, n_bins: int = 15) -> dict:
    """One train/validate cycle; generators are derived from ``seed`` alone."""
    n = max(1, int(round(alpha * d)))
    n_val = n if n_val is None else n_val
    train_seq, val_seq = np.random.SeedSequence(seed).spawn(2)
    train = sample_dataset(model, n, d, seed=train_seq)
    val = sample_dataset(model, n_val, d, seed=val_seq, w_star=train.w_star)
    sol = erm_train(train, lam)
    logits = val.to_logits(sol.w_hat)
    ts = fit_ts(logits)
    ec = fit_ec(logits)
    return {
        "seed": seed, "status": "ok", "m_emp": sol.m_emp, "q_emp": sol.q_emp, "grad_norm": sol.grad_norm,
        "val_accuracy": accuracy(logits), "T_TS": ts.temperature, "T_EC": ec.temperature,
        "TS_clamped": ts.clamped, "EC_clamped": ec.clamped,
        "delta_T": abs(ec.temperature - ts.temperature) / ts.temperature,
        "ECE_raw": binned_ece(logits, 1.0, n_bins)[0],
        "ECE_TS": binned_ece(logits, ts.temperature, n_bins)[0],
        "ECE_EC": binned_ece(logits, ec.temperature, n_bins)[0],
    }


def _safe(args):
    rep, model, alpha, d, lam, seed, n_val = args
    try:
        row = run_repetition(model, alpha, d, lam, seed, n_val)
    except Exception as exc:  # reported per repetition, the run continues
        logger.error("repetition %d failed: %s", rep, exc)
        row = {"seed": seed, "status": f"error: {exc}"}
    return {"rep": rep, **row}


def simulate(model: GenerativeModel, alpha: float, d: int, lam: float, reps: int, seed: int = 0,
             n_val: int | None = None, jobs: int = 1) -> list[dict]:
    """Run ``reps`` repetitions with seeds ``seed + r``; rows come back in repetition order."""
    tasks = [(r, model, alpha, d, lam, seed + r, n_val) for r in range(reps)]
    if jobs == 1:
        return [_safe(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(_safe, tasks))


def aggregate(rows: list[dict], model: GenerativeModel, alpha: float, d: int, lam: float,
              theory: tuple[float, float] | None = None) -> dict:
    ok = [r for r in rows if r.get("status") == "ok"]
    out = {"alpha": alpha, "d": d, "lambda": lam, "target": model.target, "reps": len(rows), "n_ok": len(ok)}

    def mean_se(key):
        x = np.array([r[key] for r in ok], float)
        if x.size == 0:
            return None, None
        se = x.std(ddof=1) / np.sqrt(x.size) if x.size > 1 else None
        return float(x.mean()), se

    out["m_mean"], out["m_se"] = mean_se("m_emp")
    out["q_mean"], out["q_se"] = mean_se("q_emp")
    out["T_TS_mean"], _ = mean_se("T_TS")
    out["T_EC_mean"], _ = mean_se("T_EC")
    out["delta_T_mean"], out["delta_T_se"] = mean_se("delta_T")
    out["m_theory"], out["q_theory"] = theory if theory else (None, None)
    return out
