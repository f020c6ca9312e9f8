"""Synthetic teacher model, regularized logistic regression and empirical overlaps.

Data follow ``x ~ N(0, I_d / d)``, ``w* ~ N(0, rho I_d)`` and
``P(y = +1 | x) = target(w*.x / T_star)`` with labels in ``{-1, +1}``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.optimize import linprog
from scipy.special import expit, log_expit

from .metrics import LabeledLogits

TARGETS = ("logit", "affine", "constant")


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class GenerativeModel:
    """Teacher description: activation name, temperature ``T_star`` and second moment ``rho``."""

    target: str = "logit"
    T_star: float = 1.0
    rho: float = 1.0

    def __post_init__(self):
        if self.target not in TARGETS:
            raise ValueError(f"unknown target {self.target!r}; expected one of {TARGETS}")
        if not self.T_star > 0:
            raise ValueError("T_star must be positive")
        if not self.rho > 0:
            raise ValueError("rho must be positive")


def target_activation(model: GenerativeModel, z):
    """Teacher activation evaluated at ``z`` (the temperature is not applied here)."""
    z = np.asarray(z, dtype=float)
    if model.target == "logit":
        return expit(z)
    inner = (z + 1.0) / 2.0 if model.target == "affine" else np.full_like(z, 0.5)
    return np.where(z < -1.0, 0.0, np.where(z > 1.0, 1.0, inner))


@dataclass
class SyntheticDataset:
    X: np.ndarray
    y: np.ndarray
    w_star: np.ndarray
    seed: int | None = None

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def to_logits(self, w: np.ndarray) -> LabeledLogits:
        """Two-class logits ``(0, w.x)`` with ``y = -1 -> 0`` and ``y = +1 -> 1``.

        The softmax of these columns puts ``sigmoid(w.x)`` on class 1.
        """
        scores = self.X @ np.asarray(w, dtype=float)
        logits = np.column_stack([np.zeros_like(scores), scores])
        return LabeledLogits(logits, ((self.y + 1) // 2).astype(np.int64))


def sample_dataset(model: GenerativeModel, n: int, d: int, seed=None, w_star=None) -> SyntheticDataset:
    """Draw ``n`` samples in dimension ``d``.

    If ``w_star`` is given it is used as is and only ``X`` and ``y`` are drawn.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be >= 1")
    rng = np.random.default_rng(seed)
    if w_star is None:
        w_star = np.sqrt(model.rho) * rng.standard_normal(d)
    else:
        w_star = np.asarray(w_star, dtype=float)
        if w_star.shape != (d,):
            raise ValueError("w_star must have shape (d,)")
    X = rng.standard_normal((n, d)) / np.sqrt(d)
    p = target_activation(model, X @ w_star / model.T_star)
    y = np.where(rng.random(n) < p, 1.0, -1.0)
    return SyntheticDataset(X=X, y=y, w_star=w_star, seed=seed)


def sample_labels(model: GenerativeModel, preact, seed=None) -> np.ndarray:
    """Labels in ``{-1, +1}`` for given teacher pre-activations ``w*.x``."""
    rng = np.random.default_rng(seed)
    p = target_activation(model, np.asarray(preact, float) / model.T_star)
    return np.where(rng.random(np.shape(p)) < p, 1.0, -1.0)


@dataclass(frozen=True)
class ErmSolution:
    w_hat: np.ndarray
    lam: float
    grad_norm: float
    iterations: int
    m_emp: float
    q_emp: float


def risk(w, X, y, lam) -> float:
    """``sum_i log(1 + exp(-y_i w.x_i)) + lam/2 |w|^2``."""
    return float(-np.sum(log_expit(y * (X @ w))) + 0.5 * lam * (w @ w))


def risk_gradient(w, X, y, lam) -> np.ndarray:
    return -X.T @ (y * expit(-y * (X @ w))) + lam * w


def is_separable(X, y) -> bool:
    """Whether some ``w`` achieves ``y_i w.x_i >= 1`` for all ``i`` (LP feasibility)."""
    n, d = X.shape
    res = linprog(np.zeros(d), A_ub=-(y[:, None] * X), b_ub=-np.ones(n),
                  bounds=[(None, None)] * d, method="highs")
    return res.status == 0


def empirical_overlaps(w_star, w_hat, method: str = "dot"):
    """``(m, q) = (w*.w / d, |w|^2 / d)``.

    ``method="gram"`` computes them from the 2x2 Gram matrix of the stacked vectors.
    """
    w_star = np.asarray(w_star, float)
    w_hat = np.asarray(w_hat, float)
    d = w_hat.shape[0]
    if method == "dot":
        return float(w_star @ w_hat) / d, float(w_hat @ w_hat) / d
    if method == "gram":
        W = np.stack([w_star, w_hat])
        G = W @ W.T / d
        return float(G[0, 1]), float(G[1, 1])
    raise ValueError(f"unknown method {method!r}")


def erm_train(data: SyntheticDataset, lam: float, tol: float | None = None, max_iter: int = 200) -> ErmSolution:
    """Minimize the ridge-penalized logistic risk with a damped Newton method.

    Stops when the Euclidean norm of the gradient is below ``tol``
    (default ``1e-8 * n``). ``lam = 0`` is only accepted on non-separable data.
    """
    X, y = data.X, data.y
    n, d = X.shape
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    if lam == 0 and is_separable(X, y):
        raise SolverError("data are linearly separable; the unregularized risk has no minimizer")
    tol = 1e-8 * n if tol is None else tol
    w = np.zeros(d)
    f = risk(w, X, y, lam)
    g = risk_gradient(w, X, y, lam)
    gnorm = np.linalg.norm(g)
    for it in range(1, max_iter + 1):
        if gnorm <= tol:
            return _solution(data, w, lam, gnorm, it - 1)
        p = expit(X @ w)
        H = (X.T * (p * (1 - p))) @ X + lam * np.eye(d)
        try:
            step = cho_solve(cho_factor(H), g)
        except LinAlgError:
            step = np.linalg.lstsq(H, g, rcond=None)[0]
        t = 1.0
        slope = g @ step
        while True:
            w_new = w - t * step
            f_new = risk(w_new, X, y, lam)
            if f_new <= f - 1e-4 * t * slope or t < 1e-12:
                break
            t *= 0.5
        w, f = w_new, f_new
        g = risk_gradient(w, X, y, lam)
        gnorm = np.linalg.norm(g)
    if gnorm <= tol:
        return _solution(data, w, lam, gnorm, max_iter)
    raise SolverError(f"Newton did not reach |grad| <= {tol:.2e} in {max_iter} iterations "
                      f"(|grad| = {gnorm:.2e}, risk = {f:.6g})")


def _solution(data, w, lam, gnorm, iterations) -> ErmSolution:
    m, q = empirical_overlaps(data.w_star, w)
    return ErmSolution(w_hat=w, lam=lam, grad_norm=float(gnorm), iterations=iterations, m_emp=m, q_emp=q)


def corrupt_labels(data, classes, seed=None):
    """Replace the labels of samples whose label is in ``classes`` by uniform random labels.

    Works on :class:`~expcal.metrics.LabeledLogits` (classes are column indices)
    and on :class:`SyntheticDataset` (classes 0 and 1 stand for ``y = -1`` and
    ``y = +1``). Returns a new object of the same type.
    """
    classes = np.unique(np.asarray(list(classes), dtype=np.int64))
    if classes.size == 0:
        raise ValueError("classes must be non-empty")
    rng = np.random.default_rng(seed)
    if isinstance(data, LabeledLogits):
        K, labels = data.K, data.labels
    elif isinstance(data, SyntheticDataset):
        K, labels = 2, ((data.y + 1) // 2).astype(np.int64)
    else:
        raise TypeError(f"cannot corrupt labels of {type(data).__name__}")
    if np.any((classes < 0) | (classes >= K)):
        raise ValueError(f"class indices must lie in [0, {K})")
    hit = np.isin(labels, classes)
    new = labels.copy()
    new[hit] = rng.integers(0, K, size=int(hit.sum()))
    if isinstance(data, LabeledLogits):
        return LabeledLogits(data.logits.copy(), new)
    return SyntheticDataset(X=data.X, y=2.0 * new - 1.0, w_star=data.w_star, seed=data.seed)
