"""Joint law of the student confidence and the teacher probability.

The pair ``(eta, xi) = (w*.x, w.x)`` is bivariate normal with covariance
``[[rho, m], [m, q]]``. Pushing it through ``(sigmoid(xi / T), target(eta / T_star))``
gives a law on ``[0, 1]^2``; for the affine and constant targets it has atoms
on the horizontal lines ``f* in {0, 1/2, 1}``, which land in the cells that
contain them.
"""
from __future__ import annotations

import numpy as np
from scipy.special import logit, ndtr

from ..synthetic import GenerativeModel, target_activation
from .asymptotics import conditional_mean_curve
from .state_evolution import Overlaps

_CUT = 12.0


def _teacher_thresholds(model: GenerativeModel, edges: np.ndarray) -> np.ndarray:
    """``u_j`` with ``P(f* < edges[j]) = P(eta / T_star < u_j)``; the last edge is closed."""
    c = edges[1:-1]
    if model.target == "logit":
        inner = logit(c)
    elif model.target == "affine":
        inner = 2.0 * c - 1.0
    else:
        inner = np.where(c <= 0.5, -1.0, 1.0)
    return np.concatenate([[-np.inf], inner, [np.inf]])


def joint_density_grid(ov: Overlaps, model: GenerativeModel, T: float = 1.0, resolution: int = 100,
                       order: int = 64):
    """Probability mass of ``(f_hat, f*)`` on a ``resolution x resolution`` grid.

    Returns
    -------
    mass : ndarray, shape (resolution, resolution)
        ``mass[i, j]`` is the probability that the confidence of class +1
        falls in cell ``i`` and the teacher probability in cell ``j``.
    edges : ndarray
        Common cell edges on ``[0, 1]``.
    """
    edges = np.linspace(0.0, 1.0, resolution + 1)
    sq = np.sqrt(ov.q)
    # student cell edges in standardized units, truncated where the mass is negligible
    t_edges = np.empty(resolution + 1)
    t_edges[0], t_edges[-1] = -_CUT, _CUT
    t_edges[1:-1] = np.clip(T * logit(edges[1:-1]) / sq, -_CUT, _CUT)
    u = _teacher_thresholds(model, edges) * model.T_star
    vstar = ov.vstar(model.rho)
    x, w = np.polynomial.legendre.leggauss(order)
    mass = np.zeros((resolution, resolution))
    for i in range(resolution):
        a, b = t_edges[i], t_edges[i + 1]
        if b <= a:
            continue
        t = 0.5 * (b - a) * x + 0.5 * (a + b)
        wt = 0.5 * (b - a) * w * np.exp(-0.5 * t * t) / np.sqrt(2 * np.pi)
        mu = (ov.m / ov.q) * sq * t
        cdf = ndtr((u[None, :] - mu[:, None]) / np.sqrt(vstar))
        mass[i] = wt @ np.diff(cdf, axis=1)
    return mass, edges


def density_monte_carlo(ov: Overlaps, model: GenerativeModel, T: float = 1.0, resolution: int = 100,
                        n: int = 10**7, seed=None, chunk: int = 10**6):
    """Histogram of ``(f_hat, f*)`` from ``n`` Gaussian draws, normalized to unit mass."""
    rng = np.random.default_rng(seed)
    cov = np.array([[model.rho, ov.m], [ov.m, ov.q]])
    L = np.linalg.cholesky(cov)
    edges = np.linspace(0.0, 1.0, resolution + 1)
    hist = np.zeros((resolution, resolution))
    done = 0
    while done < n:
        k = min(chunk, n - done)
        eta, xi = L @ rng.standard_normal((2, k))
        f_hat = 1.0 / (1.0 + np.exp(-xi / T))
        f_star = target_activation(model, eta / model.T_star)
        i = np.clip(np.searchsorted(edges, f_hat, side="right") - 1, 0, resolution - 1)
        j = np.clip(np.searchsorted(edges, f_star, side="right") - 1, 0, resolution - 1)
        np.add.at(hist, (i, j), 1.0)
        done += k
    return hist / n, edges


def density_curves(ov: Overlaps, model: GenerativeModel, T: float = 1.0, n_points: int = 99, order: int = 100):
    """Confidence grid, conditional-mean curve and the diagonal reference."""
    ell = np.linspace(0.0, 1.0, n_points + 2)[1:-1]
    return ell, conditional_mean_curve(ov, model, T, ell, order), ell.copy()
