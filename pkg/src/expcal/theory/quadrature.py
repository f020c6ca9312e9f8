"""Composite Gauss-Legendre rules for expectations over ``N(0, sigma^2)``.

The integrands of the theory vary on a scale of order one in the field
``xi`` itself (the width of the logistic), while the Gaussian weight has
scale ``sigma``. A single Gauss-Hermite rule in ``xi / sigma`` therefore
under-resolves once ``sigma >> 1``. These rules split ``[-L sigma, L sigma]``
into panels no wider than one standard deviation and no wider than four
units of ``xi``, with extra panel boundaries at caller-supplied kinks.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

HALF_WIDTH = 12.0  # standard deviations covered
_MAX_PANEL_XI = 4.0


@lru_cache(maxsize=32)
def _legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def nodes_per_panel(order: int) -> int:
    """Resolution knob: ``order`` maps to ``order // 10`` nodes per panel (at least 4)."""
    return max(4, int(order) // 10)


def normal_rule(sigma: float, order: int = 100, breaks=(), half: bool = False):
    """Nodes ``xi`` and weights ``w`` with ``sum(w * g(xi)) ~ E[g(X)]``, ``X ~ N(0, sigma^2)``.

    Parameters
    ----------
    sigma : float
        Standard deviation, must be positive.
    order : int
        Resolution; doubling it doubles the number of nodes.
    breaks : sequence of float
        Additional panel boundaries in standardized units (``xi / sigma``).
    half : bool
        If true the rule covers ``[0, L sigma]`` with doubled weights, which is
        exact for even integrands and halves the cost.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    L = HALF_WIDTH
    h = min(1.0, _MAX_PANEL_XI / sigma)
    lo = 0.0 if half else -L
    n_panels = int(np.ceil((L - lo) / h))
    pts = np.linspace(lo, L, n_panels + 1)
    extra = np.asarray(breaks, float)
    pts = np.unique(np.concatenate([pts, extra[(extra > lo) & (extra < L)]]))
    x, w = _legendre(nodes_per_panel(order))
    a, b = pts[:-1, None], pts[1:, None]
    t = (0.5 * (b - a) * x + 0.5 * (a + b)).ravel()
    wt = (0.5 * (b - a) * w).ravel() * np.exp(-0.5 * t * t) / np.sqrt(2.0 * np.pi)
    if half:
        wt = 2.0 * wt
    return sigma * t, wt
