"""Scalar channel functions for the teacher-student logistic model.

Teacher side: the Gaussian-smoothed target activation ``Z*`` and its
derivative in the mean. Student side: the proximal operator of the logistic
loss and the derived output-channel function ``f_out``.
All functions broadcast over numpy arrays.
"""
import warnings
from functools import lru_cache

import numpy as np
from scipy.special import expit, ndtr

from ..synthetic import GenerativeModel, target_activation

_SQRT_2PI = np.sqrt(2.0 * np.pi)


def _phi(x):
    return np.exp(-0.5 * x * x) / _SQRT_2PI


def gauss_hermite(order: int):
    """Nodes and weights for E[g(X)], X ~ N(0, 1)."""
    if order < 20:
        warnings.warn(f"quadrature order {order} < 20 is unreliable", RuntimeWarning, stacklevel=2)
    return _hermite_rule(order)


@lru_cache(maxsize=16)
def _hermite_rule(order: int):
    x, w = np.polynomial.hermite_e.hermegauss(order)
    x.flags.writeable = False
    w = w / _SQRT_2PI
    w.flags.writeable = False
    return x, w


def z_star(model: GenerativeModel, y, omega, V, order: int = 100):
    r"""Teacher partition function.

    .. math::

        \mathcal{Z}_*(y, \omega, V) = \mathbb{E}_{\xi \sim N(\omega, V)}
        [\sigma_*(y \xi / T_*)]

    Closed form for the ``affine`` and ``constant`` targets, Gauss-Hermite
    quadrature for ``logit``.
    """
    y, omega, V = np.broadcast_arrays(np.asarray(y, float), np.asarray(omega, float), np.asarray(V, float))
    if np.any(V <= 0):
        raise ValueError("variance V must be positive")
    mu = y * omega / model.T_star
    s = np.sqrt(V) / model.T_star
    if model.target == "logit":
        x, w = gauss_hermite(order)
        return expit(mu[..., None] + s[..., None] * x) @ w
    lo = (-1.0 - mu) / s
    hi = (1.0 - mu) / s
    p_mid = ndtr(hi) - ndtr(lo)
    p_top = ndtr(-hi)
    if model.target == "constant":
        return p_top + 0.5 * p_mid
    # affine: E[(u + 1)/2 ; -1 <= u <= 1] with u ~ N(mu, s^2)
    return p_top + 0.5 * ((mu + 1.0) * p_mid + s * (_phi(lo) - _phi(hi)))


def d_omega_z_star(model: GenerativeModel, y, omega, V, order: int = 100):
    """Derivative of :func:`z_star` with respect to ``omega``."""
    y, omega, V = np.broadcast_arrays(np.asarray(y, float), np.asarray(omega, float), np.asarray(V, float))
    if np.any(V <= 0):
        raise ValueError("variance V must be positive")
    mu = y * omega / model.T_star
    s = np.sqrt(V) / model.T_star
    dmu = y / model.T_star
    if model.target == "logit":
        x, w = gauss_hermite(order)
        p = expit(mu[..., None] + s[..., None] * x)
        return dmu * ((p * (1.0 - p)) @ w)
    lo = (-1.0 - mu) / s
    hi = (1.0 - mu) / s
    if model.target == "constant":
        # two jumps of height 1/2 at u = -1 and u = +1
        return dmu * 0.5 * (_phi(lo) + _phi(hi)) / s
    return dmu * 0.5 * (ndtr(hi) - ndtr(lo))


def z_star_mc(model: GenerativeModel, y: float, omega: float, V: float, n: int = 10**7, seed: int = 0) -> float:
    """Monte Carlo estimate of :func:`z_star`, used as an independent check."""
    rng = np.random.default_rng(seed)
    total = 0.0
    chunk = 10**6
    done = 0
    while done < n:
        k = min(chunk, n - done)
        xi = omega + np.sqrt(V) * rng.standard_normal(k)
        total += target_activation(model, y * xi / model.T_star).sum()
        done += k
    return total / n


class ProxError(RuntimeError):
    pass


def prox_logistic(y, omega, v, tol: float = 1e-12, max_iter: int = 100):
    r"""Proximal operator of the logistic loss.

    Solves ``argmin_z (z - omega)^2 / (2 v) + log(1 + exp(-y z))`` with a
    Newton iteration safeguarded by the bracket ``[omega, omega + y v]``.
    """
    y, omega, v = np.broadcast_arrays(np.asarray(y, float), np.asarray(omega, float), np.asarray(v, float))
    if np.any(v <= 0):
        raise ValueError("v must be positive")
    # stationarity g(z) = (z - omega)/v - y * sigmoid(-y z), increasing in z
    a = np.minimum(omega, omega + y * v)
    b = np.maximum(omega, omega + y * v)
    z = omega + y * v * expit(-y * omega)
    z = np.clip(z, a, b)
    dx_prev = b - a
    for _ in range(max_iter):
        s = expit(-y * z)
        g = (z - omega) / v - y * s
        # done once stationary or once the bracket is exhausted to machine precision
        done = (np.abs(g) <= tol) | ((b - a) <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(z)))
        if np.all(done):
            return z
        a = np.where(g < 0, z, a)
        b = np.where(g > 0, z, b)
        h = 1.0 / v + s * (1.0 - s)
        step = g / h
        z_new = z - step
        # bisect when Newton leaves the bracket or stalls (rtsafe rule)
        slow = (z_new <= a) | (z_new >= b) | (np.abs(step) > 0.5 * np.abs(dx_prev))
        z_next = np.where(slow, 0.5 * (a + b), z_new)
        dx_prev = np.where(slow, 0.5 * (b - a), step)
        z = z_next
    raise ProxError(f"prox_logistic did not converge (max |g| = {np.max(np.abs(g)):.3e})")


def f_out(y, omega, v):
    """Output-channel function ``(prox - omega) / v``."""
    return (prox_logistic(y, omega, v) - omega) / v


def f_out_and_derivative(y, omega, v):
    """Return ``f_out`` and its derivative in ``omega``.

    The derivative follows from the implicit-function theorem,
    ``d prox / d omega = 1 / (1 + v l''(prox))``.
    """
    z = prox_logistic(y, omega, v)
    p = expit(z)
    curv = p * (1.0 - p)
    return (z - omega) / v, -curv / (1.0 + v * curv)
