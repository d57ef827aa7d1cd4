"""
Analytic parameter derivatives of the log density.

Coordinates are ``(theta, sigma, eta)`` with ``eta = -eps``.  This is the
orientation in which the skewness score is the derivative of the objective
``rho = -log f`` while the location and scale scores are derivatives of
``log f``; it is the convention under which the reference ESEP information
matrix (positive theta/eps entry) and the skewness score limits hold.
Variances and determinants do not depend on the orientation; the sign of any
theta/eps or sigma/eps covariance does.

All families are written through ``t = (|z| / (sqrt(2)*k))**alpha`` with
``k = 1 - sign(z)*eps``:

* ESEP:  ``log f = C - log(sigma) - t``
* ESGT:  ``log f = C - log(sigma) - (q + 1/alpha) * log(1 + t/q)``

and ESt is ESGT at ``alpha=2, q=nu/2``.
"""

from __future__ import annotations

import math

import numpy as np

from .distributions import Distribution, alpha_q

SQRT2 = math.sqrt(2.0)


def _parts(d: Distribution, x):
    a, q = alpha_q(d)
    z = (np.asarray(x, dtype=float) - d.theta) / d.sigma
    s = np.where(z >= 0.0, 1.0, -1.0)
    k = 1.0 - s * d.eps
    u = np.abs(z) / (SQRT2 * k)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = u ** a
        t_r = u ** (a - 1.0) / (SQRT2 * k * d.sigma)          # t / |x - theta|
        t_rr = u ** (a - 2.0) / (2.0 * k * k * d.sigma ** 2)  # t / |x - theta|**2
    return a, q, s, k, t, t_r, t_rr


def _outer_factors(a, q, t):
    """First and second derivatives of log f with respect to t."""
    if math.isinf(q):
        return -np.ones_like(t), np.zeros_like(t)
    b = (a * q + 1.0) / a
    return -b / (q + t), b / (q + t) ** 2


def gradient(d: Distribution, x) -> np.ndarray:
    """``d log f / d(theta, sigma, eta)``; shape ``(3,) + x.shape``."""
    a, q, s, k, t, t_r, _ = _parts(d, x)
    sig = d.sigma
    dt = np.stack([-a * s * t_r, -a * t / sig, -a * s * t / k])
    l1, _ = _outer_factors(a, q, t)
    g = l1 * dt
    g[1] = g[1] - 1.0 / sig
    return g


def hessian(d: Distribution, x) -> np.ndarray:
    """Second derivatives of ``log f`` in ``(theta, sigma, eta)``; shape ``(3, 3) + x.shape``."""
    a, q, s, k, t, t_r, t_rr = _parts(d, x)
    sig = d.sigma
    dt = np.stack([-a * s * t_r, -a * t / sig, -a * s * t / k])
    d2t = np.empty((3, 3) + np.shape(t))
    d2t[0, 0] = a * (a - 1.0) * t_rr
    d2t[0, 1] = d2t[1, 0] = a * a * s * t_r / sig
    d2t[0, 2] = d2t[2, 0] = a * a * t_r / k
    d2t[1, 1] = a * (a + 1.0) * t / sig ** 2
    d2t[1, 2] = d2t[2, 1] = a * a * s * t / (k * sig)
    d2t[2, 2] = a * (a + 1.0) * t / k ** 2
    l1, l2 = _outer_factors(a, q, t)
    h = l2 * dt[:, None] * dt[None, :] + l1 * d2t
    h[1, 1] = h[1, 1] + 1.0 / sig ** 2
    return h


def standardized_scores(d: Distribution, x) -> np.ndarray:
    """``(psi_theta, psi_sigma, psi_eps)`` written on the standardized residual.

    ``psi_theta = sigma * dlogf/dtheta``, ``psi_sigma = sigma * dlogf/dsigma``
    and ``psi_eps = -dlogf/deps``; at ``theta=0, sigma=1`` these are the
    textbook ESEP / ESt score functions.
    """
    g = gradient(d, x)
    g[0] = g[0] * d.sigma
    g[1] = g[1] * d.sigma
    return g
