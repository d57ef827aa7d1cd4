"""Expectations under a fitted density by adaptive quadrature."""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from .distributions import Distribution, density
from .exceptions import IntegrationError

# scale units around theta where the integration range is split; the
# integrands are non-smooth (sometimes singular) at theta itself
_BREAKS = (1.0,)


def expect(d: Distribution, func, epsabs: float = 1e-10, epsrel: float = 1e-10,
           tol: float = 1e-7):
    """``E[func(X)]`` for a vector-valued ``func`` under ``d``.

    The real line is split at ``theta`` and at ``theta +- sigma`` and each piece
    is integrated separately with :func:`scipy.integrate.quad_vec`.

    Raises
    ------
    IntegrationError
        If the reported error exceeds ``tol`` relative to the result scale.
    """
    th, sg = d.theta, d.sigma
    cuts = [th - b * sg for b in reversed(_BREAKS)] + [th] + [th + b * sg for b in _BREAKS]
    edges = [-math.inf] + cuts + [math.inf]

    def integrand(x):
        return np.asarray(func(x), dtype=float) * density(d, x)

    total, err = 0.0, 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, e = integrate.quad_vec(integrand, a, b, epsabs=epsabs, epsrel=epsrel,
                                    limit=400)
        total = total + val
        err += e
    scale = max(1.0, float(np.max(np.abs(total))))
    if not np.all(np.isfinite(total)) or err > tol * scale:
        raise IntegrationError(f"quadrature error estimate {err:.3g} too large")
    return total
