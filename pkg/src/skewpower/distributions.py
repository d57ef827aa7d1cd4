"""
Epsilon-skew exponential power (ESEP) distributions and their scale mixtures.

Three families are supported:

``ESEP``
    Exponential power density with scale ``sqrt(2)*(1+eps)*sigma`` to the left
    of ``theta`` and ``sqrt(2)*(1-eps)*sigma`` to the right.  ``alpha=2`` gives
    the epsilon-skew normal (ESN), ``alpha=1`` the epsilon-skew Laplace (ESL).
``ESGT``
    Epsilon-skew generalized t, the gamma scale mixture of ESEP with tail
    parameter ``q``.
``ESt``
    Epsilon-skew Student t with ``nu`` degrees of freedom, written in the
    usual skew-t form::

        f(x) = c(nu)/sigma * (1 + z**2 / (nu*(1 - s*eps)**2)) ** (-(nu+1)/2)

    with ``z = (x-theta)/sigma`` and ``s = sign(z)``.  Numerically it equals
    ``ESGT(alpha=2, q=nu/2)``; the two are kept as separate tags because the
    ESt formulas are evaluated through the Student t special functions.

Throughout, ``sign(0)`` is taken as ``+1`` so that ``x == theta`` belongs to
the right-hand branch.  Half of the probability mass split is fixed by the
skewness: ``P(X < theta) = (1 + eps)/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from numpy.random import Generator, default_rng
from scipy import special

from .exceptions import InputError, MomentError, ParameterError

__all__ = [
    "Family",
    "Distribution",
    "SampleBatch",
    "esep",
    "esn",
    "esl",
    "esgt",
    "est",
    "make_distribution",
    "logpdf",
    "density",
    "cdf",
    "quantile",
    "central_moment",
    "log_likelihood",
    "sample",
    "sample_esep",
    "sample_est",
    "sample_esgt",
]

SQRT2 = math.sqrt(2.0)


class Family(str, Enum):
    ESEP = "ESEP"
    ESGT = "ESGT"
    EST = "ESt"

    @classmethod
    def parse(cls, value: "Family | str") -> "Family":
        if isinstance(value, Family):
            return value
        key = str(value).strip().lower()
        for member in cls:
            if member.value.lower() == key:
                return member
        raise ParameterError(f"unknown family {value!r}")


def _positive(name: str, value: float | None) -> float:
    if value is None:
        raise ParameterError(f"{name} is required for this family")
    value = float(value)
    if not (value > 0.0 and math.isfinite(value)):
        raise ParameterError(f"{name} must be a finite positive number, got {value}")
    return value


@dataclass(frozen=True)
class Distribution:
    """One member of the ESEP / ESGT / ESt family.

    Use the helpers :func:`esep`, :func:`esn`, :func:`esl`, :func:`esgt` and
    :func:`est` rather than calling the constructor directly.  Shape
    parameters not used by the family must be left as ``None``.
    """

    family: Family
    theta: float = 0.0
    sigma: float = 1.0
    eps: float = 0.0
    alpha: float | None = None
    q: float | None = None
    nu: float | None = None

    def __post_init__(self) -> None:
        fam = Family.parse(self.family)
        object.__setattr__(self, "family", fam)
        theta = float(self.theta)
        if not math.isfinite(theta):
            raise ParameterError(f"theta must be finite, got {theta}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "sigma", _positive("sigma", self.sigma))
        eps = float(self.eps)
        if not -1.0 < eps < 1.0:
            raise ParameterError(f"eps must lie in (-1, 1), got {eps}")
        object.__setattr__(self, "eps", eps)

        if fam is Family.ESEP:
            object.__setattr__(self, "alpha", _positive("alpha", self.alpha))
            if self.q is not None or self.nu is not None:
                raise ParameterError("ESEP takes no q or nu")
        elif fam is Family.ESGT:
            object.__setattr__(self, "alpha", _positive("alpha", self.alpha))
            object.__setattr__(self, "q", _positive("q", self.q))
            if self.nu is not None:
                raise ParameterError("ESGT takes no nu")
        else:
            object.__setattr__(self, "nu", _positive("nu", self.nu))
            if self.alpha is not None or self.q is not None:
                raise ParameterError("ESt takes no alpha or q")

    @property
    def params(self) -> tuple[float, float, float]:
        """Location, scale and skewness as a tuple."""
        return (self.theta, self.sigma, self.eps)

    @property
    def shape(self) -> dict[str, float]:
        """The fixed shape parameters of this member."""
        if self.family is Family.ESEP:
            return {"alpha": self.alpha}
        if self.family is Family.ESGT:
            return {"alpha": self.alpha, "q": self.q}
        return {"nu": self.nu}

    @property
    def label(self) -> str:
        inner = ",".join(f"{k}={v:g}" for k, v in self.shape.items())
        return f"{self.family.value}({inner})"

    def with_params(self, theta=None, sigma=None, eps=None) -> "Distribution":
        """Copy with some of (theta, sigma, eps) replaced."""
        return replace(
            self,
            theta=self.theta if theta is None else theta,
            sigma=self.sigma if sigma is None else sigma,
            eps=self.eps if eps is None else eps,
        )

    # thin conveniences over the module functions
    def pdf(self, x):
        return density(self, x)

    def logpdf(self, x):
        return logpdf(self, x)

    def cdf(self, x):
        return cdf(self, x)

    def ppf(self, p):
        return quantile(self, p)

    def rvs(self, n: int, seed=None) -> np.ndarray:
        return sample(self, n, seed).values


def esep(theta=0.0, sigma=1.0, eps=0.0, alpha=2.0) -> Distribution:
    return Distribution(Family.ESEP, theta, sigma, eps, alpha=alpha)


def esn(theta=0.0, sigma=1.0, eps=0.0) -> Distribution:
    """Epsilon-skew normal, ``ESEP`` with ``alpha=2``."""
    return esep(theta, sigma, eps, 2.0)


def esl(theta=0.0, sigma=1.0, eps=0.0) -> Distribution:
    """Epsilon-skew Laplace, ``ESEP`` with ``alpha=1``."""
    return esep(theta, sigma, eps, 1.0)


def esgt(theta=0.0, sigma=1.0, eps=0.0, alpha=2.0, q=1.0) -> Distribution:
    return Distribution(Family.ESGT, theta, sigma, eps, alpha=alpha, q=q)


def est(theta=0.0, sigma=1.0, eps=0.0, nu=3.0) -> Distribution:
    return Distribution(Family.EST, theta, sigma, eps, nu=nu)


def make_distribution(name: str, theta=0.0, sigma=1.0, eps=0.0, *,
                      alpha=None, q=None, nu=None) -> Distribution:
    """Build a member from a loose family name.

    Accepts ``esep``, ``esgt``, ``est`` and the aliases ``esn`` (alpha=2) and
    ``esl`` (alpha=1).
    """
    key = name.strip().lower()
    if key == "esn":
        return esn(theta, sigma, eps)
    if key == "esl":
        return esl(theta, sigma, eps)
    if key == "esep":
        return esep(theta, sigma, eps, 2.0 if alpha is None else alpha)
    if key == "esgt":
        return esgt(theta, sigma, eps, alpha, q)
    if key == "est":
        return est(theta, sigma, eps, 3.0 if nu is None else nu)
    raise ParameterError(f"unknown family {name!r}")


def alpha_q(d: Distribution) -> tuple[float, float]:
    """Peakedness and tail parameter; ``q = inf`` for ESEP, ``(2, nu/2)`` for ESt."""
    if d.family is Family.ESEP:
        return d.alpha, math.inf
    if d.family is Family.ESGT:
        return d.alpha, d.q
    return 2.0, d.nu / 2.0


def _standardize(d: Distribution, x):
    z = (np.asarray(x, dtype=float) - d.theta) / d.sigma
    s = np.where(z >= 0.0, 1.0, -1.0)
    k = 1.0 - s * d.eps
    return z, s, k


def _log_norm_const(d: Distribution) -> float:
    """log of the density at theta (sigma included)."""
    if d.family is Family.ESEP:
        a = d.alpha
        return math.log(a) - math.log(2.0 * SQRT2 * d.sigma) - special.gammaln(1.0 / a)
    if d.family is Family.ESGT:
        a, q = d.alpha, d.q
        return (math.log(a) - math.log(2.0 * SQRT2 * d.sigma)
                - special.betaln(1.0 / a, q) - math.log(q) / a)
    nu = d.nu
    return (special.gammaln((nu + 1.0) / 2.0) - special.gammaln(nu / 2.0)
            - 0.5 * math.log(nu * math.pi) - math.log(d.sigma))


def logpdf(d: Distribution, x):
    """Log density, vectorized over ``x``."""
    z, s, k = _standardize(d, x)
    c = _log_norm_const(d)
    if d.family is Family.ESEP:
        u = np.abs(z) / (SQRT2 * k)
        out = c - u ** d.alpha
    elif d.family is Family.ESGT:
        a, q = d.alpha, d.q
        u = np.abs(z) / (SQRT2 * k)
        out = c - (q + 1.0 / a) * np.log1p(u ** a / q)
    else:
        nu = d.nu
        out = c - 0.5 * (nu + 1.0) * np.log1p(z * z / (nu * k * k))
    return out[()] if np.ndim(out) == 0 else out


def density(d: Distribution, x):
    """Probability density at ``x``."""
    return np.exp(logpdf(d, x))


def cdf(d: Distribution, x):
    """Cumulative distribution function.

    ESEP goes through the regularized incomplete gamma function, ESGT through
    the regularized incomplete beta function and ESt through the Student t
    distribution function of each half.
    """
    z, s, k = _standardize(d, x)
    left_mass = 0.5 * (1.0 + d.eps)
    right_mass = 0.5 * (1.0 - d.eps)
    right = z >= 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        out = _cdf_halves(d, z, k, right, left_mass, right_mass)
    out = np.clip(out, 0.0, 1.0)
    return out[()] if np.ndim(out) == 0 else out


def _cdf_halves(d, z, k, right, left_mass, right_mass):
    if d.family is Family.ESEP:
        a = d.alpha
        t = (np.abs(z) / (SQRT2 * k)) ** a
        return np.where(right,
                        left_mass + right_mass * special.gammainc(1.0 / a, t),
                        left_mass * special.gammaincc(1.0 / a, t))
    if d.family is Family.ESGT:
        a, q = d.alpha, d.q
        t = (np.abs(z) / (SQRT2 * k)) ** a / q
        # v = t/(1+t) ~ Beta(1/a, q) on each half; use the complement for tails
        w = 1.0 / (1.0 + t)
        v = np.where(np.isinf(t), 1.0, t * w)
        return np.where(right,
                        left_mass + right_mass * special.betainc(1.0 / a, q, v),
                        left_mass * special.betainc(q, 1.0 / a, w))
    y = z / k
    return np.where(right,
                    left_mass + (1.0 - d.eps) * (special.stdtr(d.nu, y) - 0.5),
                    (1.0 + d.eps) * special.stdtr(d.nu, y))


def quantile(d: Distribution, p):
    """Inverse of :func:`cdf` for ``0 < p < 1``."""
    p = np.asarray(p, dtype=float)
    if np.any(~np.isfinite(p)) or np.any(p <= 0.0) or np.any(p >= 1.0):
        raise ParameterError("quantile probabilities must lie strictly inside (0, 1)")
    left_mass = 0.5 * (1.0 + d.eps)
    right_mass = 0.5 * (1.0 - d.eps)
    right = p >= left_mass
    # fraction of the relevant half lying beyond |x - theta|
    pl = np.clip(p / left_mass, 0.0, 1.0)
    pr = np.clip((p - left_mass) / right_mass, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        if d.family is Family.ESEP:
            a = d.alpha
            tl = special.gammainccinv(1.0 / a, pl)
            tr = special.gammaincinv(1.0 / a, pr)
            ul, ur = tl ** (1.0 / a), tr ** (1.0 / a)
            zl = -SQRT2 * (1.0 + d.eps) * ul
            zr = SQRT2 * (1.0 - d.eps) * ur
        elif d.family is Family.ESGT:
            a, q = d.alpha, d.q
            wl = special.betaincinv(q, 1.0 / a, pl)
            vr = special.betaincinv(1.0 / a, q, pr)
            tl = (1.0 - wl) / wl * q
            tr = vr / (1.0 - vr) * q
            zl = -SQRT2 * (1.0 + d.eps) * tl ** (1.0 / a)
            zr = SQRT2 * (1.0 - d.eps) * tr ** (1.0 / a)
        else:
            zl = (1.0 + d.eps) * special.stdtrit(d.nu, np.clip(p / (1.0 + d.eps), 0.0, 0.5))
            zr = (1.0 - d.eps) * special.stdtrit(
                d.nu, np.clip(0.5 + (p - left_mass) / (1.0 - d.eps), 0.5, 1.0))
    z = np.where(right, zr, zl)
    out = d.theta + d.sigma * z
    return out[()] if np.ndim(out) == 0 else out


def central_moment(d: Distribution, r: int, absolute: bool = False) -> float:
    """``E[(X - theta)**r]`` from the closed form, for integer ``r >= 0``.

    With ``absolute=True`` returns ``E|X - theta|**r`` instead.  For ESGT and
    ESt the moment exists only when ``q*alpha > r`` (``nu > r`` for ESt);
    otherwise :class:`MomentError` is raised.
    """
    if isinstance(r, bool) or int(r) != r or r < 0:
        raise ParameterError(f"moment order must be a nonnegative integer, got {r!r}")
    r = int(r)
    e, sig = d.eps, d.sigma
    # (-1)**(-r) equals (-1)**r for integer r
    left_sign = 1.0 if absolute else (-1.0) ** r
    bracket = left_sign * (1.0 + e) ** (r + 1) + (1.0 - e) ** (r + 1)
    a, q = alpha_q(d)
    if d.family is Family.ESEP:
        log_mag = (0.5 * r * math.log(2.0) + r * math.log(sig)
                   + special.gammaln((r + 1.0) / a) - special.gammaln(1.0 / a))
        return 0.5 * bracket * math.exp(log_mag)
    if not q * a > r:
        raise MomentError(f"moment of order {r} needs q*alpha > {r}, have {q * a:g}")
    log_mag = ((0.5 * r - 1.0) * math.log(2.0) + (r / a) * math.log(q) + r * math.log(sig)
               + special.gammaln((r + 1.0) / a) + special.gammaln(q - r / a)
               - special.gammaln(1.0 / a) - special.gammaln(q))
    return bracket * math.exp(log_mag)


def _as_data(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float).ravel()
    if arr.size == 0:
        raise InputError("data must contain at least one value")
    if not np.all(np.isfinite(arr)):
        raise InputError("data contains non-finite values")
    return arr


def log_likelihood(d: Distribution, data) -> float:
    """Sum of log densities over ``data``."""
    return float(np.sum(logpdf(d, _as_data(data))))


# --------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class SampleBatch:
    values: np.ndarray = field(repr=False)
    seed: int | None
    source: Distribution

    def __len__(self) -> int:
        return len(self.values)


def _rng(seed) -> Generator:
    if isinstance(seed, Generator):
        return seed
    return default_rng(seed)


def _signed_branch(d: Distribution, u: np.ndarray) -> np.ndarray:
    return np.where(u < 0.5 * (1.0 - d.eps), SQRT2 * (1.0 - d.eps), -SQRT2 * (1.0 + d.eps))


def _esep_draws(d: Distribution, alpha: float, n: int, rng: Generator) -> np.ndarray:
    g = rng.gamma(1.0 / alpha, 1.0, size=n)
    u = rng.random(n)
    return d.theta + d.sigma * _signed_branch(d, u) * g ** (1.0 / alpha)


def _check_n(n) -> int:
    if int(n) != n or n < 1:
        raise ParameterError(f"sample size must be a positive integer, got {n!r}")
    return int(n)


def sample_esep(d: Distribution, n: int, seed=None) -> SampleBatch:
    """Draw from ESEP by the gamma transform.

    ``g ~ Gamma(1/alpha)``, a uniform picks the side (right with probability
    ``(1-eps)/2``), and ``x = theta + sigma * side_scale * g**(1/alpha)``.
    """
    if d.family is not Family.ESEP:
        raise ParameterError("sample_esep needs an ESEP distribution")
    n = _check_n(n)
    return SampleBatch(_esep_draws(d, d.alpha, n, _rng(seed)), seed, d)


def _mixture_draws(d: Distribution, alpha: float, q: float, n: int, rng: Generator):
    y = _esep_draws(d, alpha, n, rng)
    z = rng.gamma(q, 1.0, size=n)
    return d.theta + (y - d.theta) * (q / z) ** (1.0 / alpha)


def sample_est(d: Distribution, n: int, seed=None) -> SampleBatch:
    """Draw from ESt: an ESN draw divided by ``sqrt(z/(nu/2))``, ``z ~ Gamma(nu/2)``."""
    if d.family is not Family.EST:
        raise ParameterError("sample_est needs an ESt distribution")
    n = _check_n(n)
    return SampleBatch(_mixture_draws(d, 2.0, d.nu / 2.0, n, _rng(seed)), seed, d)


def sample_esgt(d: Distribution, n: int, seed=None) -> SampleBatch:
    """Draw from ESGT as a gamma scale mixture of ESEP."""
    if d.family is not Family.ESGT:
        raise ParameterError("sample_esgt needs an ESGT distribution")
    n = _check_n(n)
    return SampleBatch(_mixture_draws(d, d.alpha, d.q, n, _rng(seed)), seed, d)


def sample(d: Distribution, n: int, seed=None) -> SampleBatch:
    """Seeded draws from any family.

    ``seed`` may be an integer, ``None`` or a :class:`numpy.random.Generator`
    (whose state is advanced).
    """
    if d.family is Family.ESEP:
        return sample_esep(d, n, seed)
    if d.family is Family.EST:
        return sample_est(d, n, seed)
    return sample_esgt(d, n, seed)
