"""
Robustness diagnostics for the ML estimators of ``(theta, sigma, eps)``.

Scores are written on the standardized residual ``z = (x - theta)/sigma``::

    psi_theta = sigma * d log f / d theta
    psi_sigma = sigma * d log f / d sigma
    psi_eps   = d rho / d eps,  rho = -log f

so that at ``theta=0, sigma=1`` they are the textbook ESEP / ESt score
functions (the skewness score carries the ``rho`` sign, see
:mod:`skewpower.asymptotics`).  The influence function is ``M^{-1} g(x)`` with
``g`` the unstandardized score in the same orientation and ``M`` the expected
negative score Jacobian.

Tail behaviour is classified twice: analytically (closed-form limits) and
numerically (growth of ``|psi|`` over ``|z| = 10^6 .. 10^9``).  Sup-norm
sensitivities use a log-spaced grid with decade extensions to decide between
a finite value and divergence.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

from . import _derivatives
from ._quadrature import expect
from .asymptotics import fisher_info
from .distributions import Distribution, Family, alpha_q, logpdf
from .exceptions import ConditioningError, IntegrationError, ParameterError, RegularityDomainError

__all__ = [
    "ScoreVector",
    "Limit",
    "Verdict",
    "Redescending",
    "SensitivityReport",
    "scores",
    "score_limits",
    "numeric_score_limits",
    "score_limit_classification",
    "alpha_interval",
    "product_limit",
    "m_matrix",
    "influence_function",
    "gross_error_sensitivity",
    "iss",
    "redescending_check",
    "breakdown_point",
    "sensitivity_report",
]

SQRT2 = math.sqrt(2.0)
SCORE_NAMES = ("theta", "sigma", "eps", "shape")

# tail probes for the numeric limit classification
TAIL_Z = (1e6, 1e7, 1e8, 1e9)
# sup-search protocol
GRID_POINTS = 2001
GRID_SPAN = 1e6
GRID_EXTENSIONS = (1e7, 1e8, 1e9)
GROWTH_RULE = 0.05


@dataclass(frozen=True)
class ScoreVector:
    """Standardized scores at one or more points.

    ``singular`` flags points where ``psi_theta`` does not exist (ESEP with
    ``alpha < 1`` at ``x == theta``); ``psi_theta`` is NaN there.
    """

    psi_theta: np.ndarray
    psi_sigma: np.ndarray
    psi_eps: np.ndarray
    psi_shape: np.ndarray
    singular: np.ndarray

    def as_array(self) -> np.ndarray:
        """The three estimation scores stacked, shape ``(3,) + x.shape``."""
        return np.stack([self.psi_theta, self.psi_sigma, self.psi_eps])


def _shape_score(d: Distribution, x) -> np.ndarray:
    """Derivative of ``rho = -log f`` with respect to the shape parameter.

    ``alpha`` for ESEP, ``nu`` for ESt and ``q`` for ESGT.
    """
    z = (np.asarray(x, dtype=float) - d.theta) / d.sigma
    s = np.where(z >= 0.0, 1.0, -1.0)
    k = 1.0 - s * d.eps
    with np.errstate(divide="ignore", invalid="ignore"):
        if d.family is Family.ESEP:
            a = d.alpha
            u = np.abs(z) / (SQRT2 * k)
            ua = u ** a
            log_u = np.where(u > 0, np.log(np.where(u > 0, u, 1.0)), 0.0)
            const = -1.0 / a - special.digamma(1.0 / a) / a ** 2
            return const + ua * log_u
        if d.family is Family.EST:
            nu = d.nu
            const = 0.5 * (special.digamma(nu / 2.0) - special.digamma((nu + 1.0) / 2.0)) + 0.5 / nu
            ratio = z * z / (nu * k * k)
            return const + 0.5 * np.log1p(ratio) - 0.5 * (nu + 1.0) * z * z / (nu * nu * k * k + nu * z * z)
        a, q = d.alpha, d.q
        t = (np.abs(z) / (SQRT2 * k)) ** a
        const = special.digamma(q) - special.digamma(q + 1.0 / a) + 1.0 / (a * q)
        return const + np.log1p(t / q) - (q + 1.0 / a) * t / (q * (q + t))


def scores(d: Distribution, x) -> ScoreVector:
    """Standardized score functions at ``x`` (scalar or array)."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        psi = _derivatives.standardized_scores(d, x)
    singular = np.zeros(x.shape, dtype=bool)
    if d.family is Family.ESEP and d.alpha < 1.0:
        singular = x == d.theta
        psi[0] = np.where(singular, np.nan, psi[0])
    shape = _shape_score(d, x)
    return ScoreVector(psi[0], psi[1], psi[2], shape, singular)


# --------------------------------------------------------------------------
# tail limits


@dataclass(frozen=True)
class Limit:
    """Tail limit of a function as ``z -> +inf`` and ``z -> -inf``.

    ``kind`` is ``"finite"`` or ``"divergent"``; for divergent limits the
    values are signed infinities.
    """

    kind: str
    plus: float
    minus: float

    @property
    def finite(self) -> bool:
        return self.kind == "finite"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "plus": _num(self.plus), "minus": _num(self.minus)}


def _num(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")


def _fin(plus, minus) -> Limit:
    return Limit("finite", float(plus), float(minus))


def _div(plus_sign=1.0, minus_sign=1.0) -> Limit:
    return Limit("divergent", plus_sign * math.inf, minus_sign * math.inf)


def score_limits(d: Distribution) -> dict:
    """Closed-form tail limits of the four standardized scores."""
    e = d.eps
    kp, km = 1.0 - e, 1.0 + e
    if d.family is Family.ESEP:
        a = d.alpha
        if a > 1.0:
            theta = _div(1.0, -1.0)
        elif a == 1.0:
            theta = _fin(1.0 / (SQRT2 * kp), -1.0 / (SQRT2 * km))
        else:
            theta = _fin(0.0, 0.0)
        return {"theta": theta, "sigma": _div(), "eps": _div(1.0, -1.0), "shape": _div()}
    a, q = alpha_q(d)
    aq = a * q
    return {
        "theta": _fin(0.0, 0.0),
        "sigma": _fin(aq, aq),
        "eps": _fin((aq + 1.0) / kp, -(aq + 1.0) / km),
        "shape": _div(),
    }


def _classify_tail(values: np.ndarray) -> str:
    """``"divergent"`` when ``|psi|`` keeps growing without its increments dying out."""
    mags = np.abs(values)
    inc = np.diff(mags)
    if np.all(inc > 0) and inc[-1] >= 0.5 * inc[0]:
        return "divergent"
    return "finite"


def numeric_score_limits(d: Distribution, tail_z=TAIL_Z) -> dict:
    """Tail classification from evaluating the scores at growing ``|z|``."""
    out = {}
    zs = np.asarray(tail_z, dtype=float)
    sv_p = scores(d, d.theta + d.sigma * zs)
    sv_m = scores(d, d.theta - d.sigma * zs)
    for name in SCORE_NAMES:
        vp = getattr(sv_p, f"psi_{name}")
        vm = getattr(sv_m, f"psi_{name}")
        kinds = {_classify_tail(vp), _classify_tail(vm)}
        if "divergent" in kinds:
            out[name] = Limit("divergent", math.copysign(math.inf, vp[-1]),
                              math.copysign(math.inf, vm[-1]))
        else:
            out[name] = Limit("finite", float(vp[-1]), float(vm[-1]))
    return out


@dataclass(frozen=True)
class LimitClassification:
    analytic: dict
    numeric: dict

    @property
    def agree(self) -> bool:
        return all(self.analytic[k].kind == self.numeric[k].kind for k in self.analytic)

    def to_dict(self) -> dict:
        return {
            "agree": self.agree,
            "analytic": {k: v.to_dict() for k, v in self.analytic.items()},
            "numeric": {k: v.to_dict() for k, v in self.numeric.items()},
        }


def score_limit_classification(d: Distribution) -> LimitClassification:
    """Analytic and numeric tail verdicts for every score."""
    return LimitClassification(score_limits(d), numeric_score_limits(d))


def alpha_interval(alpha: float) -> str:
    """Key of the peakedness interval used by :func:`product_limit`."""
    if not alpha > 0:
        raise ParameterError("alpha must be positive")
    if alpha < 0.5:
        return "(0,1/2)"
    if alpha == 0.5:
        return "1/2"
    if alpha < 1.0:
        return "(1/2,1)"
    if alpha == 1.0:
        return "1"
    return "(1,inf)"


_PAIRS = {
    frozenset(["theta"]): ("theta", "theta"),
    frozenset(["theta", "eps"]): ("theta", "eps"),
    frozenset(["theta", "sigma"]): ("theta", "sigma"),
    frozenset(["sigma"]): ("sigma", "sigma"),
    frozenset(["sigma", "eps"]): ("sigma", "eps"),
    frozenset(["eps"]): ("eps", "eps"),
}


def product_limit(d: Distribution, first: str, second: str) -> Limit:
    """Tail limit of ``psi_first * psi_second``.

    For ESEP the answer depends only on the interval of ``alpha`` (see
    :func:`alpha_interval`); the finite nonzero values occur at ``alpha = 1``
    (``psi_theta**2``) and ``alpha = 1/2`` (``psi_theta`` times either other
    score).  For the mixture families the product of the individual limits is
    returned.
    """
    key = frozenset([first, second])
    if key not in _PAIRS or first not in SCORE_NAMES[:3] or second not in SCORE_NAMES[:3]:
        raise ParameterError(f"unknown score pair ({first}, {second})")
    if d.family is not Family.ESEP:
        lim = score_limits(d)
        return _fin(lim[first].plus * lim[second].plus, lim[first].minus * lim[second].minus)
    a, e = d.alpha, d.eps
    kp, km = 1.0 - e, 1.0 + e
    pair = _PAIRS[key]
    if pair == ("theta", "theta"):
        # |z|^(2a-2)
        if a < 1.0:
            return _fin(0.0, 0.0)
        if a == 1.0:
            return _fin(1.0 / (2.0 * kp * kp), 1.0 / (2.0 * km * km))
        return _div()
    if pair in (("theta", "eps"), ("theta", "sigma")):
        # |z|^(2a-1); theta*eps is even in sign, theta*sigma odd
        odd = pair == ("theta", "sigma")
        if a < 0.5:
            return _fin(0.0, 0.0)
        if a == 0.5:
            if odd:
                vp = a * a / (SQRT2 * kp) ** (2 * a)
                vm = -a * a / (SQRT2 * km) ** (2 * a)
            else:
                vp = a * a / (2.0 ** a * kp ** (2 * a + 1))
                vm = a * a / (2.0 ** a * km ** (2 * a + 1))
            return _fin(vp, vm)
        return _div(1.0, -1.0 if odd else 1.0)
    if pair == ("sigma", "eps"):
        return _div(1.0, -1.0)
    return _div()


# --------------------------------------------------------------------------
# M matrix and influence function


def m_matrix(d: Distribution) -> np.ndarray:
    """``M = -E[d g / d tau]`` by quadrature, ``tau = (theta, sigma, eps)``.

    Raises
    ------
    RegularityDomainError
        For ESEP with ``alpha <= 1`` (the Jacobian has a point mass at theta).
    IntegrationError
        If quadrature does not converge.
    """
    if d.family is Family.ESEP and d.alpha <= 1.0:
        raise RegularityDomainError("M needs alpha > 1 for ESEP")
    iu = np.triu_indices(3)

    def func(x):
        with np.errstate(divide="ignore", invalid="ignore"):
            h = _derivatives.hessian(d, x)
        return -h[iu]

    vals = expect(d, func)
    mat = np.zeros((3, 3))
    mat[iu] = vals
    return mat + np.triu(mat, 1).T


def _solver(d: Distribution):
    """Linear map ``g -> M^{-1} g``, with the information identity used for ESEP alpha <= 1."""
    try:
        m = m_matrix(d)
    except RegularityDomainError:
        m = fisher_info(d, 1).fisher
    cond = np.linalg.cond(m)
    if not cond < 1e12:
        raise ConditioningError(f"M matrix is singular (condition {cond:.3g})")
    return np.linalg.inv(m)


def influence_function(d: Distribution, x, m_inv: np.ndarray | None = None) -> np.ndarray:
    """``IF(x) = M^{-1} g(x)``; shape ``(3,) + x.shape``."""
    if m_inv is None:
        m_inv = _solver(d)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = _derivatives.gradient(d, np.asarray(x, dtype=float))
    return np.tensordot(m_inv, g, axes=1)


@dataclass(frozen=True)
class Verdict:
    """A sup-norm sensitivity: ``finite`` with a value, or ``divergent``."""

    kind: str
    value: float | None = None
    argmax: float | None = None
    sups: tuple = ()
    reason: str = ""

    @property
    def finite(self) -> bool:
        return self.kind == "finite"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "value": _num(self.value), "argmax": _num(self.argmax),
                "sups": [_num(v) for v in self.sups], "reason": self.reason}


def _log_grid(span: float, points: int = GRID_POINTS) -> np.ndarray:
    """Symmetric grid in standardized units: 0 and +-logspace(-6, log10(span))."""
    half = (points - 1) // 2
    pos = np.logspace(-6.0, math.log10(span), half)
    return np.concatenate([-pos[::-1], [0.0], pos])


def _sup_search(func, d: Distribution) -> Verdict:
    """Running sup of ``func`` (a function of standardized z) with decade extensions."""
    def sup_on(span):
        # keep the grid density fixed as the span grows
        decades = math.log10(span) + 6.0
        pts = int(round((GRID_POINTS - 1) / 12.0 * decades)) * 2 + 1
        z = _log_grid(span, max(pts, GRID_POINTS))
        vals = func(z)
        vals = np.where(np.isfinite(vals), vals, -np.inf)
        j = int(np.argmax(vals))
        best, arg = float(vals[j]), float(z[j])
        if 0 < j < len(z) - 1:
            a, b = z[j - 1], z[j + 1]
            res = optimize.minimize_scalar(lambda t: -float(func(np.array([t]))[0]),
                                           bracket=(a, z[j], b), method="golden",
                                           options={"xtol": 1e-10})
            if np.isfinite(res.fun) and -res.fun > best and a <= res.x <= b:
                best, arg = float(-res.fun), float(res.x)
        return best, arg

    best, arg = sup_on(GRID_SPAN)
    sups = [best]
    growing = []
    for span in GRID_EXTENSIONS:
        s, a = sup_on(span)
        growing.append(s > sups[-1] * (1.0 + GROWTH_RULE))
        sups.append(max(s, sups[-1]))
        if s > best:
            best, arg = s, a
    if all(growing):
        return Verdict("divergent", None, None, tuple(sups), "sup grows on every decade extension")
    return Verdict("finite", best, d.theta + d.sigma * arg, tuple(sups))


def _divergent_scores(d: Distribution) -> list:
    lim = score_limits(d)
    return [k for k in ("theta", "sigma", "eps") if not lim[k].finite]


def gross_error_sensitivity(d: Distribution) -> Verdict:
    """Sup over ``x`` of the Euclidean norm of the influence function.

    The argmax is reported in data units.
    """
    try:
        m_inv = _solver(d)
    except (IntegrationError, RegularityDomainError) as exc:
        bad = _divergent_scores(d)
        if bad:
            return Verdict("divergent", reason=f"unbounded scores {bad}; M unavailable ({exc})")
        raise

    def norm(z):
        return np.linalg.norm(influence_function(d, d.theta + d.sigma * z, m_inv), axis=0)

    return _sup_search(norm, d)


def iss(d: Distribution) -> Verdict:
    """Sup over ``x`` of ``sqrt(IF^T I IF)`` with ``I`` the per-observation information."""
    try:
        m_inv = _solver(d)
        info = fisher_info(d, 1).fisher
    except (IntegrationError, RegularityDomainError) as exc:
        bad = _divergent_scores(d)
        if bad:
            return Verdict("divergent", reason=f"unbounded scores {bad}; information unavailable ({exc})")
        raise

    def weighted(z):
        inf_ = influence_function(d, d.theta + d.sigma * z, m_inv)
        quad = np.einsum("i...,ij,j...->...", inf_, info, inf_)
        return np.sqrt(np.maximum(quad, 0.0))

    return _sup_search(weighted, d)


# --------------------------------------------------------------------------
# redescending and breakdown


@dataclass(frozen=True)
class Redescending:
    """Outcome of the four-condition redescending check.

    ``x0_plus``/``x0_minus`` are the turning points of the location score in
    data units when they exist; ``failed`` lists the failing condition
    numbers (1-4).
    """

    redescending: bool
    x0_plus: float | None
    x0_minus: float | None
    failed: tuple
    rho_over_abs_limit: float

    def to_dict(self) -> dict:
        return {"redescending": self.redescending, "x0_plus": _num(self.x0_plus),
                "x0_minus": _num(self.x0_minus), "failed": list(self.failed),
                "rho_over_abs_limit": _num(self.rho_over_abs_limit)}


def _rho(d: Distribution, z):
    """Objective ``-log f`` centred so that it vanishes at the location."""
    x = d.theta + d.sigma * np.asarray(z, dtype=float)
    return -(logpdf(d, x) - logpdf(d, d.theta))


def _turning_points(d: Distribution):
    """Analytic turning points of ``psi_theta`` in standardized units, or None."""
    a, q = alpha_q(d)
    if math.isinf(q) or a <= 1.0:
        return None
    # psi_theta ~ u^(a-1)/(q + u^a) peaks at u^a = q (a - 1)
    u0 = (q * (a - 1.0)) ** (1.0 / a)
    return SQRT2 * (1.0 - d.eps) * u0, -SQRT2 * (1.0 + d.eps) * u0


def redescending_check(d: Distribution) -> Redescending:
    """Check the redescending conditions for the location objective.

    1. ``rho(0) = 0`` (after centring), 2. ``rho -> inf`` in both tails,
    3. ``rho/|z| -> 0``, 4. ``psi_theta`` rises to a turning point then falls
    on each side.  Condition 4 is confirmed numerically by a sign change of
    the finite-difference derivative of ``psi_theta`` at the turning point.
    """
    failed = []
    if abs(float(_rho(d, 0.0))) > 1e-12:
        failed.append(1)
    big = np.array([1e6, 1e8])
    rp, rm = _rho(d, big), _rho(d, -big)
    if not (rp[1] > rp[0] > 0 and rm[1] > rm[0] > 0):
        failed.append(2)
    if d.family is Family.ESEP:
        a = d.alpha
        ratio = 0.0 if a < 1.0 else (1.0 / (SQRT2 * (1.0 - d.eps)) if a == 1.0 else math.inf)
    else:
        ratio = 0.0
    if ratio != 0.0:
        failed.append(3)
    tp = _turning_points(d)
    x0p = x0m = None
    if tp is None:
        failed.append(4)
    else:
        zp, zm = tp
        h = 1e-4 * max(abs(zp), abs(zm), 1.0)

        def slope(z):
            x = d.theta + d.sigma * np.array([z - h, z + h])
            p = scores(d, x).psi_theta
            return (p[1] - p[0]) / (2 * h)

        ok_p = slope(zp - 10 * h) > 0 > slope(zp + 10 * h)
        ok_m = slope(zm + 10 * h) > 0 > slope(zm - 10 * h)
        if ok_p and ok_m:
            x0p, x0m = d.theta + d.sigma * zp, d.theta + d.sigma * zm
        else:
            failed.append(4)
    return Redescending(not failed, x0p, x0m, tuple(failed), ratio)


def breakdown_point(d: Distribution) -> str:
    """``"half"`` or ``"not_established"`` for the location estimator.

    ESEP with ``alpha <= 1`` and ESt have breakdown point one half.  ESEP with
    ``alpha > 1`` is known not to reach one half but no value is available, and
    ESGT outside the ESt member is not covered.
    """
    if d.family is Family.ESEP:
        return "half" if d.alpha <= 1.0 else "not_established"
    if d.family is Family.EST:
        return "half"
    return "half" if d.alpha == 2.0 else "not_established"


# --------------------------------------------------------------------------
# report


@dataclass(frozen=True)
class SensitivityReport:
    distribution: Distribution
    score_limits: LimitClassification
    ges: Verdict
    iss: Verdict
    redescending: Redescending
    breakdown: str
    products: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = self.distribution
        return {
            "family": d.family.value,
            "params": {"theta": d.theta, "sigma": d.sigma, "eps": d.eps, **d.shape},
            "score_limits": self.score_limits.to_dict(),
            "product_limits": {k: v.to_dict() for k, v in self.products.items()},
            "ges": self.ges.to_dict(),
            "iss": self.iss.to_dict(),
            "redescending": self.redescending.to_dict(),
            "breakdown": self.breakdown,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def to_text(self) -> str:
        d = self.distribution
        lines = [f"{d.label}  theta={d.theta:g} sigma={d.sigma:g} eps={d.eps:g}", "score tail limits:"]
        for name, lim in self.score_limits.analytic.items():
            if lim.finite:
                lines.append(f"  psi_{name:<6} finite   (+inf: {lim.plus:.6g}, -inf: {lim.minus:.6g})")
            else:
                lines.append(f"  psi_{name:<6} divergent")
        lines.append(f"  numeric check agrees: {self.score_limits.agree}")
        for label, v in (("GES", self.ges), ("ISS", self.iss)):
            if v.finite:
                lines.append(f"{label}: finite {v.value:.6g} at x={v.argmax:.6g}")
            else:
                lines.append(f"{label}: divergent")
        r = self.redescending
        if r.redescending:
            lines.append(f"redescending: yes (x0+={r.x0_plus:.7g}, x0-={r.x0_minus:.7g})")
        else:
            lines.append(f"redescending: no (failed conditions {list(r.failed)})")
        lines.append(f"breakdown point: {self.breakdown}")
        return "\n".join(lines)


def sensitivity_report(d: Distribution) -> SensitivityReport:
    products = {f"{a}*{b}": product_limit(d, a, b) for a, b in _PAIRS.values()}
    return SensitivityReport(
        distribution=d,
        score_limits=score_limit_classification(d),
        ges=gross_error_sensitivity(d),
        iss=iss(d),
        redescending=redescending_check(d),
        breakdown=breakdown_point(d),
        products=products,
    )
