"""
Fisher information, asymptotic covariances and regularity diagnostics for the
ML estimators of ``(theta, sigma, eps)``.

Orientation of the skewness coordinate
--------------------------------------
The closed-form ESEP information printed in the literature, and the
covariances derived from it, use the skewness score ``d rho / d eps`` with
``rho = -log f`` while the location and scale scores are ``d log f``.  In that
*score* orientation the theta/eps information entry is positive.  The
parameter orientation (all three scores are ``d log f``) differs only in the
sign of the theta/eps and sigma/eps off-diagonal entries.  Functions here take
``skew="score"`` (default, matches the reference matrices) or
``skew="parameter"`` (true covariance of ``(theta_hat, sigma_hat, eps_hat)``).

Scale coordinate
----------------
``scale="sigma"`` (default) gives information for ``sigma``; ``scale="variance"``
reparametrizes to ``sigma**2``.  The reference ESt variance table and
determinant are in the variance coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import _derivatives
from ._quadrature import expect
from .distributions import (
    Distribution,
    Family,
    central_moment,
    esep,
    est,
    logpdf,
)
from .exceptions import (
    ConditioningError,
    IntegrationError,
    MomentError,
    ParameterError,
    RegularityDomainError,
)

__all__ = [
    "InfoMatrices",
    "fisher_info_esep",
    "asymptotic_cov_esep",
    "fisher_info_numeric",
    "fisher_info_est",
    "fisher_info",
    "esn_det_closed_form",
    "est_det_closed_form",
    "esgt_log_integral",
    "ConditionVerdict",
    "RegularityReport",
    "regularity_check",
    "CramerRao",
    "cramer_rao_report",
    "variance_table",
    "format_matrix",
]

PARAM_NAMES = ("theta", "sigma", "eps")
_SKEW_FLIP = np.diag([1.0, 1.0, -1.0])


def _check_n(n) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ParameterError(f"sample size must be a positive integer, got {n!r}")
    return int(n)


def _reorient(mat: np.ndarray, d: Distribution, skew: str, scale: str) -> np.ndarray:
    """Map a score-orientation, sigma-coordinate information matrix."""
    if skew not in ("score", "parameter"):
        raise ParameterError(f"skew must be 'score' or 'parameter', got {skew!r}")
    if scale not in ("sigma", "variance"):
        raise ParameterError(f"scale must be 'sigma' or 'variance', got {scale!r}")
    if skew == "parameter":
        mat = _SKEW_FLIP @ mat @ _SKEW_FLIP
    if scale == "variance":
        jac = np.diag([1.0, 0.5 / d.sigma, 1.0])
        mat = jac @ mat @ jac
    return mat


@dataclass(frozen=True)
class InfoMatrices:
    """Fisher information for a sample of size ``n`` and its inverse."""

    fisher: np.ndarray = field(repr=False)
    acov: np.ndarray = field(repr=False)
    det: float
    n: int
    scale: str = "sigma"
    skew: str = "score"

    @classmethod
    def from_fisher(cls, fisher, n: int, scale: str = "sigma", skew: str = "score"):
        fisher = np.asarray(fisher, dtype=float)
        fisher = 0.5 * (fisher + fisher.T)
        if not np.all(np.isfinite(fisher)):
            raise ConditioningError("information matrix has non-finite entries")
        cond = np.linalg.cond(fisher)
        if not cond < 1e12:
            raise ConditioningError(f"information matrix is singular (condition {cond:.3g})")
        acov = np.linalg.inv(fisher)
        acov = 0.5 * (acov + acov.T)
        return cls(fisher, acov, float(np.linalg.det(fisher)), n, scale, skew)

    @property
    def std_errors(self) -> np.ndarray:
        return np.sqrt(np.diag(self.acov))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "scale": self.scale,
            "skew": self.skew,
            "params": list(PARAM_NAMES),
            "fisher": self.fisher.tolist(),
            "acov": self.acov.tolist(),
            "det": self.det,
        }


# --------------------------------------------------------------------------
# ESEP closed forms


def _esep_alpha(d: Distribution) -> float:
    if d.family is not Family.ESEP:
        raise ParameterError(f"closed-form ESEP information needs an ESEP distribution, got {d.family.value}")
    if not d.alpha > 1.0:
        raise RegularityDomainError(
            f"classical Fisher information needs alpha > 1, got alpha={d.alpha:g}")
    return d.alpha


def fisher_info_esep(d: Distribution, n: int = 1, *, skew: str = "score",
                     scale: str = "sigma") -> InfoMatrices:
    """Closed-form ESEP Fisher information for ``n`` observations.

    Raises
    ------
    RegularityDomainError
        For ``alpha <= 1``, where the density is not differentiable at theta.
    """
    a = _esep_alpha(d)
    n = _check_n(n)
    sig, e = d.sigma, d.eps
    g = special.gamma
    one_m_e2 = 1.0 - e * e
    i_tt = a * (a - 1.0) * g(1.0 - 1.0 / a) / (2.0 * sig ** 2 * g(1.0 / a) * one_m_e2)
    i_te = a * a / (math.sqrt(2.0) * sig * g(1.0 / a) * one_m_e2)
    shape_term = a * (a + 1.0) * g(1.0 + 1.0 / a) / g(1.0 / a)
    i_ss = (shape_term - 1.0) / sig ** 2
    i_ee = shape_term / one_m_e2
    mat = n * np.array([[i_tt, 0.0, i_te], [0.0, i_ss, 0.0], [i_te, 0.0, i_ee]])
    return InfoMatrices.from_fisher(_reorient(mat, d, skew, scale), n, scale, skew)


def asymptotic_cov_esep(d: Distribution, n: int = 1, *, skew: str = "score") -> np.ndarray:
    """Asymptotic covariance of ``(theta_hat, sigma_hat, eps_hat)`` from the closed forms.

    Equal to the inverse of :func:`fisher_info_esep` but evaluated directly.

    Examples
    --------
    >>> from skewpower.distributions import esn
    >>> round(asymptotic_cov_esep(esn(0, 1, -0.2), 30)[0, 0], 6)
    0.21168
    """
    a = _esep_alpha(d)
    n = _check_n(n)
    sig, e = d.sigma, d.eps
    g = special.gamma
    gp, gm, g1 = g(1.0 + 1.0 / a), g(1.0 - 1.0 / a), g(1.0 / a)
    denom = gp * gm * a * a - gm * gp - a * a
    var_t = 2.0 * (a + 1.0) * gp * g1 * sig ** 2 * (1.0 - e * e) / (a * n * denom)
    cov_te = math.sqrt(2.0) * sig * g1 * (e * e - 1.0) / (n * denom)
    var_s = -g1 * sig ** 2 / (n * (-a * a * gp - a * gp + g1))
    var_e = (a - 1.0) * gm * g1 * (1.0 - e * e) / (a * n * denom)
    cov = np.array([[var_t, 0.0, cov_te], [0.0, var_s, 0.0], [cov_te, 0.0, var_e]])
    if skew == "parameter":
        cov = _SKEW_FLIP @ cov @ _SKEW_FLIP
    elif skew != "score":
        raise ParameterError(f"skew must be 'score' or 'parameter', got {skew!r}")
    return cov


def esn_det_closed_form(sigma: float, eps: float, n: int = 1) -> float:
    """Determinant of the ESN (alpha=2) information, ``2n^3(3pi-8)/(sigma^4 pi (1-eps^2)^2)``."""
    return 2.0 * n ** 3 * (3.0 * math.pi - 8.0) / (sigma ** 4 * math.pi * (1.0 - eps * eps) ** 2)


# --------------------------------------------------------------------------
# numeric information


def _outer_scores(d: Distribution):
    iu = np.triu_indices(3)

    def func(x):
        g = _derivatives.gradient(d, x)
        return np.outer(g, g)[iu]

    return func, iu


def fisher_info_numeric(d: Distribution, n: int = 1, *, skew: str = "score",
                        scale: str = "sigma") -> InfoMatrices:
    """Fisher information as ``n * E[g g^T]`` by quadrature of score outer products.

    Works for every family; for ESEP with ``alpha <= 1/2`` the location score
    is not square integrable and :class:`IntegrationError` is raised.
    """
    n = _check_n(n)
    if d.family is Family.ESEP and d.alpha <= 0.5:
        raise IntegrationError("location score is not square integrable for alpha <= 1/2")
    func, iu = _outer_scores(d)
    vals = expect(d, func)
    mat = np.zeros((3, 3))
    mat[iu] = vals
    mat = mat + np.triu(mat, 1).T
    return InfoMatrices.from_fisher(_reorient(n * mat, d, skew, scale), n, scale, skew)


def fisher_info_est(d: Distribution, n: int = 1, *, skew: str = "score",
                    scale: str = "sigma") -> InfoMatrices:
    """Numeric Fisher information for ESt (or ESGT) distributions."""
    if d.family is Family.ESEP:
        raise ParameterError("use fisher_info_esep for ESEP distributions")
    return fisher_info_numeric(d, n, skew=skew, scale=scale)


def fisher_info(d: Distribution, n: int = 1, *, skew: str = "score",
                scale: str = "sigma") -> InfoMatrices:
    """Closed form for ESEP with ``alpha > 1``, quadrature otherwise.

    For ESEP with ``1/2 < alpha <= 1`` the score outer-product expectation is
    returned even though the classical regularity conditions fail at theta.
    """
    if d.family is Family.ESEP and d.alpha > 1.0:
        return fisher_info_esep(d, n, skew=skew, scale=scale)
    return fisher_info_numeric(d, n, skew=skew, scale=scale)


def est_det_closed_form(nu: float, sigma: float, eps: float, n: int = 1) -> float:
    """Closed-form ESt information determinant, in the ``(theta, sigma**2, eps)`` coordinates.

    ``-(1/2) n^3 (nu+1)^2 nu (16c^2 - 3) / (sigma^6 (eps^2-1)^2 (nu+3)^3)`` with
    ``c`` the Student t density at zero.
    """
    c = math.exp(special.gammaln((nu + 1.0) / 2.0) - special.gammaln(nu / 2.0)) / math.sqrt(nu * math.pi)
    return (-0.5 * n ** 3 * (nu + 1.0) ** 2 * nu * (16.0 * c * c - 3.0)
            / (sigma ** 6 * (eps * eps - 1.0) ** 2 * (nu + 3.0) ** 3))


def esgt_log_integral(alpha: float, q: float) -> float:
    """``int_0^inf (1 + y^alpha)^(-q - 1/alpha) log(1 + y^alpha) dy`` in closed form."""
    if not (alpha > 0 and q > 0):
        raise ParameterError("alpha and q must be positive")
    ia = 1.0 / alpha
    log_ratio = special.gammaln(ia) + special.gammaln(q) - special.gammaln(q + ia)
    return -math.exp(log_ratio) * (special.digamma(q) - special.digamma(q + ia)) / alpha


# --------------------------------------------------------------------------
# regularity conditions


@dataclass(frozen=True)
class ConditionVerdict:
    name: str
    passed: bool
    evidence: dict

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "evidence": _jsonable(self.evidence)}


@dataclass(frozen=True)
class RegularityReport:
    distribution: Distribution
    conditions: dict

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.conditions.values())

    def __getitem__(self, key: str) -> ConditionVerdict:
        return self.conditions[key]

    def to_dict(self) -> dict:
        return {
            "distribution": self.distribution.label,
            "passed": self.passed,
            "conditions": {k: v.to_dict() for k, v in self.conditions.items()},
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


_PROBES = (-2.0, -0.5, 0.0, 0.5, 2.0)
# finite-difference steps (in sigma units) compared for boundedness
_FD_STEPS = (1e-2, 1e-3)


def _one_sided_derivs(phi, x0: float, h: float, side: float):
    """Forward (side=+1) or backward (side=-1) differences of orders 1..3."""
    f = [phi(x0 + side * j * h) for j in range(4)]
    d1 = side * (f[1] - f[0]) / h
    d2 = (f[2] - 2 * f[1] + f[0]) / h ** 2
    d3 = side * (f[3] - 3 * f[2] + 3 * f[1] - f[0]) / h ** 3
    return np.array([d1, d2, d3])


def _check_differentiability(d: Distribution) -> ConditionVerdict:
    evidence = {}
    ok = True
    sig = d.sigma
    for z in _PROBES:
        x = d.theta + sig * z
        point = {}
        # location: one-sided differences, x == theta is the only kink candidate
        phi_t = lambda t: float(logpdf(d.with_params(theta=t), x))  # noqa: E731
        sides = {}
        for side in (1.0, -1.0):
            ds = [_one_sided_derivs(phi_t, d.theta, h * sig, side) for h in _FD_STEPS]
            bounded = bool(np.all(np.isfinite(ds[1]))
                           and np.all(np.abs(ds[1]) <= 2.0 * np.abs(ds[0]) + 1.0))
            sides[side] = (ds, bounded)
        mism = [abs(sides[1.0][0][i][0] - sides[-1.0][0][i][0]) for i in range(2)]
        continuous = bool(mism[1] < 1e-6 or mism[1] <= 0.5 * mism[0])
        point["theta_bounded"] = sides[1.0][1] and sides[-1.0][1]
        point["theta_first_derivative_continuous"] = continuous
        point["theta_max_abs_derivative"] = float(max(
            np.max(np.abs(sides[s][0][1])) for s in sides))
        # scale and skewness: central differences
        for name, base in (("sigma", sig), ("eps", d.eps)):
            def phi(v, name=name):
                return float(logpdf(d.with_params(**{name: v}), x))
            h = 1e-3 * (sig if name == "sigma" else 1.0)
            f = [phi(base + j * h) for j in (-2, -1, 0, 1, 2)]
            d1 = (f[3] - f[1]) / (2 * h)
            d2 = (f[3] - 2 * f[2] + f[1]) / h ** 2
            d3 = (f[4] - 2 * f[3] + 2 * f[1] - f[0]) / (2 * h ** 3)
            vals = np.array([d1, d2, d3])
            point[f"{name}_finite"] = bool(np.all(np.isfinite(vals)))
            point[f"{name}_max_abs_derivative"] = float(np.max(np.abs(vals)))
        good = (point["theta_bounded"] and point["theta_first_derivative_continuous"]
                and point["sigma_finite"] and point["eps_finite"])
        point["passed"] = bool(good)
        ok = ok and good
        evidence[f"z={z:+g}"] = point
    return ConditionVerdict("iv", ok, evidence)


def _check_zero_mean_score(d: Distribution) -> ConditionVerdict:
    try:
        mean = expect(d, lambda x: _derivatives.gradient(d, x))
    except IntegrationError as exc:
        return ConditionVerdict("v", False, {"error": str(exc)})
    mean = mean * np.array([d.sigma, d.sigma, 1.0])
    return ConditionVerdict("v", bool(np.all(np.abs(mean) < 1e-6)),
                            {"mean_standardized_score": mean.tolist()})


def _check_det(d: Distribution) -> ConditionVerdict:
    try:
        info = fisher_info(d, 1)
    except (IntegrationError, ConditioningError, RegularityDomainError) as exc:
        return ConditionVerdict("vi", False, {"error": str(exc)})
    det = info.det
    return ConditionVerdict("vi", bool(math.isfinite(det) and det > 0), {"det_per_observation": det})


def _check_moments(d: Distribution, max_order: int = 4) -> ConditionVerdict:
    moments = {}
    for r in range(1, max_order + 1):
        try:
            moments[r] = central_moment(d, r, absolute=True)
        except MomentError:
            moments[r] = math.inf
    ok = all(math.isfinite(v) for v in moments.values())
    return ConditionVerdict("vii", ok, {"absolute_moments": moments})


def regularity_check(d: Distribution) -> RegularityReport:
    """Verdicts for regularity conditions (iv)-(vii) at ``d``'s parameters.

    (iv)
        Finite-difference log-density derivatives of orders 1-3 at five probe
        points stay bounded as the step shrinks tenfold, and the location
        derivative is continuous (one-sided differences agree).
    (v)
        The score has mean zero under ``d`` (each standardized component
        within 1e-6).
    (vi)
        The information determinant is finite and positive.
    (vii)
        ``E|X - theta|**r`` is finite for ``r <= 4``.

    Failures are reported as verdicts, never raised.
    """
    conds = {
        "iv": _check_differentiability(d),
        "v": _check_zero_mean_score(d),
        "vi": _check_det(d),
        "vii": _check_moments(d),
    }
    return RegularityReport(d, conds)


# --------------------------------------------------------------------------
# Cramer-Rao reporting


def format_matrix(mat, upper: bool = True, digits: int = 15) -> str:
    """Aligned text rendering of a 3x3 matrix; ``upper`` blanks the lower triangle.

    Entries below ``1e-12`` times the largest magnitude are quadrature
    round-off and print as ``0``.
    """
    mat = np.asarray(mat, dtype=float)
    mat = np.where(np.abs(mat) <= 1e-12 * np.max(np.abs(mat)), 0.0, mat)
    cells = []
    for i in range(3):
        row = []
        for j in range(3):
            if upper and j < i:
                row.append("")
            elif mat[i, j] == 0.0:
                row.append("0")
            else:
                row.append(f"{mat[i, j]:.{digits}f}")
        cells.append(row)
    width = max(len(c) for row in cells for c in row)
    return "\n".join("  ".join(c.rjust(width) for c in row).rstrip() for row in cells)


@dataclass(frozen=True)
class CramerRao:
    """Inverse Fisher information at fitted parameters."""

    distribution: Distribution
    n: int
    cov: np.ndarray = field(repr=False)
    regular: bool
    skew: str = "parameter"

    LABELS = (
        ("Var(theta)", "Cov(theta,sigma)", "Cov(theta,eps)"),
        ("", "Var(sigma)", "Cov(sigma,eps)"),
        ("", "", "Var(eps)"),
    )

    def to_text(self, upper: bool = True) -> str:
        head = [f"Cov(tau) for {self.distribution.label}, n={self.n}"]
        if not self.regular:
            head.append("note: classical regularity fails; score outer-product information used")
        return "\n".join(head + [format_matrix(self.cov, upper=upper)])

    def to_dict(self) -> dict:
        return {
            "distribution": self.distribution.label,
            "n": self.n,
            "params": list(PARAM_NAMES),
            "skew": self.skew,
            "regular": self.regular,
            "cov": self.cov.tolist(),
            "upper": {self.LABELS[i][j]: float(self.cov[i, j])
                      for i in range(3) for j in range(i, 3)},
        }


def cramer_rao_report(fit, *, skew: str = "parameter") -> CramerRao:
    """Cramer-Rao bound matrix at the estimates of a fit.

    ``fit`` is a :class:`~skewpower.estimation.FitResult`.  Parameters frozen
    in the fit are treated as known and get zero rows and columns.  The default
    ``skew="parameter"`` reports the covariance of ``(theta_hat, sigma_hat,
    eps_hat)`` themselves; pass ``skew="score"`` for the reference sign
    convention.
    """
    d = fit.distribution
    info = fisher_info(d, fit.n, skew=skew)
    regular = not (d.family is Family.ESEP and d.alpha <= 1.0)
    free = [i for i, name in enumerate(PARAM_NAMES) if name not in fit.freeze]
    if len(free) == 3:
        return CramerRao(d, fit.n, info.acov, regular, skew)
    # frozen parameters are known: invert the information of the free block only
    cov = np.zeros((3, 3))
    if free:
        block = InfoMatrices.from_fisher(info.fisher[np.ix_(free, free)], fit.n).acov
        cov[np.ix_(free, free)] = block
    return CramerRao(d, fit.n, cov, regular, skew)


def variance_table(family: str = "esn", eps_values=(-0.2, -0.5, -0.8),
                   ns=(30, 50, 100, 150), *, alpha: float = 2.0, nu: float = 3.0) -> list[dict]:
    """Rows of asymptotic variances, one row per (eps, parameter).

    ``family="esn"``/``"esep"`` uses the closed forms in the sigma coordinate;
    ``family="est"`` uses numeric information in the variance coordinate, so
    its second row is the variance of ``sigma_hat**2``.
    """
    fam = family.lower()
    rows = []
    for e in eps_values:
        if fam in ("esn", "esep"):
            a = 2.0 if fam == "esn" else alpha
            d = esep(0.0, 1.0, e, a)
            diag = np.diag(asymptotic_cov_esep(d, 1))
            scale_name = "sigma"
        elif fam == "est":
            d = est(0.0, 1.0, e, nu)
            diag = np.diag(fisher_info_est(d, 1, scale="variance").acov)
            scale_name = "sigma2"
        else:
            raise ParameterError(f"unsupported family for variance table: {family!r}")
        for name, v in zip(("theta", scale_name, "eps"), diag):
            rows.append({"eps": e, "param": name, **{f"n={n}": v / n for n in ns}})
    return rows
