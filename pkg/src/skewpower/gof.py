"""
Goodness of fit: Kolmogorov-Smirnov statistic and p-value, AIC/BIC, and an
empirical-vs-fitted CDF table for external plotting.

The KS p-value is the asymptotic Kolmogorov tail probability at
``sqrt(n) * stat``.  Parameters estimated from the same data make it
conservative; no correction is applied.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import special

from .distributions import Distribution, _as_data, cdf, log_likelihood
from .exceptions import InputError, ParameterError

__all__ = [
    "GofReport",
    "ks_statistic",
    "ks_pvalue",
    "ks_test",
    "information_criteria",
    "gof_report",
    "cdf_overlay_table",
    "overlay_csv",
]


def ks_statistic(data, d: Distribution) -> float:
    """``max_i max(i/n - F(x_(i)), F(x_(i)) - (i-1)/n)`` over the sorted sample."""
    x = np.sort(_as_data(data))
    n = x.size
    f = np.asarray(cdf(d, x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def ks_pvalue(stat: float, n: int) -> float:
    """Asymptotic Kolmogorov p-value ``P(K > sqrt(n)*stat)``."""
    if not 0.0 <= stat <= 1.0:
        raise ParameterError(f"KS statistic must lie in [0, 1], got {stat}")
    if n < 1:
        raise ParameterError("n must be positive")
    return float(special.kolmogorov(math.sqrt(n) * stat))


def ks_test(data, d: Distribution) -> tuple[float, float]:
    """KS statistic against ``d`` and its asymptotic p-value."""
    x = _as_data(data)
    stat = ks_statistic(x, d)
    return stat, ks_pvalue(stat, x.size)


def information_criteria(loglik: float, n: int, k_free: int) -> tuple[float, float]:
    """``(aic, bic)`` with ``aic = 2k - 2 loglik`` and ``bic = k ln(n) - 2 loglik``."""
    if n < 1 or k_free < 1:
        raise ParameterError("n and k_free must be at least 1")
    return 2.0 * k_free - 2.0 * loglik, k_free * math.log(n) - 2.0 * loglik


@dataclass(frozen=True)
class GofReport:
    ks_stat: float
    ks_pvalue: float
    aic: float
    bic: float
    loglik: float
    n: int
    k_free: int
    model: str = ""

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def gof_report(data, d: Distribution, k_free: int = 3) -> GofReport:
    """KS, AIC and BIC of ``d`` on ``data``.

    ``k_free`` is the number of parameters estimated from the data; shape
    parameters held fixed do not count.
    """
    x = _as_data(data)
    stat, p = ks_test(x, d)
    ll = log_likelihood(d, x)
    aic, bic = information_criteria(ll, x.size, k_free)
    return GofReport(stat, p, aic, bic, ll, int(x.size), int(k_free), d.label)


def cdf_overlay_table(data, fits, names=None, steps: bool = True) -> tuple[list, np.ndarray]:
    """Empirical and fitted CDFs at the sorted sample.

    Parameters
    ----------
    data : array-like
    fits : sequence of Distribution
    names : sequence of str, optional
        Column names for the fitted CDFs; defaults to the distribution labels
        (deduplicated with a numeric suffix).
    steps : bool
        With ``steps=True`` every observation contributes two rows, the
        empirical CDF just before and at the jump, so the largest column gap
        equals the KS statistic.  Otherwise one row per observation with
        ``F_emp = i/n``.

    Returns
    -------
    header, rows
        ``header = ["x", "f_emp", name1, ...]`` and a float array with one
        column per header entry.
    """
    x = np.sort(_as_data(data))
    fits = list(fits)
    if names is None:
        names, seen = [], {}
        for d in fits:
            base = d.label
            seen[base] = seen.get(base, 0) + 1
            names.append(base if seen[base] == 1 else f"{base}_{seen[base]}")
    if len(names) != len(fits):
        raise InputError("need one name per fitted distribution")
    n = x.size
    i = np.arange(1, n + 1)
    if steps:
        xs = np.repeat(x, 2)
        femp = np.empty(2 * n)
        femp[0::2] = (i - 1) / n
        femp[1::2] = i / n
    else:
        xs, femp = x, i / n
    cols = [xs, femp] + [np.asarray(cdf(d, xs), dtype=float) for d in fits]
    return ["x", "f_emp", *names], np.column_stack(cols)


def overlay_csv(header, rows) -> str:
    """Render an overlay table as CSV text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) for v in r])
    return buf.getvalue()
