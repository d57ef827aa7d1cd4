"""
Monte Carlo recovery study for the IRA estimators.

Three cases are provided: ``esn`` (ESN data, ESN fit), ``esl`` (ESL) and
``est3`` (ESt with nu=3).  Data are drawn at ``theta=0, sigma=1, eps=eps0`` and
fitted with the shape held at its true value.

Every replication draws from its own Philox stream keyed by
``(seed, case, eps0, n, replication)``, so a cell's results do not depend on
execution order or on how replications are spread over worker processes.

Variance over replications is population-normalized (divide by the number of
successful fits), which makes ``MSE = Var + bias**2`` an exact identity.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

from .asymptotics import asymptotic_cov_esep, fisher_info
from .distributions import Distribution, esl, esn, est, sample
from .estimation import FitConfig, fit
from .exceptions import DegenerateDataError, ParameterError

__all__ = ["CASES", "SimPlan", "SimSummary", "replication_rng", "run_cell", "run_plan",
           "summaries_to_csv", "summaries_to_json"]

PARAM_NAMES = ("theta", "sigma", "eps")
CASES = {
    "esn": (0, lambda e: esn(0.0, 1.0, e)),
    "esl": (1, lambda e: esl(0.0, 1.0, e)),
    "est3": (2, lambda e: est(0.0, 1.0, e, 3.0)),
}
DEGRADED_FRACTION = 0.10


def _case_key(case: str) -> str:
    key = str(case).lower().replace("-", "")
    if key == "est":
        key = "est3"
    if key not in CASES:
        raise ParameterError(f"unknown simulation case {case!r}; choose from {sorted(CASES)}")
    return key


@dataclass(frozen=True)
class SimPlan:
    """A grid of simulation cells for one case.

    ``eps0`` may be a single value or a sequence; every ``(eps0, n)`` pair is
    one cell.
    """

    case: str
    eps0: tuple = (-0.2,)
    n_list: tuple = (30, 50, 100, 150)
    reps: int = 1000
    seed: int = 20240101
    fit_config: FitConfig = field(default_factory=FitConfig)
    n_jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "case", _case_key(self.case))
        eps = self.eps0
        eps = (float(eps),) if np.ndim(eps) == 0 else tuple(float(e) for e in eps)
        if not eps or any(not -1.0 < e < 1.0 for e in eps):
            raise ParameterError("every eps0 must lie in (-1, 1)")
        object.__setattr__(self, "eps0", eps)
        ns = tuple(int(n) for n in np.atleast_1d(self.n_list))
        if not ns or any(n < 5 for n in ns):
            raise ParameterError("sample sizes must be at least 5")
        object.__setattr__(self, "n_list", ns)
        if int(self.reps) != self.reps or self.reps < 1:
            raise ParameterError("reps must be a positive integer")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise ParameterError("seed must be an integer in [0, 2**64)")
        if int(self.n_jobs) != self.n_jobs or self.n_jobs < 1:
            raise ParameterError("n_jobs must be a positive integer")

    def truth(self, eps0: float) -> Distribution:
        return CASES[self.case][1](eps0)


@dataclass
class SimSummary:
    case: str
    eps0: float
    n: int
    reps: int
    seed: int
    failures: int
    mean: dict
    var: dict
    mse: dict
    asym_var: dict = field(default_factory=dict)

    @property
    def degraded(self) -> bool:
        return self.failures > DEGRADED_FRACTION * self.reps

    @property
    def truth(self) -> dict:
        return {"theta": 0.0, "sigma": 1.0, "eps": self.eps0}

    @property
    def ratio(self) -> dict:
        """Simulated MSE over asymptotic variance, where the latter is available."""
        return {k: self.mse[k] / v for k, v in self.asym_var.items() if v > 0}

    def to_dict(self) -> dict:
        return {
            "case": self.case, "eps0": self.eps0, "n": self.n, "reps": self.reps,
            "seed": self.seed, "failures": self.failures, "degraded": self.degraded,
            "truth": self.truth, "mean": self.mean, "var": self.var, "mse": self.mse,
            "asym_var": self.asym_var, "ratio": self.ratio,
        }


def _eps_key(eps0: float) -> int:
    return int(round((eps0 + 1.0) * 1e9))


def replication_rng(seed: int, case: str, eps0: float, n: int, rep: int) -> Generator:
    """Independent generator for one replication of one cell."""
    key = (CASES[_case_key(case)][0], _eps_key(eps0), int(n), int(rep))
    return Generator(Philox(SeedSequence(int(seed), spawn_key=key)))


def _fit_family(case: str):
    return {"esn": ("esn", {}), "esl": ("esl", {}), "est3": ("est", {"nu": 3.0})}[case]


def _run_reps(args):
    case, eps0, n, seed, config, reps = args
    truth = CASES[case][1](eps0)
    family, shape = _fit_family(case)
    out = np.full((len(reps), 3), np.nan)
    for row, rep in enumerate(reps):
        x = sample(truth, n, replication_rng(seed, case, eps0, n, rep)).values
        try:
            res = fit(x, family, config=config, **shape)
        except DegenerateDataError:
            continue
        if res.converged:
            out[row] = res.estimates
    return out


def _asymptotic_variances(plan: SimPlan, eps0: float, n: int) -> dict:
    truth = plan.truth(eps0)
    try:
        if plan.case == "esn":
            cov = asymptotic_cov_esep(truth, n)
        else:
            cov = fisher_info(truth, n).acov
    except Exception:  # information unavailable; the comparison is optional
        return {}
    return {k: float(cov[i, i]) for i, k in enumerate(PARAM_NAMES)}


def run_cell(plan: SimPlan, n: int, eps0: float | None = None) -> SimSummary:
    """Simulate one ``(eps0, n)`` cell; ``eps0`` defaults to the plan's first value."""
    eps0 = plan.eps0[0] if eps0 is None else float(eps0)
    reps = np.arange(plan.reps)
    if plan.n_jobs > 1:
        chunks = [c for c in np.array_split(reps, plan.n_jobs * 4) if c.size]
        args = [(plan.case, eps0, n, plan.seed, plan.fit_config, c.tolist()) for c in chunks]
        with ProcessPoolExecutor(max_workers=plan.n_jobs) as pool:
            est_ = np.vstack(list(pool.map(_run_reps, args)))
    else:
        est_ = _run_reps((plan.case, eps0, n, plan.seed, plan.fit_config, reps.tolist()))
    ok = np.all(np.isfinite(est_), axis=1)
    good = est_[ok]
    failures = int(plan.reps - good.shape[0])
    truth = np.array([0.0, 1.0, eps0])
    if good.shape[0]:
        mean = good.mean(axis=0)
        var = good.var(axis=0)
        mse = np.mean((good - truth) ** 2, axis=0)
    else:
        mean = var = mse = np.full(3, np.nan)
    return SimSummary(
        case=plan.case, eps0=eps0, n=int(n), reps=plan.reps, seed=plan.seed,
        failures=failures,
        mean={k: float(v) for k, v in zip(PARAM_NAMES, mean)},
        var={k: float(v) for k, v in zip(PARAM_NAMES, var)},
        mse={k: float(v) for k, v in zip(PARAM_NAMES, mse)},
        asym_var=_asymptotic_variances(plan, eps0, n),
    )


def run_plan(plan: SimPlan) -> list[SimSummary]:
    """One summary per ``(eps0, n)`` cell, in plan order."""
    return [run_cell(plan, n, e) for e in plan.eps0 for n in plan.n_list]


def summaries_to_csv(summaries) -> str:
    """Wide table: one row per (case, eps0, parameter), mean/var/mse (and ratio) per n."""
    summaries = list(summaries)
    ns = sorted({s.n for s in summaries})
    header = ["case", "eps0", "param", "tau"]
    for n in ns:
        header += [f"mean_n{n}", f"var_n{n}", f"mse_n{n}", f"ratio_n{n}"]
    header.append("failures")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    groups = {}
    for s in summaries:
        groups.setdefault((s.case, s.eps0), {})[s.n] = s
    for (case, eps0), cells in groups.items():
        fails = ";".join(f"n{n}:{cells[n].failures}" for n in ns if n in cells)
        for k in PARAM_NAMES:
            tau = {"theta": 0.0, "sigma": 1.0, "eps": eps0}[k]
            row = [case, f"{eps0:g}", k, f"{tau:g}"]
            for n in ns:
                c = cells.get(n)
                if c is None:
                    row += ["", "", "", ""]
                    continue
                r = c.ratio.get(k)
                row += [f"{c.mean[k]:.6f}", f"{c.var[k]:.6f}", f"{c.mse[k]:.6f}",
                        "" if r is None or not math.isfinite(r) else f"{r:.4f}"]
            row.append(fails)
            w.writerow(row)
    return buf.getvalue()


def summaries_to_json(summaries, indent: int = 2) -> str:
    return json.dumps([s.to_dict() for s in summaries], indent=indent)
