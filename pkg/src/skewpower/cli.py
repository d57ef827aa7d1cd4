"""
Command-line front end.

Subcommands: ``fit``, ``sample``, ``simulate``, ``diagnose``, ``gof`` and
``asymptotics``.  Exit status is 0 on success, 1 for bad input and 2 for
numerical or convergence failures.  When ``--seed`` is omitted the
``SKEWPOWER_SEED`` environment variable is used, then :data:`DEFAULT_SEED`.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from importlib import resources

import numpy as np

from . import __version__
from .asymptotics import (
    asymptotic_cov_esep,
    cramer_rao_report,
    est_det_closed_form,
    fisher_info,
    format_matrix,
    variance_table,
)
from .distributions import Family, make_distribution, sample
from .estimation import FitConfig, fit
from .exceptions import (
    ConditioningError,
    DegenerateDataError,
    InputError,
    IntegrationError,
    ParameterError,
)
from .gof import cdf_overlay_table, gof_report, overlay_csv
from .robustness import sensitivity_report
from .simulation import SimPlan, run_plan, summaries_to_csv, summaries_to_json

DEFAULT_SEED = 20240101
SEED_ENV = "SKEWPOWER_SEED"
FIXTURE = "esl_fixture.csv"

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2


class NumericFailure(Exception):
    """Raised inside a command to request exit status 2."""


# --------------------------------------------------------------------------
# helpers


def resolve_seed(seed) -> int:
    if seed is not None:
        return int(seed)
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise InputError(f"{SEED_ENV} must be an integer, got {env!r}") from exc
    return DEFAULT_SEED


def fixture_path():
    return resources.files("skewpower") / "data" / FIXTURE


def parse_column(text: str, source: str = "<input>") -> np.ndarray:
    """First CSV column as floats; a non-numeric first row is treated as a header."""
    values = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or not row[0].strip():
            continue
        token = row[0].strip()
        try:
            v = float(token)
        except ValueError:
            if lineno == 1 and not values:
                continue
            raise InputError(f"{source}: line {lineno}: not a number: {token!r}") from None
        if not math.isfinite(v):
            raise InputError(f"{source}: line {lineno}: non-finite value {token!r}")
        values.append(v)
    if not values:
        raise InputError(f"{source}: no numeric data")
    return np.array(values)


def read_data(args) -> np.ndarray:
    if getattr(args, "data", None):
        return parse_column("\n".join(args.data.split(",")), "--data")
    if getattr(args, "fixture", False):
        return parse_column(fixture_path().read_text(), FIXTURE)
    path = getattr(args, "input", None)
    if path is None:
        raise InputError("no input: give a CSV path, '-' for stdin, --data or --fixture")
    if path == "-":
        return parse_column(sys.stdin.read(), "<stdin>")
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_column(text, path)


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _add_family(p, with_location=True):
    p.add_argument("--family", default="esn", help="esep, esn, esl, esgt or est (default esn)")
    p.add_argument("--alpha", type=float, help="ESEP/ESGT peakedness")
    p.add_argument("--q", type=float, help="ESGT tail parameter")
    p.add_argument("--nu", type=float, help="ESt degrees of freedom")
    if with_location:
        p.add_argument("--theta", type=float, default=None)
        p.add_argument("--sigma", type=float, default=None)
        p.add_argument("--eps", type=float, default=None)


def _distribution(args, theta=0.0, sigma=1.0, eps=0.0):
    th = theta if getattr(args, "theta", None) is None else args.theta
    sg = sigma if getattr(args, "sigma", None) is None else args.sigma
    ep = eps if getattr(args, "eps", None) is None else args.eps
    return make_distribution(args.family, th, sg, ep, alpha=args.alpha, q=args.q, nu=args.nu)


def _add_input(p):
    p.add_argument("input", nargs="?", help="CSV file (first column used) or '-' for stdin")
    p.add_argument("--data", help="inline comma-separated data instead of a file")
    p.add_argument("--fixture", action="store_true", help="use the bundled synthetic ESL sample")


def _add_format(p, choices=("text", "json")):
    p.add_argument("--format", choices=choices, default=choices[0])


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)


# --------------------------------------------------------------------------
# commands


def cmd_fit(args, out) -> int:
    x = read_data(args)
    freeze = {name for name in ("theta", "sigma", "eps") if getattr(args, f"freeze_{name}")}
    init = tuple(args.init) if args.init else None
    config = FitConfig(tol=args.tol, max_iter=args.max_iter, init=init, freeze=frozenset(freeze))
    tmpl = make_distribution(args.family, alpha=args.alpha, q=args.q, nu=args.nu)
    res = fit(x, tmpl, config=config)
    crlb = cramer_rao_report(res) if args.crlb else None
    if args.format == "json":
        payload = res.to_dict()
        if crlb is not None:
            payload["crlb"] = crlb.to_dict()
        out.write(_dumps(payload) + "\n")
    else:
        d = res.distribution
        lines = [
            f"model       {d.label}",
            f"n           {res.n}",
            f"theta       {res.theta:.10g}",
            f"sigma       {res.sigma:.10g}",
            f"sigma^2     {res.sigma ** 2:.10g}",
            f"eps         {res.eps:.10g}",
            f"loglik      {res.loglik:.10g}",
            f"iterations  {res.iterations}",
            f"converged   {str(res.converged).lower()}",
        ]
        if crlb is not None:
            lines += ["", crlb.to_text()]
        out.write("\n".join(lines) + "\n")
    if not res.converged:
        raise NumericFailure(f"IRA did not converge in {res.iterations} iterations")
    return EXIT_OK


def cmd_sample(args, out) -> int:
    d = _distribution(args)
    seed = resolve_seed(args.seed)
    batch = sample(d, args.n, seed)
    text = "x\n" + "".join(f"{v!r}\n" for v in batch.values.tolist())
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    reps = min(args.reps, 50) if args.quick else args.reps
    plan = SimPlan(args.case, tuple(args.eps), tuple(args.n), reps, resolve_seed(args.seed),
                   n_jobs=args.jobs)
    summaries = run_plan(plan)
    out.write(summaries_to_json(summaries) + "\n" if args.format == "json"
              else summaries_to_csv(summaries))
    return EXIT_OK


def cmd_diagnose(args, out) -> int:
    d = _distribution(args)
    rep = sensitivity_report(d)
    out.write((rep.to_json() if args.format == "json" else rep.to_text()) + "\n")
    return EXIT_OK


def cmd_gof(args, out) -> int:
    x = read_data(args)
    given = [getattr(args, k) for k in ("theta", "sigma", "eps")]
    if all(v is not None for v in given):
        d = _distribution(args)
    elif any(v is not None for v in given):
        raise InputError("give all of --theta, --sigma, --eps or none (then the model is fitted)")
    else:
        res = fit(x, make_distribution(args.family, alpha=args.alpha, q=args.q, nu=args.nu))
        if not res.converged:
            raise NumericFailure("IRA did not converge")
        d = res.distribution
    rep = gof_report(x, d, k_free=args.k_free)
    if args.overlay:
        header, rows = cdf_overlay_table(x, [d])
        with open(args.overlay, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(overlay_csv(header, rows))
    if args.format == "json":
        payload = rep.to_dict()
        payload.update(theta=d.theta, sigma=d.sigma, eps=d.eps)
        out.write(_dumps(payload) + "\n")
    else:
        out.write("\n".join([
            f"model   {d.label}  theta={d.theta:.6g} sigma={d.sigma:.6g} eps={d.eps:.6g}",
            f"n       {rep.n}",
            f"ks      {rep.ks_stat:.6f}",
            f"pvalue  {rep.ks_pvalue:.6f}",
            f"loglik  {rep.loglik:.6f}",
            f"aic     {rep.aic:.6f}",
            f"bic     {rep.bic:.6f}",
        ]) + "\n")
    return EXIT_OK


def _table_text(rows, key) -> str:
    ns = [k for k in rows[0] if k.startswith("n=")]
    lines = [f"{'eps':>6}  {key:<10}" + "".join(f"{n:>12}" for n in ns)]
    for r in rows:
        lines.append(f"{r['eps']:>6g}  {r['param']:<10}" + "".join(f"{r[n]:>12.6f}" for n in ns))
    return "\n".join(lines)


def cmd_asymptotics(args, out) -> int:
    if args.table1 or args.table2:
        rows = variance_table("esn") if args.table1 else variance_table("est", nu=3.0)
        if args.format == "json":
            out.write(_dumps(rows) + "\n")
        else:
            out.write(_table_text(rows, "Var/n") + "\n")
        return EXIT_OK
    d = _distribution(args)
    if d.family is Family.ESEP and d.alpha > 1.0:
        cov = asymptotic_cov_esep(d, args.n)
        info = fisher_info(d, args.n)
    else:
        info = fisher_info(d, args.n, scale=args.scale)
        cov = info.acov
    payload = {
        "distribution": d.label,
        "theta": d.theta, "sigma": d.sigma, "eps": d.eps, "n": args.n,
        "var_theta": cov[0, 0], "var_sigma": cov[1, 1], "var_eps": cov[2, 2],
        "cov": cov.tolist(), "fisher": info.fisher.tolist(), "det": info.det,
    }
    if d.family is Family.EST:
        payload["det_closed_form_variance_scale"] = est_det_closed_form(d.nu, d.sigma, d.eps, args.n)
    if args.format == "json":
        out.write(_dumps(payload) + "\n")
    else:
        sig_name = "Var(sigma^2)" if (d.family is not Family.ESEP and args.scale == "variance") else "Var(sigma)"
        out.write("\n".join([
            f"{d.label}  theta={d.theta:g} sigma={d.sigma:g} eps={d.eps:g}  n={args.n}",
            f"Var(theta)  {cov[0, 0]:.6f}",
            f"{sig_name:<11} {cov[1, 1]:.6f}",
            f"Var(eps)    {cov[2, 2]:.6f}",
            f"det(I)      {info.det:.7g}",
            "",
            format_matrix(cov),
        ]) + "\n")
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    """Argument errors are input errors: exit code 1 rather than argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="skewpower", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="estimate theta, sigma, eps by IRA")
    _add_input(p)
    _add_family(p, with_location=False)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--init", type=float, nargs=3, metavar=("THETA", "SIGMA", "EPS"))
    for name in ("theta", "sigma", "eps"):
        p.add_argument(f"--freeze-{name}", action="store_true",
                       help=f"hold {name} at its initial value")
    p.add_argument("--crlb", action="store_true", help="append the Cramer-Rao covariance matrix")
    _add_format(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sample", help="draw a random sample as a CSV column")
    _add_family(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--output", "-o", help="write to this file instead of stdout")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("simulate", help="Monte Carlo recovery table")
    p.add_argument("--case", default="esn", help="esn, esl or est3")
    p.add_argument("--eps", type=_float_list, default=[-0.2])
    p.add_argument("--n", type=_int_list, default=[30, 50, 100, 150])
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--seed", type=int)
    p.add_argument("--quick", action="store_true", help="cap replications at 50")
    p.add_argument("--jobs", type=int, default=1)
    _add_format(p, ("csv", "json"))
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("diagnose", help="robustness report")
    _add_family(p)
    _add_format(p)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("gof", help="KS test, AIC and BIC")
    _add_input(p)
    _add_family(p)
    p.add_argument("--k-free", type=int, default=3)
    p.add_argument("--overlay", help="write the empirical/fitted CDF table to this CSV")
    _add_format(p)
    p.set_defaults(func=cmd_gof)

    p = sub.add_parser("asymptotics", help="asymptotic covariance and variance tables")
    _add_family(p)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--scale", choices=("sigma", "variance"), default="sigma")
    p.add_argument("--table1", action="store_true", help="ESN variance table")
    p.add_argument("--table2", action="store_true", help="ESt (nu=3) variance table")
    _add_format(p)
    p.set_defaults(func=cmd_asymptotics)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except (InputError, ParameterError, DegenerateDataError) as exc:
        print(f"skewpower: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericFailure, IntegrationError, ConditioningError, FloatingPointError) as exc:
        print(f"skewpower: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
