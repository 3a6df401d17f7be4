"""Command-line front end: ``cmcrates <command> [flags]``.

Exit codes: 0 success or pass, 1 verification failure, 2 usage or domain
error, 3 budget refusal.  Output is a JSON list (or CSV table) of records,
each carrying ``schema_version``, ``command``, ``params`` and ``seed``.
Floats are written in shortest round-trip form, and no timestamps or host
details are included, so identical inputs give byte-identical output.
"""

import argparse
import csv
import io
import json
import math
import os
import re
import sys

import numpy as np

from . import __version__
from .constants import b_limit, c_limit
from .distributions import get_distribution
from .errors import BudgetExceededError, DomainError, InsufficientDataError, UnsupportedError
from .gaussian import DEFAULT_TOL, lambda1_gaussian, lambda2_gaussian
from .montecarlo import MCConfig, lambda1_mc, lambda2_mc
from .rates import EpsGrid, GaussianExact, MonteCarloEvaluator, verify_theorem_2_2a, verify_theorem_2_2b
from .remainder import (
    gamma_exponent,
    remainder_direct_mc,
    remainder_tail_bound_lambda1,
    remainder_tail_bound_lambda2,
)
from .suite import run_suite

SCHEMA_VERSION = 1
SEED_ENV = "CMCRATES_SEED"
DEFAULT_SEED = 20240607

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3

# Options that describe where output goes rather than what is computed.
_NON_PARAMS = {"command", "func", "config", "out", "format", "seed"}


class UsageError(Exception):
    pass


def float_list(text):
    try:
        values = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("expected at least one number")
    return values


_BIAS_RE = re.compile(r"^\s*(?:([-+0-9.eE]+)\s*\*\s*)?eps\s*\^\s*([-+0-9.eE]+)\s*$")


def parse_bias(text):
    """``"eps^a"`` or ``"K*eps^a"`` to a callable ``eps -> K eps^a``."""
    m = _BIAS_RE.match(text)
    if not m:
        raise argparse.ArgumentTypeError(f"bias must look like 'eps^0.1' or '2*eps^0.5', got {text!r}")
    k = float(m.group(1)) if m.group(1) else 1.0
    a = float(m.group(2))
    return lambda e: k * e**a


# -- config files -----------------------------------------------------------


def load_config(path):
    """Flat ``key=value`` file; ``#`` starts a comment.  Keys use option names
    with dashes or underscores."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def dump_config(params):
    """Inverse of :func:`load_config` for a ``params`` record."""
    lines = []
    for key in sorted(params):
        value = params[key]
        if value is None:
            continue
        if isinstance(value, (list, tuple)):
            value = ",".join(_fmt(v) for v in value)
        elif isinstance(value, bool):
            value = "true" if value else "false"
        else:
            value = _fmt(value)
        lines.append(f"{key}={value}")
    return "\n".join(lines) + "\n"


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


# -- output -------------------------------------------------------------------


def _clean(value):
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def _record(command, params, seed, **fields):
    rec = {"schema_version": SCHEMA_VERSION, "command": command, "params": params, "seed": seed}
    rec.update(fields)
    return _clean(rec)


def render(records, fmt):
    if fmt == "json":
        return json.dumps(records, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    keys = []
    for rec in records:
        for k in rec:
            if k not in keys:
                keys.append(k)
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(keys)
    for rec in records:
        row = []
        for k in keys:
            v = rec.get(k, "")
            if isinstance(v, (dict, list)):
                v = json.dumps(v, sort_keys=True, separators=(",", ":"))
            elif isinstance(v, float):
                v = repr(v)
            elif v is None:
                v = ""
            row.append(v)
        writer.writerow(row)
    return buf.getvalue()


def _emit(args, records):
    text = render(records, args.format)
    if args.out and args.out != "-":
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _params(args):
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in _NON_PARAMS or callable(v):
            continue
        out[k] = v
    return out


def _mc_config(args):
    return MCConfig(replications=args.reps, seed=args.seed, n_max=args.n_max, workers=max(1, args.threads))


# -- commands -----------------------------------------------------------------


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


def cmd_lambda(args, which):
    param = "p" if which == "lambda1" else "delta"
    _require(args, "eps", param)
    value_of = getattr(args, param)
    records = []
    if args.mode == "exact":
        if get_distribution(args.dist).kind != "standard_normal":
            raise UsageError("--mode exact is only available for --dist normal")
        fn = lambda1_gaussian if which == "lambda1" else lambda2_gaussian
        for eps in args.eps:
            sv = fn(eps, value_of, sigma=args.sigma, tol=args.tol)
            records.append(
                _record(
                    which,
                    _params(args),
                    args.seed,
                    eps=eps,
                    value=sv.value,
                    stderr_or_tailbound=sv.tail_bound,
                    mode="exact",
                    n_terms=sv.n_terms,
                )
            )
    else:
        dist = get_distribution(args.dist, scale=args.sigma)
        cfg = _mc_config(args)
        fn = lambda1_mc if which == "lambda1" else lambda2_mc
        for eps in args.eps:
            est = fn(dist, value_of, eps, cfg)
            records.append(
                _record(
                    which,
                    _params(args),
                    args.seed,
                    eps=eps,
                    value=est.completed,
                    stderr_or_tailbound=est.stderr,
                    mode="mc",
                    truncated_mean=est.mean,
                    truncation_bias=est.truncation_bias,
                    replications=est.replications,
                )
            )
    _emit(args, records)
    return EXIT_OK


def cmd_constants(args):
    if (args.theta is None) == (args.delta is None):
        raise UsageError("give exactly one of --theta or --delta")
    if args.theta is not None:
        est, kind, par = b_limit(args.theta, tol=args.tol), "B_theta", args.theta
    else:
        est, kind, par = c_limit(args.delta, tol=args.tol), "C_delta", args.delta
    rec = _record(
        "constants",
        _params(args),
        args.seed,
        constant=kind,
        parameter=par,
        value=est.value,
        error_bound=est.error_bound,
        n_used=est.n_used,
        method=est.method,
    )
    _emit(args, [rec])
    return EXIT_OK


def _grid(args, default):
    given = [args.grid_start, args.grid_ratio, args.grid_count]
    if all(v is None for v in given):
        return default
    if any(v is None for v in given):
        raise UsageError("--grid-start, --grid-ratio and --grid-count go together")
    return EpsGrid.geometric(args.grid_start, args.grid_ratio, args.grid_count)


def cmd_rates(args):
    if args.mode == "exact":
        evaluator = GaussianExact(tol=args.tol)
    else:
        evaluator = MonteCarloEvaluator(get_distribution(args.dist), _mc_config(args))
    bias = parse_bias(args.inject_bias) if args.inject_bias else None
    if args.theorem == "2.2a":
        _require(args, "p")
        rep = verify_theorem_2_2a(
            args.p, args.q, _grid(args, EpsGrid.default_lambda1()), evaluator, bias, workers=args.threads
        )
    else:
        _require(args, "delta")
        rep = verify_theorem_2_2b(
            args.delta, args.q, _grid(args, EpsGrid.default_lambda2()), evaluator, bias, workers=args.threads
        )
    rec = _record(
        "rates",
        _params(args),
        args.seed,
        theorem=rep.theorem,
        passed=rep.passed,
        fitted_slope=rep.fit.slope,
        intercept=rep.fit.intercept,
        r_squared=rep.fit.r_squared,
        points_used=rep.fit.points_used,
        required_slope=rep.required_slope,
        grid=list(rep.grid),
        residuals=list(rep.residuals),
        scaled_sequence=list(rep.scaled_sequence),
    )
    _emit(args, [rec])
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_remainder(args):
    records = []
    if args.dist:
        dist = get_distribution(args.dist, q=args.q)
        cfg = _mc_config(args)
        for eps in args.eps_list:
            est = remainder_direct_mc(dist, args.p, eps, args.n_max, cfg)
            records.append(
                _record(
                    "remainder",
                    _params(args),
                    args.seed,
                    variant="direct",
                    eps=eps,
                    value=est.mean,
                    stderr=est.stderr,
                    n_max=args.n_max,
                )
            )
    else:
        if args.delta is None:
            exps = gamma_exponent(args.p, args.q)
        for eps in args.eps_list:
            for M in args.M_list:
                if args.delta is None:
                    r = remainder_tail_bound_lambda1(eps, exps, M, args.Lq, args.C)
                    variant = "lambda1"
                else:
                    r = remainder_tail_bound_lambda2(eps, args.delta, args.q, M, args.Lq, args.C)
                    variant = "lambda2"
                records.append(
                    _record(
                        "remainder",
                        _params(args),
                        args.seed,
                        variant=variant,
                        eps=r.eps,
                        M=r.M,
                        threshold=r.threshold,
                        n_start=r.n_start,
                        sum_lower=r.sum_lower,
                        sum_upper=r.sum_upper,
                        raw_bound=r.raw_bound,
                        scaled_bound=r.scaled_bound,
                        envelope=r.envelope,
                        predicted_cap=r.predicted_cap,
                    )
                )
    _emit(args, records)
    return EXIT_OK


def cmd_verify_all(args):
    results = run_suite(quick=not args.full, seed=args.seed)
    records = [
        _record(
            "verify-all",
            _params(args),
            args.seed,
            check=r.name,
            passed=r.passed,
            value=r.value,
            target=r.target,
            tolerance=r.tolerance,
        )
        for r in results
    ]
    _emit(args, records)
    failed = [r.name for r in results if not r.passed]
    sys.stderr.write(f"{len(results) - len(failed)}/{len(results)} checks passed\n")
    for name in failed:
        sys.stderr.write(f"FAILED: {name}\n")
    return EXIT_FAIL if failed else EXIT_OK


# -- parser -------------------------------------------------------------------


def _default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def build_parser(seed_default=DEFAULT_SEED):
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value file supplying defaults for this command")
    common.add_argument("--seed", type=int, default=seed_default, help=f"RNG seed (default from ${SEED_ENV})")
    common.add_argument("--out", default="-", help="output path (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--threads", type=int, default=1, help="cap on worker threads")

    def mc(dist="normal", n_max=50):
        # A fresh parent per subcommand: parents share action objects, so
        # per-command defaults must not be set on a shared one.
        parent = argparse.ArgumentParser(add_help=False)
        parent.add_argument(
            "--dist", default=dist, help="summand law: normal, rademacher, uniform, exponential, two_point:a,prob"
        )
        parent.add_argument("--reps", type=int, default=100_000, help="Monte Carlo replications")
        parent.add_argument("--n-max", type=int, default=n_max, help="series truncation for Monte Carlo")
        return parent

    parser = argparse.ArgumentParser(prog="cmcrates", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for which, pname, phelp in (("lambda1", "--p", "moment order in (0, 2)"), ("lambda2", "--delta", "log exponent in (0, 1]")):
        p = sub.add_parser(which, parents=[common, mc()], help=f"evaluate {which}(eps)")
        p.add_argument("--eps", type=float_list, help="comma-separated eps values")
        p.add_argument(pname, type=float, help=phelp)
        p.add_argument("--sigma", type=float, default=1.0)
        p.add_argument("--mode", choices=("exact", "mc"), default="exact")
        p.add_argument("--tol", type=float, default=DEFAULT_TOL)
        p.set_defaults(func=lambda a, w=which: cmd_lambda(a, w))

    p = sub.add_parser("constants", parents=[common], help="limits B_theta or C_delta")
    p.add_argument("--theta", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("rates", parents=[common, mc()], help="rate verification; exit 1 on failure")
    p.add_argument("--theorem", choices=("2.2a", "2.2b"), required=False, default="2.2a", help="2.2a: lambda1 rate check; 2.2b: lambda2 rate check")
    p.add_argument("--p", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--q", type=float, default=3.0)
    p.add_argument("--grid-start", type=float)
    p.add_argument("--grid-ratio", type=float)
    p.add_argument("--grid-count", type=int)
    p.add_argument("--mode", choices=("exact", "mc"), default="exact")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--inject-bias", help="add K*eps^a to every residual, e.g. eps^0.1")
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("remainder", parents=[common, mc(None, 20)], help="remainder tail bounds or direct estimate")
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--q", type=float, default=3.0)
    p.add_argument("--delta", type=float, help="use the lambda2 variant")
    p.add_argument("--M-list", dest="M_list", type=float_list, default=[1.0, 2.0, 4.0, 8.0])
    p.add_argument("--eps-list", type=float_list, default=[0.1, 0.05, 0.01])
    p.add_argument("--C", type=float, default=1.0, help="absolute constant of the Bikjalis bound")
    p.add_argument("--Lq", type=float, default=1.0, help="E|X|^q")
    p.set_defaults(func=cmd_remainder)

    p = sub.add_parser("verify-all", parents=[common], help="run the verification suite")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--quick", action="store_true", help="fewer Monte Carlo replications (default)")
    g.add_argument("--full", action="store_true", help="10^5 Monte Carlo replications")
    p.set_defaults(func=cmd_verify_all)
    return parser, sub


def _apply_config(parser, sub, argv):
    """Re-parse with defaults from ``--config``; explicit flags still win."""
    pre, _ = parser.parse_known_args(argv)
    if not getattr(pre, "config", None):
        return pre
    subparser = sub.choices[pre.command]
    known = {a.dest: a for a in subparser._actions}
    values = {}
    for key, raw in load_config(pre.config).items():
        action = known.get(key)
        if action is None or key in ("config", "help"):
            raise UsageError(f"unknown config key {key!r} for {pre.command}")
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            values[key] = raw.lower() in ("1", "true", "yes")
        else:
            values[key] = raw
    subparser.set_defaults(**values)
    return parser.parse_args(argv)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        parser, sub = build_parser(_default_seed())
        args = _apply_config(parser, sub, argv)
        if args.command in ("lambda1", "lambda2", "rates", "remainder") and args.threads < 1:
            raise UsageError("--threads must be >= 1")
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except BudgetExceededError as exc:
        sys.stderr.write(f"budget refused: {exc}\n")
        return EXIT_BUDGET
    except (UsageError, DomainError, UnsupportedError, InsufficientDataError, argparse.ArgumentTypeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
