"""Command-line interface.

Subcommands::

    compute     one ruin quantity as JSON
    table       sweep one query parameter, emit CSV
    simulate    Monte Carlo estimate of a functional as JSON
    transition  dump the density of X_r as CSV (columns z,density)
    scale       evaluate W / Z / the convolution scale at a point
    verify      run the verification suites (JSON report + table)

Exit codes: 0 success (and, for ``verify``, all gated checks passed),
1 computation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional, Sequence

import numpy as np

from .models import LevyModel, load_model_config, model_to_config
from .montecarlo import FUNCTIONALS, SimConfig, estimate_functional
from .parisian import QUANTITIES, RuinQuery, compute_quantity
from .quadrature import QuadratureError
from .scale import W, Z, script_W
from .transition import transition_measure
from .verify import run_all_suites, run_identity_suite, run_limit_suite

__all__ = ["main", "build_parser"]


def _float_or_inf(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    return float(text)


def _add_model_arg(sp: argparse.ArgumentParser) -> None:
    sp.add_argument(
        "--model-config", required=True, metavar="PATH",
        help="JSON (or TOML) file describing the risk model",
    )


def _add_query_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--x", type=float, required=True, help="initial surplus")
    sp.add_argument("--b", type=float, default=None, help="upper barrier (optional)")
    sp.add_argument("--p", type=float, default=0.0, help="Laplace argument in time")
    sp.add_argument("--q", type=float, default=0.0, help="exponential delay rate (0 = off)")
    sp.add_argument(
        "--r", type=_float_or_inf, default=math.inf,
        help="deterministic grace period ('inf' = exponential delay only)",
    )
    sp.add_argument("--lambda", dest="lam", type=float, default=0.0, help="deficit tilt")


def _add_output_arg(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--output", metavar="PATH", default=None, help="write to file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="levyruin",
        description="Parisian ruin with mixed deterministic/exponential delays",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("compute", help="evaluate one analytic ruin quantity")
    _add_model_arg(sp)
    _add_query_args(sp)
    sp.add_argument("--quantity", required=True, choices=QUANTITIES)
    _add_output_arg(sp)

    sp = sub.add_parser("table", help="sweep one parameter, emit CSV")
    _add_model_arg(sp)
    _add_query_args(sp)
    sp.add_argument("--quantity", required=True, choices=QUANTITIES)
    sp.add_argument("--sweep", required=True, choices=("x", "b", "p", "q", "r", "lambda"))
    sp.add_argument("--from", dest="lo", type=float, required=True)
    sp.add_argument("--to", dest="hi", type=float, required=True)
    sp.add_argument("--steps", type=int, required=True)
    _add_output_arg(sp)

    sp = sub.add_parser("simulate", help="Monte Carlo estimate of a functional")
    _add_model_arg(sp)
    _add_query_args(sp)
    sp.add_argument("--functional", default="ruin_prob", choices=FUNCTIONALS)
    sp.add_argument("--n-paths", type=int, default=100_000)
    sp.add_argument("--horizon", type=float, default=500.0)
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--antithetic", action="store_true")
    _add_output_arg(sp)

    sp = sub.add_parser("transition", help="dump the density of X_r as CSV")
    _add_model_arg(sp)
    sp.add_argument("--r", type=float, required=True)
    sp.add_argument("--points", type=int, default=200)
    sp.add_argument("--z-min", type=float, default=None)
    sp.add_argument("--z-max", type=float, default=None)
    _add_output_arg(sp)

    sp = sub.add_parser("scale", help="evaluate a scale function at a point")
    _add_model_arg(sp)
    sp.add_argument("--which", required=True, choices=("W", "Z", "scriptW"))
    sp.add_argument("--p", type=float, default=0.0)
    sp.add_argument("--s", type=float, default=0.0, help="secondary rate (scriptW)")
    sp.add_argument("--a", type=float, default=0.0, help="convolution cutoff (scriptW)")
    sp.add_argument("--x", type=float, required=True)
    sp.add_argument("--theta", type=float, default=0.0, help="tilt (Z)")
    _add_output_arg(sp)

    sp = sub.add_parser("verify", help="run the verification suites")
    _add_model_arg(sp)
    sp.add_argument("--level", default="fast", choices=("fast", "full"))
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument(
        "--suite", default="all", choices=("all", "identity", "limit"),
        help="which suites to run (oracle checks run only under 'all')",
    )
    sp.add_argument(
        "--tolerance", action="append", default=[], metavar="PREFIX=VALUE",
        help="override the tolerance of every check whose name starts with "
        "PREFIX (repeatable; unknown prefixes are rejected)",
    )
    _add_output_arg(sp)

    return ap


def _emit(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text + ("\n" if not text.endswith("\n") else ""))
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def _query_from_args(args: argparse.Namespace) -> RuinQuery:
    return RuinQuery(x=args.x, b=args.b, p=args.p, q=args.q, r=args.r, lam=args.lam)


def _query_dict(query: RuinQuery) -> dict:
    return {
        "x": query.x,
        "b": query.b,
        "p": query.p,
        "q": query.q,
        "r": "inf" if math.isinf(query.r) else query.r,
        "lambda": query.lam,
    }


def _cmd_compute(model: LevyModel, args: argparse.Namespace) -> int:
    query = _query_from_args(args)
    value, method, err = compute_quantity(model, query, args.quantity)
    payload = {
        "value": value,
        "method": method,
        "est_error": err,
        "model": model_to_config(model),
        "query": _query_dict(query),
    }
    _emit(json.dumps(payload, indent=2), args.output)
    return 0


def _cmd_table(model: LevyModel, args: argparse.Namespace) -> int:
    if args.steps < 1:
        raise ValueError("--steps must be at least 1")
    grid = np.linspace(args.lo, args.hi, args.steps)
    rows = [f"{args.sweep},value"]
    base = {
        "x": args.x, "b": args.b, "p": args.p, "q": args.q, "r": args.r, "lam": args.lam
    }
    key = "lam" if args.sweep == "lambda" else args.sweep
    for v in grid.tolist():
        params = dict(base)
        params[key] = v
        query = RuinQuery(**params)
        value, _, _ = compute_quantity(model, query, args.quantity)
        rows.append(f"{v!r},{value!r}")
    _emit("\n".join(rows), args.output)
    return 0


def _cmd_simulate(model: LevyModel, args: argparse.Namespace) -> int:
    query = _query_from_args(args)
    cfg = SimConfig(
        n_paths=args.n_paths, horizon=args.horizon, dt=args.dt,
        seed=args.seed, antithetic=args.antithetic,
    )
    est = estimate_functional(model, query, args.functional, cfg)
    payload = {
        "estimate": est.point,
        "stderr": est.stderr,
        "n": est.n_paths,
        "censored": est.n_censored,
        "seed": est.seed,
        "note": est.truncation_bias_note,
        "model": model_to_config(model),
        "query": _query_dict(query),
        "functional": args.functional,
    }
    _emit(json.dumps(payload, indent=2), args.output)
    return 0


def _cmd_transition(model: LevyModel, args: argparse.Namespace) -> int:
    meas = transition_measure(model, args.r)
    lo = args.z_min if args.z_min is not None else meas.support_lo
    hi = args.z_max if args.z_max is not None else meas.support_hi
    zg = np.linspace(lo, hi, args.points)
    dens = meas.density(zg)
    rows = ["z,density"]
    rows.extend(f"{z!r},{d!r}" for z, d in zip(zg.tolist(), np.asarray(dens).tolist()))
    _emit("\n".join(rows), args.output)
    return 0


def _cmd_scale(model: LevyModel, args: argparse.Namespace) -> int:
    if args.which == "W":
        value = float(W(model, args.p, args.x))
    elif args.which == "Z":
        value = float(Z(model, args.p, args.x, args.theta))
    else:
        value = float(script_W(model, args.p, args.s, args.a, args.x))
    payload = {
        "value": value,
        "which": args.which,
        "model": model_to_config(model),
        "args": {"p": args.p, "s": args.s, "a": args.a, "x": args.x, "theta": args.theta},
    }
    _emit(json.dumps(payload, indent=2), args.output)
    return 0


def _parse_tolerance_overrides(pairs: Sequence[str]) -> dict[str, float]:
    overrides = {}
    for pair in pairs:
        if "=" not in pair:
            raise ValueError(f"tolerance override must look like PREFIX=VALUE, got {pair!r}")
        key, _, val = pair.partition("=")
        overrides[key.strip()] = float(val)
    return overrides


def _cmd_verify(model: LevyModel, args: argparse.Namespace) -> int:
    if args.suite == "identity":
        rep = run_identity_suite(model, args.level, args.seed)
    elif args.suite == "limit":
        rep = run_limit_suite(model, args.level, args.seed)
    else:
        rep = run_all_suites(model, args.level, args.seed)
    overrides = _parse_tolerance_overrides(args.tolerance)
    if overrides:
        rep = rep.with_tolerances(overrides)
    sys.stderr.write(rep.to_table() + "\n")
    _emit(rep.to_json(), args.output)
    return 0 if rep.all_passed else 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        model = load_model_config(args.model_config)
        if args.command == "compute":
            return _cmd_compute(model, args)
        if args.command == "table":
            return _cmd_table(model, args)
        if args.command == "simulate":
            return _cmd_simulate(model, args)
        if args.command == "transition":
            return _cmd_transition(model, args)
        if args.command == "scale":
            return _cmd_scale(model, args)
        if args.command == "verify":
            return _cmd_verify(model, args)
        raise ValueError(f"unhandled command {args.command!r}")
    except (ValueError, TypeError, OSError, QuadratureError, RuntimeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
