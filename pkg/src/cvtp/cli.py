"""Command-line front end: ``cvtp {fidelity,optimize,sweep,oracle-check}``.

Exit codes: 0 success, 2 usage error, 3 numerical non-convergence.
A ``--config`` file of ``key=value`` lines (keys spelled like the long
flags, with or without dashes) supplies defaults; explicit flags win.
"""

from __future__ import annotations

import argparse
import math
import sys
import time

import numpy as np

from .average import average_fidelity
from .model import FAMILIES, ProtocolSettings, state_fidelity, validate_squeezing
from .optimize import OBJECTIVES, maximize_three_param
from .oracle import OracleConvergenceError, oracle_state_fidelity
from .quadrature import QuadratureError, quadrature_average
from .sweeps import PRESETS, SECONDARY_KINDS, SweepSpec, row_from_result, rows_to_csv, run_sweep, write_csv

EXIT_OK, EXIT_USAGE, EXIT_NONCONVERGED = 0, 2, 3


class UsageError(Exception):
    pass


def _grid(text: str) -> list[float]:
    """``a,b,c`` or ``start:stop:step`` (inclusive)."""
    text = text.strip()
    if ":" in text:
        parts = [float(v) for v in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
            raise argparse.ArgumentTypeError(f"bad range {text!r}, expected start:stop:step")
        n = int(round((parts[1] - parts[0]) / parts[2]))
        return [round(parts[0] + k * parts[2], 12) for k in range(n + 1)]
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_pool_flags(p):
    p.add_argument("--family", choices=sorted(FAMILIES))
    p.add_argument("--R", type=float, help="segment half-length or radius")
    p.add_argument("--lambda", dest="lam", type=float, help="Gaussian pool width parameter")
    p.add_argument("--beta-re", type=float, default=0.0)
    p.add_argument("--beta-im", type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cvtp", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="file of key=value defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fidelity", help="single coherent-state fidelity")
    p.add_argument("--alpha-re", type=float, default=0.0)
    p.add_argument("--alpha-im", type=float, default=0.0)
    p.add_argument("--r", type=float)
    p.add_argument("--theta", type=float, help="beam-splitter angle in radians")
    p.add_argument("--gu", type=float)
    p.add_argument("--gv", type=float)
    p.add_argument("--oracle", action="store_true", help="also run the wavefunction simulator")

    p = sub.add_parser("optimize", help="optimal (theta, g_u, g_v) for an input pool")
    _add_pool_flags(p)
    p.add_argument("--r", type=float)
    p.add_argument("--objective", choices=OBJECTIVES, default="closed-form")
    p.add_argument("--csv", help="also write the result as a one-row CSV file")

    p = sub.add_parser("sweep", help="figure-style grid of optimizations, CSV output")
    p.add_argument("--preset", choices=sorted(PRESETS))
    _add_pool_flags(p)
    p.add_argument("--r-grid", type=_grid, help="a,b,c or start:stop:step")
    p.add_argument("--secondary", choices=sorted({k for v in SECONDARY_KINDS.values() for k in v}))
    p.add_argument("--secondary-grid", type=_grid)
    p.add_argument("--beta-abs", type=float, default=0.0)
    p.add_argument("--beta-arg", type=float, default=0.0, help="radians")
    p.add_argument("--objective", choices=OBJECTIVES)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output", "-o", help="CSV path (default stdout)")

    p = sub.add_parser("oracle-check", help="wavefunction oracle vs closed forms")
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--average-tol", type=float, default=1e-8)
    return parser


def read_config(path: str) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.lstrip("-").replace("-", "_")] = value
    return out


def _apply_config(parser: argparse.ArgumentParser, command: str, config: dict[str, str]):
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction)).choices[command]
    actions = {}
    for act in sub._actions:
        for opt in act.option_strings:
            if opt.startswith("--"):
                actions[opt[2:].replace("-", "_")] = act
        actions.setdefault(act.dest, act)
    for key, value in config.items():
        act = actions.get(key)
        if act is None or act.dest == "help":
            raise UsageError(f"unknown config key {key!r} for {command}")
        if isinstance(act, argparse._StoreTrueAction):
            low = value.lower()
            if low not in ("1", "0", "true", "false", "yes", "no"):
                raise UsageError(f"config key {key!r} expects a boolean")
            sub.set_defaults(**{act.dest: low in ("1", "true", "yes")})
        else:
            if act.choices is not None and value not in act.choices:
                raise UsageError(f"config key {key!r}: {value!r} not in {sorted(act.choices)}")
            sub.set_defaults(**{act.dest: value})  # strings pass through the action's type


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _pool(args):
    _need(args, "family")
    cls = FAMILIES[args.family]
    if args.family == "gaussian":
        _need(args, "lam")
        return cls(args.lam, complex(args.beta_re, args.beta_im))
    _need(args, "R")
    return cls(args.R)


def cmd_fidelity(args, out) -> int:
    _need(args, "r", "theta", "gu", "gv")
    s = ProtocolSettings(args.theta, args.gu, args.gv)
    alpha = complex(args.alpha_re, args.alpha_im)
    r = validate_squeezing(args.r)
    value = state_fidelity(alpha, r, s)
    if not args.oracle:
        print(f"{value:.12g}", file=out)
        return EXIT_OK
    ref = oracle_state_fidelity(alpha, r, s)
    print(f"closed_form {value:.12g}", file=out)
    print(f"oracle {ref:.12g}", file=out)
    print(f"abs_diff {abs(value - ref):.3g}", file=out)
    return EXIT_OK


def cmd_optimize(args, out) -> int:
    _need(args, "r")
    dist = _pool(args)
    r = validate_squeezing(args.r)
    res = maximize_three_param(dist, r, args.objective)
    s = res.settings
    print(f"family {dist.tag}", file=out)
    print(f"theta {s.theta:.12g}", file=out)
    print(f"g_u {s.g_u:.12g}", file=out)
    print(f"g_v {s.g_v:.12g}", file=out)
    print(f"F_opt {res.value:.12g}", file=out)
    print(f"F_one_param {res.baseline_one_param:.12g}", file=out)
    print(f"F_original {res.baseline_original:.12g}", file=out)
    print(f"residual {res.stationarity_residual:.3g}", file=out)
    print(f"starts {res.starts_tried}", file=out)
    print(f"converged {str(res.converged).lower()}", file=out)
    if args.csv:
        write_csv([row_from_result(dist, r, res)], args.csv)
    return EXIT_OK if res.converged else EXIT_NONCONVERGED


def _sweep_spec(args) -> SweepSpec:
    if args.preset:
        spec = PRESETS[args.preset]
        if args.r_grid or args.secondary_grid or args.objective:
            spec = SweepSpec(spec.family, args.r_grid or spec.r_grid,
                             args.secondary_grid or spec.secondary_grid, spec.secondary_kind,
                             dict(spec.fixed), args.objective or spec.objective)
        return spec
    _need(args, "family", "r_grid", "secondary_grid")
    kind = args.secondary or SECONDARY_KINDS[args.family][0]
    fixed = {}
    if args.family == "gaussian":
        fixed = {"lam": args.lam if args.lam is not None else 1.0, "beta_re": args.beta_re,
                 "beta_im": args.beta_im, "beta_abs": args.beta_abs, "beta_arg": args.beta_arg}
    return SweepSpec(args.family, tuple(args.r_grid), tuple(args.secondary_grid), kind, fixed,
                     args.objective or "closed-form")


def cmd_sweep(args, out) -> int:
    spec = _sweep_spec(args)
    rows = run_sweep(spec, workers=args.workers)
    if args.output:
        write_csv(rows, args.output)
    else:
        out.write(rows_to_csv(rows))
    return EXIT_OK if all(r.converged for r in rows) else EXIT_NONCONVERGED


def _oracle_suite(samples: int, seed: int):
    """Random single-state and pool-average cross-checks; yields (label, deviation)."""
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        r = rng.uniform(0.0, 1.5)
        a = rng.uniform(0.0, 3.0) * np.exp(1j * rng.uniform(0.0, 2 * math.pi))
        s = ProtocolSettings(rng.uniform(0.1, 1.47), rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0))
        yield "state", abs(oracle_state_fidelity(a, r, s) - state_fidelity(a, r, s))
    pools = (
        lambda: FAMILIES["real"](rng.uniform(0.2, 5.0)),
        lambda: FAMILIES["imag"](rng.uniform(0.2, 5.0)),
        lambda: FAMILIES["circle"](rng.uniform(0.0, 5.0)),
        lambda: FAMILIES["disk"](rng.uniform(0.2, 5.0)),
        lambda: FAMILIES["gaussian"](rng.uniform(0.2, 5.0), complex(*rng.uniform(-2.0, 2.0, 2))),
    )
    for make in pools:
        for _ in range(max(1, samples // 4)):
            dist = make()
            r = rng.uniform(0.0, 1.5)
            s = ProtocolSettings(rng.uniform(0.1, 1.47), rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0))
            closed = average_fidelity(dist, r, s)
            quad = quadrature_average(dist, r, s).value
            yield f"average-{dist.tag}", abs(closed - quad) / max(1.0, abs(quad))


def cmd_oracle_check(args, out) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    worst: dict[str, float] = {}
    t0 = time.perf_counter()
    for label, dev in _oracle_suite(args.samples, args.seed):
        worst[label] = max(worst.get(label, 0.0), dev)
    ok = True
    for label, dev in worst.items():
        tol = args.tol if label == "state" else args.average_tol
        flag = "ok" if dev <= tol else "FAIL"
        ok &= dev <= tol
        print(f"{label} max_deviation {dev:.3g} tol {tol:.3g} {flag}", file=out)
    print(f"max_deviation {max(worst.values()):.3g} elapsed {time.perf_counter() - t0:.1f}s", file=out)
    return EXIT_OK if ok else EXIT_NONCONVERGED


COMMANDS = {"fidelity": cmd_fidelity, "optimize": cmd_optimize, "sweep": cmd_sweep,
            "oracle-check": cmd_oracle_check}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config:
            _apply_config(parser, args.command, read_config(args.config))
            args = parser.parse_args(argv)
        return COMMANDS[args.command](args, out)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0)
    except (UsageError, ValueError, OSError) as exc:
        print(f"cvtp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OracleConvergenceError, QuadratureError, ArithmeticError) as exc:
        print(f"cvtp: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED


if __name__ == "__main__":
    sys.exit(main())
