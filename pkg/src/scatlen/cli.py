"""Command-line interface: ``scatlen <command> [options]``.

Every command prints one JSON run record on stdout::

    {"command": ..., "inputs": ..., "outputs": ..., "versions": ..., "timing": ...}

Floats in the record carry 12 significant digits; CSV dumps use full
round-trip precision. All lengths are dimensionless and ``beta`` has units
of length squared.

Exit codes: 0 success, 1 failed verification or computation, 2 bad
arguments, 3 invalid potential spec.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .fk import McConfig, estimate_g
from .gibbs import TruncationError, bounds_report, solve_ebeta
from .hardcore import HardCoreParams, ebeta_hardcore
from .mesh import MeshParams
from .potential import PotentialError, load_spec, serialize
from .scatter import scattering_length, scattering_length_at
from .verify import SUITES, run_suite

SIG_DIGITS = 12


class UsageError(Exception):
    """Bad command-line input detected after parsing (exit 2)."""


def round_sig(x):
    """Round floats to ``SIG_DIGITS`` significant digits, recursively; inf/nan become strings."""
    if isinstance(x, dict):
        return {k: round_sig(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [round_sig(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.{SIG_DIGITS}g}")
    return x


def write_csv(path, header, columns) -> None:
    """Write equal-length columns with ``repr`` floats (bit-exact on read-back)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def read_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    return {name: np.array([float(r[i]) for r in body]) for i, name in enumerate(header)}


def _positive(kind=float):
    def conv(s):
        try:
            v = kind(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {s!r}")
        if not (v > 0 and math.isfinite(v)):
            raise argparse.ArgumentTypeError(f"must be positive and finite: {s!r}")
        return v

    return conv


def _spec_args(p):
    p.add_argument("--spec", required=True, type=Path, help="potential spec (TOML)")
    p.add_argument("--dim", type=int, choices=(2, 3), help="dimension (overrides the spec file)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scatlen", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scatter", help="scattering length a_R or its limit a")
    _spec_args(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--R", type=_positive(), help="truncation radius")
    g.add_argument("--limit", action="store_true", help="extrapolate R -> infinity (default)")
    p.add_argument("--tol", type=_positive(), default=1e-8, help="relative bracket width for --limit")
    p.add_argument("--mesh", type=_positive(int), default=MeshParams.cells_per_scale, help="cells per length scale")
    p.add_argument("--profile", type=Path, help="CSV dump of r, w, w_prime (needs --R)")

    p = sub.add_parser("ebeta", help="numeric e(beta)")
    _spec_args(p)
    p.add_argument("--beta", type=_positive(), required=True)
    p.add_argument("--mesh", type=_positive(int), default=MeshParams.cells_per_scale)
    p.add_argument("--profile", type=Path, help="CSV dump of r, phi")

    p = sub.add_parser("bounds", help="closed-form upper bound vs trial state vs numeric e(beta)")
    _spec_args(p)
    p.add_argument("--beta", type=_positive(), required=True)
    p.add_argument("--mesh", type=_positive(int), default=MeshParams.cells_per_scale)
    p.add_argument("--table", type=Path, help="CSV table: quantity, value, error, check, pass")

    p = sub.add_parser("mc", help="Monte Carlo estimate of g(beta)")
    _spec_args(p)
    p.add_argument("--beta", type=_positive(), required=True)
    p.add_argument("--paths", type=_positive(int), default=McConfig.n_paths)
    p.add_argument("--steps", type=_positive(int), default=McConfig.n_steps)
    p.add_argument("--seed", type=int, default=McConfig.seed)
    p.add_argument("--threads", type=_positive(int), help="worker threads (env SCATLEN_THREADS overrides)")
    p.add_argument("--sample-radius", type=_positive(), help="radius of the start-point ball")

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", required=True, choices=(*SUITES, "all"))

    p = sub.add_parser("hardcore", help="closed-form e(beta) for a hard core")
    p.add_argument("--a", type=_positive(), required=True)
    p.add_argument("--beta", type=_positive(), required=True)
    p.add_argument("--dim", type=int, choices=(2, 3), required=True)
    return parser


def _load(args):
    V, d = load_spec(args.spec)
    if args.dim is not None:
        d = args.dim
    if d is None:
        raise UsageError("dimension not given: use --dim or set `dimension` in the spec")
    return V, d, {"spec": str(args.spec), "potential": serialize(V, d)}


def cmd_scatter(args):
    V, d, inputs = _load(args)
    mesh = MeshParams(args.mesh)
    if args.R is not None:
        inputs["R"] = args.R
        res = scattering_length_at(V, d, args.R, mesh)
        if args.profile:
            p = res.profile
            write_csv(args.profile, ("r", "w", "w_prime"), (p.grid, p.w, p.w_prime))
        return inputs, {"a_R": res.a_R, "lambda_R": res.lambda_R, "nodes": len(res.profile.grid)}, 0
    if args.profile:
        raise UsageError("--profile needs --R")
    inputs["tol"] = args.tol
    lim = scattering_length(V, d, args.tol, mesh)
    lo, hi = lim.bracket
    out = {
        "a": lim.a,
        "a_error": 0.5 * (hi - lo),
        "bracket": [lo, hi],
        "R_used": lim.R_used,
        "converged": lim.converged,
    }
    return inputs, out, 0


def cmd_ebeta(args):
    V, d, inputs = _load(args)
    inputs.update(beta=args.beta, mesh=args.mesh)
    sol = solve_ebeta(V, d, args.beta, MeshParams(args.mesh))
    if args.profile:
        write_csv(args.profile, ("r", "phi"), (sol.grid, sol.phi))
    out = {
        "e_beta": sol.e_beta,
        "e_beta_error": sol.abs_error,
        "relative_error": sol.error_estimate,
        "R_max": sol.R_max,
        "nodes": len(sol.grid),
        "certified": sol.certified,
    }
    return inputs, out, 0


def bounds_table(rep) -> list[list]:
    rows = [
        ["a", rep.a, 0.5 * (rep.a_bracket[1] - rep.a_bracket[0]), "", ""],
        ["theorem1", rep.theorem1, "", "", ""],
        ["trial", rep.trial, rep.trial_error, "", ""],
        ["numeric", rep.numeric, rep.numeric_error, "", ""],
    ]
    for c in rep.checks:
        rows.append([c.name, c.lhs - c.rhs, c.slack, f"{c.lhs!r} <= {c.rhs!r}", c.passed])
    return rows


def cmd_bounds(args):
    V, d, inputs = _load(args)
    inputs.update(beta=args.beta, mesh=args.mesh)
    rep = bounds_report(V, d, args.beta, MeshParams(args.mesh))
    rows = bounds_table(rep)
    if args.table:
        with open(args.table, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("quantity", "value", "error", "check", "pass"))
            for r in rows:
                w.writerow([repr(float(v)) if isinstance(v, float) else ("" if v is None else v) for v in r])
    out = {
        "a": rep.a,
        "a_bracket": list(rep.a_bracket),
        "theorem1": rep.theorem1,
        "trial": rep.trial,
        "trial_error": rep.trial_error,
        "numeric": rep.numeric,
        "numeric_error": rep.numeric_error,
        "checks": [
            {"name": c.name, "lhs": c.lhs, "rhs": c.rhs, "slack": c.slack, "pass": c.passed} for c in rep.checks
        ],
        "passed": rep.passed,
    }
    return inputs, out, 0 if rep.passed else 1


def cmd_mc(args):
    V, d, inputs = _load(args)
    if not 0 <= args.seed < 2**64:
        raise UsageError("--seed must be in [0, 2**64)")
    cfg = McConfig(args.paths, args.steps, args.seed, args.sample_radius, threads=args.threads)
    inputs.update(beta=args.beta, paths=args.paths, steps=args.steps, seed=args.seed)
    est = estimate_g(V, d, args.beta, cfg)
    out = {
        "g": est.mean,
        "g_error": est.stderr,
        "n_paths": est.n_effective,
        "sample_radius": est.sample_radius,
        "truncated": est.truncated,
        "outside_bias_bound": est.outside_bias_bound,
    }
    return inputs, out, 0


def cmd_verify(args):
    results = run_suite(args.suite)
    for o in results:
        print(o.line(), file=sys.stderr)
    ok = all(o.passed for o in results)
    out = {"passed": ok, "results": [{"name": o.name, "pass": o.passed, "detail": o.detail} for o in results]}
    return {"suite": args.suite}, out, 0 if ok else 1


def cmd_hardcore(args):
    p = HardCoreParams(args.a, args.beta, args.dim)
    return {"a": p.a, "beta": p.beta, "dim": p.d}, {"e_beta": ebeta_hardcore(p)}, 0


COMMANDS = {
    "scatter": cmd_scatter,
    "ebeta": cmd_ebeta,
    "bounds": cmd_bounds,
    "mc": cmd_mc,
    "verify": cmd_verify,
    "hardcore": cmd_hardcore,
}


def run(argv=None) -> tuple[int, dict | None]:
    """Parse ``argv``, run the command and return ``(exit code, run record)``."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0), None
    t0 = time.perf_counter()
    try:
        inputs, outputs, code = COMMANDS[args.command](args)
    except PotentialError as exc:
        print(f"scatlen: invalid potential spec: {exc}", file=sys.stderr)
        return 3, None
    except OSError as exc:
        print(f"scatlen: {exc}", file=sys.stderr)
        return 2, None
    except (UsageError, ValueError) as exc:
        print(f"scatlen: {exc}", file=sys.stderr)
        return 2, None
    except TruncationError as exc:
        print(f"scatlen: {exc}", file=sys.stderr)
        return 1, None
    record = {
        "command": args.command,
        "inputs": round_sig(inputs),
        "outputs": round_sig(outputs),
        "versions": __version__,
        "timing": round_sig(time.perf_counter() - t0),
    }
    return code, record


def main(argv=None) -> int:
    code, record = run(argv)
    if record is not None:
        json.dump(record, sys.stdout, indent=2)
        sys.stdout.write("\n")
    return code
