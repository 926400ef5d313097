"""Command-line driver.

Channel indices on the command line and in reports are 1-based, matching
the usual ``[n] = {1, ..., n}`` labelling; the library itself is 0-based.

Exit codes: 0 success, 2 usage or parameter error, 3 input validation
failure, 4 a conjecture counterexample candidate survived re-verification.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .channel import CQChannel, apply, random_channel
from .characterization import max_overlap_closed_form, min_overlap_closed_form, plus_minus_pair
from .conjecture import confirmed_candidates, scan
from .errors import CQOverlapError, CapacityError, ConfigError, TableError
from .oracle import OptimizerConfig, continuous_extremum, grid_extremum
from .protocol import (
    build_lo_channel,
    build_so_channel,
    classify_instance,
    lo_verifier_accept,
    simulate_swap,
    so_verifier_accept,
)
from .serialization import (
    dumps,
    load_instance,
    load_table,
    save_instance,
    vector_to_json,
    write_scan_csv,
)
from .linalg import STATE_TOL

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_COUNTEREXAMPLE = 0, 2, 3, 4
DEFAULT_TOL = 1e-9

log = logging.getLogger("cqoverlap")


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


def _tagged(value, tol):
    return {"value": value, "tol": tol}


def _threads() -> int | None:
    raw = os.environ.get("CQOVERLAP_THREADS")
    if raw is None:
        return None
    try:
        val = int(raw)
    except ValueError:
        raise UsageError(f"CQOVERLAP_THREADS must be a positive integer, got {raw!r}") from None
    if val < 1:
        raise UsageError(f"CQOVERLAP_THREADS must be a positive integer, got {raw!r}")
    return val


def _load(path) -> CQChannel:
    try:
        ch, _ = load_instance(path)
    except OSError as exc:
        raise InputError(f"cannot read instance {path}: {exc}") from None
    except CQOverlapError as exc:
        raise InputError(f"{type(exc).__name__}: {exc}") from None
    return ch


def _check_writable(path):
    p = Path(path)
    if p.is_dir() or not p.parent.is_dir():
        raise UsageError(f"cannot write output to {path}")


def cmd_gen(args):
    if args.n < 2:
        raise UsageError(f"--n must be >= 2 (a C-Q channel needs orthogonal input pairs), got {args.n}")
    if args.d < 1:
        raise UsageError(f"--d must be >= 1, got {args.d}")
    _check_writable(args.out)
    ch = random_channel(args.n, args.d, args.seed)
    prov = {"generator": "ginibre", "seed": args.seed, "params": {"n": args.n, "d": args.d}}
    save_instance(args.out, ch, prov)
    return {"path": str(args.out), "n": ch.n, "d": ch.d}, EXIT_OK


def _pair_payload(value, i, j, u, v, tol):
    return {
        "value": _tagged(value, tol),
        "pair": [i + 1, j + 1],
        "witness_u": vector_to_json(u),
        "witness_v": vector_to_json(v),
    }


def _optimizer_config(args) -> OptimizerConfig:
    data = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read optimizer config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("optimizer config must be a JSON object")
    for key in ("restarts", "max_iters", "step_init", "grad_tol"):
        val = getattr(args, key)
        if val is not None:
            data[key] = val
    data["seed"] = args.seed
    try:
        return OptimizerConfig.from_dict(data)
    except (ConfigError, TypeError) as exc:
        raise UsageError(str(exc)) from None


def cmd_solve(args):
    ch = _load(args.instance)
    tol = args.tol
    closed = min_overlap_closed_form(ch) if args.direction == "min" else max_overlap_closed_form(ch)
    out = {"method": args.method, "direction": args.direction, "n": ch.n, "d": ch.d}
    if args.method == "closed":
        out.update(_pair_payload(closed.value, closed.i, closed.j, closed.witness_u, closed.witness_v, tol))
        return out, EXIT_OK
    direction = "minimize" if args.direction == "min" else "maximize"
    if args.method == "oracle":
        cfg = _optimizer_config(args)
        res = continuous_extremum(ch, direction, cfg)
        out["config"] = asdict(cfg)
        out["converged"] = res.converged
        out["iterations_used"] = res.iterations_used
    else:
        try:
            res = grid_extremum(ch, direction, args.resolution)
        except CapacityError as exc:
            raise InputError(f"CapacityError: {exc}") from None
        out["resolution"] = args.resolution
    out["value"] = _tagged(res.value, tol)
    out["witness_u"] = vector_to_json(res.u)
    out["witness_v"] = vector_to_json(res.v)
    out["closed_form"] = _tagged(closed.value, tol)
    gap = res.value - closed.value
    out["gap_to_closed_form"] = _tagged(gap, tol)
    # theorem sandwich: oracle can never beat the closed form
    out["within_theorem_bounds"] = gap >= -tol if direction == "minimize" else gap <= tol
    return out, EXIT_OK


def _default_thresholds(kind, eps):
    if kind == "so":
        return 1.0, 1.0 - (1.0 - eps) ** 2
    return 5.0 / 8.0, 9.0 / 16.0


def cmd_reduce(args):
    try:
        table = load_table(args.table)
    except OSError as exc:
        raise InputError(f"cannot read table {args.table}: {exc}") from None
    except TableError as exc:
        raise InputError(f"TableError: {exc}") from None
    _check_writable(args.out)
    ch = build_so_channel(table) if args.kind == "so" else build_lo_channel(table)
    c_def, s_def = _default_thresholds(args.kind, args.epsilon)
    c = args.c if args.c is not None else c_def
    s = args.s if args.s is not None else s_def
    try:
        report = classify_instance(ch, args.kind, c, s)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    prov = {"generator": f"{args.kind}-reduction", "seed": None, "params": {"bits": table.bits, "table": str(args.table)}}
    save_instance(args.out, ch, prov)
    gap = asdict(report)
    gap["pair"] = [report.pair[0] + 1, report.pair[1] + 1]
    gap["pair_bitstrings"] = [table.bitstring(report.pair[0]), table.bitstring(report.pair[1])]
    gap["tol"] = 1e-12
    out = {
        "path": str(args.out),
        "kind": args.kind,
        "bits": table.bits,
        "n": ch.n,
        "d": ch.d,
        "missing_entries": table.missing,
        "sparse": table.missing > 0,
        "gap_report": gap,
    }
    if args.kind == "so":
        out["min_overlap"] = _tagged(min_overlap_closed_form(ch).value, args.tol)
    else:
        out["max_pair_value"] = _tagged(max_overlap_closed_form(ch).value, args.tol)
    return out, EXIT_OK


def cmd_conjecture(args):
    for name in ("n", "d", "k", "instances", "tuples"):
        if getattr(args, name) < 1:
            raise UsageError(f"--{name} must be >= 1")
    if not 2 <= args.k <= args.n:
        raise UsageError(f"need 2 <= k <= n, got k={args.k}, n={args.n}")
    _check_writable(args.out)
    try:
        records = scan(args.n, args.d, args.k, args.instances, args.tuples, args.seed, polish=args.polish)
    except CQOverlapError as exc:
        raise UsageError(f"{type(exc).__name__}: {exc}") from None
    write_scan_csv(args.out, records)
    flagged = [r for r in records if r.is_candidate]
    confirmed = confirmed_candidates(records)
    dumps_written = []
    for rec in confirmed:
        path = Path(args.out).with_name(f"{Path(args.out).stem}_candidate_{rec.instance_seed}.json")
        prov = {
            "generator": "ginibre",
            "seed": rec.instance_seed,
            "params": {"n": rec.n, "d": rec.d, "k": rec.k, "states_seed": rec.states_seed},
        }
        save_instance(path, random_channel(rec.n, rec.d, rec.instance_seed), prov)
        dumps_written.append(str(path))
    out = {
        "csv": str(args.out),
        "rows": len(records),
        "min_margin": _tagged(min(r.margin for r in records), args.tol),
        "flagged": len(flagged),
        "confirmed_candidates": len(confirmed),
        "candidate_files": dumps_written,
    }
    return out, EXIT_COUNTEREXAMPLE if confirmed else EXIT_OK


def cmd_swaptest(args):
    if args.i == args.j:
        raise UsageError("--i and --j must differ")
    if args.shots < 1:
        raise UsageError("--shots must be >= 1")
    ch = _load(args.instance)
    if not (1 <= args.i <= ch.n and 1 <= args.j <= ch.n):
        raise UsageError(f"indices must lie in 1..{ch.n}")
    i, j = args.i - 1, args.j - 1
    so_swap = simulate_swap(ch.sigmas[i], ch.sigmas[j], args.shots, [args.seed, 0])
    u, v = plus_minus_pair(ch.n, i, j)
    lo_swap = simulate_swap(apply(ch, u.projector()), apply(ch, v.projector()), args.shots, [args.seed, 1])
    so_sigma, lo_sigma = so_swap.sigma, lo_swap.sigma
    return {
        "pair": [args.i, args.j],
        "shots": args.shots,
        "so": {
            "exact_accept": _tagged(so_verifier_accept(ch, i, j), args.tol),
            "empirical_accept": _tagged(1.0 - so_swap.empirical_accept, 5 * so_sigma),
        },
        "lo": {
            "exact_accept": _tagged(lo_verifier_accept(ch, i, j), args.tol),
            "empirical_accept": _tagged(lo_swap.empirical_accept, 5 * lo_sigma),
        },
    }, EXIT_OK


def cmd_validate(args):
    ch = _load(args.instance)
    return {"valid": True, "n": ch.n, "d": ch.d, "state_tol": STATE_TOL}, EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="comparison tolerance echoed in reports")
    common.add_argument("--json-out", type=Path, default=None, help="also write the run report to this file")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="cqoverlap", description="Output-overlap extrema of classical-quantum channels.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="write a random channel instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", parents=[common], help="min/max output overlap over orthogonal pairs")
    p.add_argument("instance", type=Path)
    p.add_argument("--direction", choices=["min", "max"], default="min")
    p.add_argument("--method", choices=["closed", "oracle", "grid"], default="closed")
    p.add_argument("--config", type=Path, help="JSON file with optimizer options")
    p.add_argument("--restarts", type=int)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--step-init", dest="step_init", type=float)
    p.add_argument("--grad-tol", dest="grad_tol", type=float)
    p.add_argument("--resolution", type=int, default=100, help="grid spacing 1/resolution (max 400)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("reduce", parents=[common], help="build a hardness-reduction channel from an acceptance table")
    p.add_argument("table", type=Path)
    p.add_argument("--kind", choices=["so", "lo"], required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--epsilon", type=float, default=0.01, help="soundness error used for default SO thresholds")
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--s", type=float, default=None)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("conjecture", parents=[common], help="scan random instances for k-state counterexamples")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--tuples", type=int, default=100)
    p.add_argument("--polish", action="store_true", help="locally minimize the worst tuple of each instance")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_conjecture)

    p = sub.add_parser("swaptest", parents=[common], help="exact and sampled verifier acceptance for a witness pair")
    p.add_argument("instance", type=Path)
    p.add_argument("--i", type=int, required=True)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--shots", type=int, default=10**5)
    p.set_defaults(func=cmd_swaptest)

    p = sub.add_parser("validate", parents=[common], help="check an instance file")
    p.add_argument("instance", type=Path)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    start = time.perf_counter()
    try:
        threads = _threads()
        results, code = args.func(args)
    except UsageError as exc:
        parser.exit(EXIT_USAGE, f"cqoverlap {args.command}: error: {exc}\n")
    except InputError as exc:
        print(f"cqoverlap {args.command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    inputs = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items() if k not in ("func", "verbose")}
    report = {
        "command": args.command,
        "inputs": inputs,
        "results": results,
        "threads": threads,
        "wall_time": time.perf_counter() - start,
        "tool_version": __version__,
    }
    text = dumps(report)
    sys.stdout.write(text)
    if args.json_out is not None:
        args.json_out.write_text(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
