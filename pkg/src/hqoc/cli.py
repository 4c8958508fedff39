"""Command-line interface.

Subcommands: analyze, substitute, simulate, prep, sample, tradeoff,
lowerbound, verify.  Artifacts are JSON (CSV for samples) and embed the
toolkit version plus the fully resolved configuration, so identical
configurations and seeds produce byte-identical outputs.

Exit codes: 0 success, 1 validation error, 2 resource-cap error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .bounds import donoho_stark_trace, radius_dimension_bound
from .circuit import Circuit, CircuitError, parse_circuit, serialize_circuit
from .moments import AnalysisError, analysis_report, substitute_bounded_strength
from .pipeline import build_code_prep, build_prep_circuit, run_sampling_scheme
from .simulator import GridError, ResourceCapError, apply_circuit, auto_grid, energy_expectation, state_dump, vacuum_state
from .tradeoff import (
    implementation_energy_bound,
    regime_table,
    required_energy,
    sampling_error_bound,
)

DEFAULT_MEM_CAP_MB = 1024.0


def _mem_cap(args) -> float:
    if getattr(args, "mem_cap_mb", None):
        return float(args.mem_cap_mb)
    env = os.environ.get("HQOC_MEM_CAP_MB")
    return float(env) if env else DEFAULT_MEM_CAP_MB


def _emit(payload: dict, path: str | None) -> None:
    payload = {"toolkit_version": __version__, **payload}
    text = json.dumps(payload, sort_keys=True, indent=2, allow_nan=True)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _read_circuit(path: str) -> Circuit:
    with open(path) as fh:
        return parse_circuit(fh.read())


def _config(args, keys) -> dict:
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def cmd_analyze(args) -> int:
    c = _read_circuit(args.circuit)
    report = analysis_report(c)
    _emit({"config": _config(args, ["circuit"]), "report": report}, args.out)
    return 0


def cmd_substitute(args) -> int:
    c = _read_circuit(args.circuit)
    sub = substitute_bounded_strength(c)
    text = serialize_circuit(sub)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_simulate(args) -> int:
    c = _read_circuit(args.circuit)
    grids = auto_grid(c, base_margin=args.margin, mem_cap_mb=_mem_cap(args))
    if args.grid_points:
        from dataclasses import replace

        grids = [replace(g, n_points=args.grid_points) for g in grids]
    state = apply_circuit(vacuum_state(c.m, c.r, grids), c)
    energies, emax = energy_expectation(state)
    payload = {
        "config": _config(args, ["circuit", "grid_points", "margin"]),
        "grids": [{"n_points": g.n_points, "dx": g.dx, "x0": g.x0} for g in grids],
        "energy_per_mode": energies,
        "energy_max": emax,
        "norm": state.norm(),
        "analysis": analysis_report(c),
    }
    if args.dump_state:
        with open(args.dump_state, "w") as fh:
            json.dump(state_dump(state), fh)
    _emit(payload, args.out)
    return 0


def cmd_prep(args) -> int:
    if args.ell is not None:
        c = build_code_prep(args.ell, args.delta)
    elif args.n is not None:
        c = build_prep_circuit(args.n, args.delta)
    else:
        raise CircuitError("prep requires --ell or --n")
    text = serialize_circuit(c)
    path = args.emit or args.out
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_sample(args) -> int:
    gates = []
    if args.logical:
        from .circuit import qubit_gate

        for item in args.logical.split(","):
            name, _, q = item.partition(":")
            if name.strip() != "X":
                raise CircuitError("only logical X gates are simulable directly")
            gates.append(qubit_gate("X", int(q) - 1))
    u = Circuit(0, args.n, tuple(gates))
    run = run_sampling_scheme(u, args.n, args.m, args.delta, args.shots, args.seed)
    lines = ["".join(map(str, bits.tolist())) for bits in run.samples]
    csv_text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(csv_text)
    else:
        sys.stdout.write(csv_text)
    if args.budget_out:
        _emit(
            {
                "config": _config(args, ["n", "m", "delta", "shots", "seed", "logical"]),
                "budget": run.budget.to_dict(),
                "energy_report": run.energy_report,
            },
            args.budget_out,
        )
    return 0


def cmd_tradeoff(args) -> int:
    payload: dict = {"config": _config(args, ["n", "m", "s", "epsilon", "energy", "ell", "delta"])}
    if args.table:
        ns = [int(v) for v in args.n_values.split(",")]
        rows = regime_table(ns, lambda n: n * n, lambda n: 1.0 / n)
        payload["table"] = [
            {
                "regime": r.label,
                "n": list(r.n_values),
                "log2_energy": list(r.log2_energy),
                "fitted_exponent": r.fitted_exponent,
                "growth_class": r.growth_class,
            }
            for r in rows
        ]
    else:
        if args.epsilon is not None:
            log2_e, lin = required_energy(args.n, args.m, args.s, args.epsilon)
            payload["required_energy"] = {"log2": log2_e, "linear": lin if math.isfinite(lin) else None}
        if args.energy is not None:
            payload["error_bound"] = sampling_error_bound(args.n, args.m, args.s, energy=args.energy)
        if args.ell is not None and args.delta is not None:
            impl = implementation_energy_bound(args.s, args.ell, args.delta)
            payload["implementation"] = {
                "log2_energy": impl.log2_energy,
                "xi_bar_wtot": impl.xi_bar_wtot,
                "log2_g_bar_wtot": impl.log2_g_bar_wtot,
            }
    _emit(payload, args.out)
    return 0


def cmd_lowerbound(args) -> int:
    payload: dict = {"config": _config(args, ["d", "m", "r", "delta", "R", "n_quad"])}
    payload["radius_dimension_bound"] = radius_dimension_bound(args.d, args.m, args.r, args.delta)
    if args.R:
        trace, max_eig = donoho_stark_trace(args.R, args.n_quad)
        payload["donoho_stark"] = {
            "R": args.R,
            "n_quad": args.n_quad,
            "trace": trace,
            "exact_trace": 4.0 * args.R ** 2 / math.pi,
            "max_eigenvalue": max_eig,
        }
    _emit(payload, args.out)
    return 0


def cmd_verify(args) -> int:
    from .acceptance import ALL_CRITERIA, FAST_CRITERIA, run_criteria

    if args.criteria:
        numbers = [int(v) for v in args.criteria.split(",")]
        unknown = [k for k in numbers if k not in ALL_CRITERIA]
        if unknown:
            raise CircuitError(f"unknown criteria: {unknown}")
    elif args.full:
        numbers = sorted(ALL_CRITERIA)
    else:
        numbers = list(FAST_CRITERIA)
    results = run_criteria(numbers)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 0 if not failed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hqoc", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="moment analysis report for a circuit file")
    p.add_argument("circuit")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("substitute", help="bounded-strength displacement substitution")
    p.add_argument("circuit")
    p.add_argument("--out")
    p.set_defaults(func=cmd_substitute)

    p = sub.add_parser("simulate", help="simulate a circuit from vacuum")
    p.add_argument("circuit")
    p.add_argument("--grid-points", type=int, dest="grid_points")
    p.add_argument("--margin", type=float, default=0.25)
    p.add_argument("--mem-cap-mb", type=float, dest="mem_cap_mb")
    p.add_argument("--dump-state", dest="dump_state")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("prep", help="emit a preparation circuit")
    p.add_argument("--n", type=int)
    p.add_argument("--ell", type=int)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--emit")
    p.add_argument("--out")
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("sample", help="run the end-to-end sampling scheme")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--shots", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--logical", help="comma list like 'X:2,X:5' (1-based qubits)")
    p.add_argument("--out")
    p.add_argument("--budget-out", dest="budget_out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("tradeoff", help="energy trade-off calculators")
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--s", type=int, default=256)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--energy", type=float)
    p.add_argument("--ell", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--table", action="store_true")
    p.add_argument("--n-values", dest="n_values", default="16,32,64,128,256,512,1024")
    p.add_argument("--out")
    p.set_defaults(func=cmd_tradeoff)

    p = sub.add_parser("lowerbound", help="energy lower-bound calculators")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--r", type=int, default=0)
    p.add_argument("--delta", type=float, default=1.0 / 36.0)
    p.add_argument("--R", type=float)
    p.add_argument("--n-quad", type=int, dest="n_quad", default=1024)
    p.add_argument("--out")
    p.set_defaults(func=cmd_lowerbound)

    p = sub.add_parser("verify", help="run acceptance criteria")
    p.add_argument("--criteria", help="comma list, e.g. 1,2,7")
    p.add_argument("--full", action="store_true", help="include the heavy criteria")
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ResourceCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CircuitError, AnalysisError, GridError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
