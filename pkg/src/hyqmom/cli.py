"""Command-line front end: simulate, convergence, roots, reference, verify.

All outputs are machine-readable: CSV files with a ``#``-prefixed metadata
block (manifest echo) followed by a one-line header, and a JSON summary for
simulation runs.  Floats are written as shortest round-trip decimals, so
identical manifests produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import warnings
from math import comb
from pathlib import Path

import numpy as np

from . import __version__, backend
from .closure import hyqmom_close, qmom_close
from .errors import (
    BoundaryBreakdownError,
    RealizabilityLossError,
    UnrealizableError,
)
from .moments import hankel_matrix
from .riemann import RiemannSetup, exact_moments
from .solver import SolverConfig, error_norms, run
from .verification import run_all

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_UNREALIZABLE = 2
EXIT_REALIZABILITY_LOSS = 3
EXIT_IO = 4


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def write_csv(path: Path, metadata: dict, header: list[str], rows) -> None:
    lines = [f"# hyqmom {__version__}"]
    for key in sorted(metadata):
        lines.append(f"# {key}: {metadata[key]}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _standardized_columns(states: np.ndarray) -> np.ndarray:
    """Vectorized S_3..S_N per cell (assumes positive density and variance)."""
    nc, width = states.shape
    order = width - 1
    m0 = states[:, 0]
    mean = states[:, 1] / m0
    scaled = states / m0[:, None]
    if order < 3:
        return np.empty((nc, 0))
    central = np.zeros((nc, order + 1))
    central[:, 0] = 1.0
    for k in range(2, order + 1):
        acc = np.zeros(nc)
        for i in range(k + 1):
            acc += comb(k, i) * (-mean) ** (k - i) * scaled[:, i]
        central[:, k] = acc
    root = np.sqrt(np.maximum(central[:, 2], 1e-300))
    out = np.empty((nc, order - 2))
    for k in range(3, order + 1):
        out[:, k - 3] = central[:, k] / root**k
    return out


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=None, help="closure half-order (state = moments 0..2n)")
    p.add_argument("--cells", type=int, default=None)
    p.add_argument("--cfl", type=float, default=None)
    p.add_argument("--t-end", type=float, default=None)
    p.add_argument("--closure", choices=("hyqmom", "qmom", "gamma"), default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--domain", type=float, nargs=2, metavar=("XMIN", "XMAX"), default=None)
    p.add_argument("--local-speeds", action="store_true", default=None,
                   help="per-interface HLL speeds (experimental; default global)")
    p.add_argument("--out", type=Path, default=Path("."))
    p.add_argument("--config", type=Path, default=None, help="JSON file with flag defaults")


_CONFIG_DEFAULTS = {
    "n": 2,
    "cells": 4000,
    "cfl": 0.5,
    "t_end": 0.1,
    "closure": "hyqmom",
    "gamma": 0.0,
    "domain": (-0.5, 0.5),
    "local_speeds": False,
}


def _resolve_config(args) -> SolverConfig:
    """Merge built-in defaults < config file < explicit flags."""
    merged = dict(_CONFIG_DEFAULTS)
    if args.config is not None:
        merged.update(json.loads(args.config.read_text()))
    for key in merged:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    x_min, x_max = merged.pop("domain")
    return SolverConfig(x_min=float(x_min), x_max=float(x_max), **merged)


def _manifest(config: SolverConfig) -> dict:
    return {
        "n": config.n,
        "cells": config.cells,
        "cfl": config.cfl,
        "t_end": config.t_end,
        "closure": config.closure,
        "gamma": config.gamma,
        "domain": f"({config.x_min}, {config.x_max})",
        "local_speeds": config.local_speeds,
        "backend": backend.backend_name(),
    }


def _progress(step, t, lam_min, lam_max):
    print(f"  step {step}  t={t:.6f}  speeds [{lam_min:.4f}, {lam_max:.4f}]", file=sys.stderr)


def cmd_simulate(args) -> int:
    config = _resolve_config(args)
    setup = RiemannSetup()
    out_dir = args.out
    out_dir.mkdir(parents=True, exist_ok=True)
    every = 500 if config.cells * config.width >= 10000 else 0
    t0 = time.perf_counter()
    grid, stats = run(config, setup, progress_every=every, progress=_progress)
    errors = error_norms(grid, setup)
    exact = exact_moments(setup, grid.time, grid.x, config.width - 1)

    from .solver import _closure_pass

    _, lo, hi = _closure_pass(grid.states, config, grid.time)

    order = config.width - 1
    header = ["x"]
    header += [f"M{k}" for k in range(order + 1)]
    header += [f"S{k}" for k in range(3, order + 1)]
    header += [f"M{k}_exact" for k in range(order + 1)]
    header += [f"S{k}_exact" for k in range(3, order + 1)]
    header += ["lambda_min", "lambda_max"]
    s_num = _standardized_columns(grid.states)
    s_ex = _standardized_columns(exact)
    rows = (
        [grid.x[i]]
        + list(grid.states[i])
        + list(s_num[i])
        + list(exact[i])
        + list(s_ex[i])
        + [lo[i], hi[i]]
        for i in range(config.cells)
    )
    write_csv(out_dir / "solution.csv", _manifest(config), header, rows)

    summary = {
        "manifest": _manifest(config),
        "steps": stats["steps"],
        "wall_time_s": round(time.perf_counter() - t0, 3),
        "lambda_min_final": stats["lambda_min_final"],
        "lambda_max_final": stats["lambda_max_final"],
        "max_abs_eigenvalue": stats["max_abs_eigenvalue"],
        "error_norms": errors.tolist(),
        "budget_residual": stats["budget_residual"],
        "boundary_contact": stats["boundary_contact"],
        "diagnostics": stats["diagnostics"],
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out_dir / 'solution.csv'} and {out_dir / 'summary.json'}")
    print(f"max |eigenvalue| over final solution: {stats['max_abs_eigenvalue']:.4f}")
    return EXIT_OK


def cmd_convergence(args) -> int:
    n_list = [int(v) for v in args.n_list.split(",")]
    if any(n < 1 for n in n_list):
        raise ValueError("every n must be >= 1")
    out_dir = args.out
    out_dir.mkdir(parents=True, exist_ok=True)
    setup = RiemannSetup()
    k_top = 2 * max(n_list)
    header = ["n", "max_abs_eigenvalue"] + [f"err_M{k}" for k in range(k_top + 1)]
    rows = []
    base = _resolve_config(args)
    for n in n_list:
        config = SolverConfig(
            n=n, cells=base.cells, x_min=base.x_min, x_max=base.x_max,
            cfl=base.cfl, t_end=base.t_end, closure=base.closure, gamma=base.gamma,
            local_speeds=base.local_speeds,
        )
        print(f"running n={n} ...", file=sys.stderr)
        grid, stats = run(config, setup, progress_every=2000, progress=_progress)
        errors = error_norms(grid, setup)
        row = [n, stats["max_abs_eigenvalue"]]
        row += [errors[k] if k < errors.size else "" for k in range(k_top + 1)]
        rows.append(row)
    meta = _manifest(base)
    meta["n_list"] = ",".join(str(n) for n in n_list)
    write_csv(out_dir / "convergence.csv", meta, header, rows)
    print(f"wrote {out_dir / 'convergence.csv'}")
    return EXIT_OK


def cmd_roots(args) -> int:
    n = args.n
    s_fixed = [float(v) for v in args.s.split(",")] if args.s else []
    if len(s_fixed) != 2 * n - 3:
        raise ValueError(f"need S_3..S_{2 * n - 1}: {2 * n - 3} values, got {len(s_fixed)}")
    lo, hi, samples = args.sweep
    samples = int(samples)
    out_dir = args.out
    out_dir.mkdir(parents=True, exist_ok=True)

    smom_low = np.concatenate(([1.0, 0.0, 1.0], s_fixed))  # S_0..S_{2n-1}
    s2n_boundary = qmom_close(smom_low)
    if n >= 3:
        h_prev = float(np.linalg.det(hankel_matrix(smom_low[: 2 * n - 1])))
    else:
        h_prev = 1.0  # H_2 of (1, 0, 1)
    header = ["h", f"S{2 * n}"] + [f"q{i + 1}" for i in range(n)] + [
        f"r{i + 1}" for i in range(n + 1)
    ]
    rows = []
    for h in np.linspace(lo, hi, samples):
        if h < 0.0:
            raise UnrealizableError(f"H_{2 * n} = {h} < 0 is outside moment space")
        s2n = s2n_boundary + h / h_prev
        smom = np.concatenate((smom_low, [s2n]))
        res = hyqmom_close(smom, on_boundary="raise")
        rows.append([float(h), float(s2n)] + list(res.eigenvalues_q) + list(res.eigenvalues_r))
    meta = {
        "n": n,
        "fixed": ",".join(repr(v) for v in s_fixed),
        "sweep": f"H_{2 * n} in [{lo}, {hi}], {samples} samples",
        "backend": backend.backend_name(),
    }
    write_csv(out_dir / "roots.csv", meta, header, rows)
    print(f"wrote {out_dir / 'roots.csv'}")
    return EXIT_OK


def cmd_reference(args) -> int:
    setup = RiemannSetup(max_order=max(args.k_max, 41))
    out_dir = args.out
    out_dir.mkdir(parents=True, exist_ok=True)
    x_min, x_max = args.domain if args.domain else (-0.5, 0.5)
    dx = (x_max - x_min) / args.points
    x = x_min + dx * (np.arange(args.points) + 0.5)
    mom = exact_moments(setup, args.t, x, args.k_max)
    header = ["x"] + [f"M{k}" for k in range(args.k_max + 1)]
    rows = ([x[i]] + list(mom[i]) for i in range(args.points))
    meta = {"t": args.t, "k_max": args.k_max, "points": args.points,
            "domain": f"({x_min}, {x_max})"}
    write_csv(out_dir / "reference.csv", meta, header, rows)
    print(f"wrote {out_dir / 'reference.csv'}")
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_all(seed=args.seed, samples=args.samples)
    ok = True
    for res in results:
        status = "PASS" if res["passed"] else "FAIL"
        ok = ok and res["passed"]
        detail = ", ".join(
            f"{k}={res[k]:.3g}" if isinstance(res[k], float) else f"{k}={res[k]}"
            for k in res
            if k not in ("name", "passed")
        )
        print(f"{status} {res['name']}: {detail}")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "verify.json").write_text(json.dumps(results, indent=2) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyqmom",
        description="Hyperbolic moment closure: solver, reference solution, root sweeps.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run the Riemann problem and write CSV + JSON")
    _add_solver_flags(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_conv = sub.add_parser("convergence", help="error-norm table over a list of n")
    _add_solver_flags(p_conv)
    p_conv.add_argument("--n-list", type=str, default="2,3,4", help="comma-separated n values")
    p_conv.set_defaults(func=cmd_convergence)

    p_roots = sub.add_parser("roots", help="characteristic roots along a Hankel sweep")
    p_roots.add_argument("--n", type=int, required=True)
    p_roots.add_argument("--s", type=str, default="",
                         help="fixed standardized moments S_3..S_{2n-1}, comma-separated")
    p_roots.add_argument("--sweep", type=float, nargs=3, metavar=("LO", "HI", "SAMPLES"),
                         required=True, help="range and sample count for H_{2n}")
    p_roots.add_argument("--out", type=Path, default=Path("."))
    p_roots.set_defaults(func=cmd_roots)

    p_ref = sub.add_parser("reference", help="exact moments of the Riemann problem")
    p_ref.add_argument("--t", type=float, default=0.1)
    p_ref.add_argument("--k-max", type=int, default=8)
    p_ref.add_argument("--points", type=int, default=4000)
    p_ref.add_argument("--domain", type=float, nargs=2, metavar=("XMIN", "XMAX"), default=None)
    p_ref.add_argument("--out", type=Path, default=Path("."))
    p_ref.set_defaults(func=cmd_reference)

    p_ver = sub.add_parser("verify", help="randomized property suites")
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--samples", type=int, default=None)
    p_ver.add_argument("--out", type=Path, default=None)
    p_ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    warnings.simplefilter("once")
    try:
        return args.func(args)
    except (UnrealizableError, BoundaryBreakdownError) as err:
        print(f"error: unrealizable input: {err}", file=sys.stderr)
        return EXIT_UNREALIZABLE
    except RealizabilityLossError as err:
        print(f"error: realizability lost during run: {err}", file=sys.stderr)
        return EXIT_REALIZABILITY_LOSS
    except OSError as err:
        print(f"error: I/O failure: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
