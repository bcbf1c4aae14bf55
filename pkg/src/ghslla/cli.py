"""Command-line front end: ``simulate``, ``estimate``, ``cv`` and ``benchmark``.

Exit codes: 0 success, 2 bad input or I/O failure, 3 iteration limit reached
without convergence (outputs are still written), 4 numerical degeneracy.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .benchmark import (
    METHODS,
    BenchmarkConfig,
    REPORT_COLUMNS,
    dump_json,
    replicate_data,
    run_benchmark,
    summary_json,
    write_report_csv,
)
from .exceptions import DegeneracyError, DomainError, InputError
from .linalg import check_dataset, read_csv_matrix, sample_scatter, write_csv_matrix
from .penalty import BACKENDS, PenaltyConfig
from .simgen import StructureSpec, edge_count
from .solver import START_KINDS, SolverConfig, multistart_estimate
from .tuning import CVConfig, cv_select, default_grid

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NOT_CONVERGED = 3
EXIT_DEGENERATE = 4

DEFAULT_TAU = 0.2
DEFAULT_RHO_PER_SAMPLE = 0.1


def _float_list(text):
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _name_list(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def _add_solver_args(p, start="resampled_ridge"):
    p.add_argument("--penalty", choices=("horseshoe", "constant"), default="horseshoe")
    p.add_argument("--backend", choices=BACKENDS, default="expint_closed_form")
    p.add_argument("--tau", type=float, default=None,
                   help=f"horseshoe global scale (default {DEFAULT_TAU})")
    p.add_argument("--rho", type=float, default=None,
                   help=f"constant penalty weight (default {DEFAULT_RHO_PER_SAMPLE} * n)")
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--max-iters", type=int, default=200)
    p.add_argument("--start", choices=[k for k in START_KINDS if k != "user"],
                   default=start)
    p.add_argument("--starts", type=int, default=1)


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", type=Path, default=Path("."))
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="format of the tabular outputs")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ghslla",
        description="Sparse precision matrix estimation under the graphical horseshoe penalty.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a ground truth and Gaussian data")
    p.add_argument("--kind", choices=("hubs", "random"), default="hubs")
    p.add_argument("--q", type=int, default=100)
    p.add_argument("--n", type=int, default=120)
    p.add_argument("--edge-prob", type=float, default=0.01)
    p.add_argument("--hub-size", type=int, default=10)
    p.add_argument("--edge-value", type=float, default=0.25)
    _add_common(p)

    p = sub.add_parser("estimate", help="fit a precision matrix to a data file")
    p.add_argument("data", type=Path)
    _add_solver_args(p)
    _add_common(p)

    p = sub.add_parser("cv", help="cross-validate the penalty scale")
    p.add_argument("data", type=Path)
    _add_solver_args(p, start="ridge")
    p.add_argument("--grid", type=_float_list, default=None,
                   help="comma-separated candidate scales")
    p.add_argument("--folds", type=int, default=5)
    _add_common(p)

    p = sub.add_parser("benchmark", help="replicated simulation study")
    p.add_argument("--kind", choices=("hubs", "random"), default="hubs")
    p.add_argument("--q", type=int, default=100)
    p.add_argument("--n", type=int, default=120)
    p.add_argument("--edge-prob", type=float, default=0.01)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--methods", type=_name_list,
                   default=["lla_horseshoe_cauchy", "lla_horseshoe_laplace", "lla_constant"])
    p.add_argument("--starts", type=int, default=50)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--no-tune", action="store_true",
                   help="use --tau / --rho instead of cross-validation")
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--max-iters", type=int, default=200)
    _add_common(p)
    return parser


def _penalty_from_args(args, n):
    if args.penalty == "horseshoe":
        tau = DEFAULT_TAU if args.tau is None else args.tau
        return PenaltyConfig(family="horseshoe", tau=tau, backend=args.backend)
    rho = DEFAULT_RHO_PER_SAMPLE * n if args.rho is None else args.rho
    return PenaltyConfig(family="constant", rho=rho, backend=args.backend)


def _solver_from_args(args, n):
    return SolverConfig(
        penalty=_penalty_from_args(args, n),
        tol=args.tol,
        max_outer_iters=args.max_iters,
        start=args.start,
        n_starts=args.starts,
        seed=args.seed,
    )


def _read_data(path):
    values, _ = read_csv_matrix(path)
    return check_dataset(values)


def _out_dir(path):
    path.mkdir(parents=True, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise PermissionError(f"{path} is not writable")
    return path


def _write_table(path_stem, rows, columns, fmt):
    if fmt == "json":
        with open(path_stem.with_suffix(".json"), "w") as fh:
            json.dump({"schema_version": SCHEMA_VERSION, "rows": rows}, fh, indent=2)
            fh.write("\n")
        return
    with open(path_stem.with_suffix(".csv"), "w", newline="") as fh:
        w = csv.DictWriter(fh, columns, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})


def _write_matrix(path_stem, m, fmt):
    if fmt == "json":
        with open(path_stem.with_suffix(".json"), "w") as fh:
            json.dump({"schema_version": SCHEMA_VERSION, "matrix": np.asarray(m).tolist()}, fh)
            fh.write("\n")
    else:
        write_csv_matrix(path_stem.with_suffix(".csv"), m)


def cmd_simulate(args):
    out = _out_dir(args.out_dir)
    spec = StructureSpec(
        kind=args.kind,
        q=args.q,
        hub_group_size=args.hub_size,
        edge_value=args.edge_value,
        edge_prob=args.edge_prob,
        seed=args.seed,
    )
    if args.n < 1:
        raise InputError("n must be positive")
    omega0, y = replicate_data(BenchmarkConfig(structure=spec, n=args.n, reps=1, seed=args.seed), 0)
    write_csv_matrix(out / "omega0.csv", omega0)
    write_csv_matrix(out / "data.csv", y, header=[f"x{j + 1}" for j in range(args.q)])
    dump_json(out / "meta.json", {
        "schema_version": SCHEMA_VERSION,
        "structure": spec.to_dict(),
        "n": args.n,
        "seed": args.seed,
        "edge_count": edge_count(omega0),
    })
    return EXIT_OK


def cmd_estimate(args):
    y = _read_data(args.data)
    n = y.shape[0]
    cfg = _solver_from_args(args, n)
    out = _out_dir(args.out_dir)
    ms = multistart_estimate(sample_scatter(y), n, cfg)
    _write_matrix(out / "omega_hat", ms.average, args.format)
    iu = np.triu_indices(ms.average.shape[0], 1)
    edges = [[int(i), int(j)] for i, j in zip(*iu) if ms.average[i, j] != 0]
    dump_json(out / "run.json", {
        "schema_version": SCHEMA_VERSION,
        "penalty": {
            "family": cfg.penalty.family,
            "scale": cfg.penalty.scale,
            "backend": cfg.penalty.backend,
        },
        "n": n,
        "q": int(y.shape[1]),
        "starts": cfg.n_starts,
        "start": cfg.start,
        "seed": cfg.seed,
        "converged": bool(ms.converged),
        "failed_starts": ms.n_failed,
        "outer_iters": [r.outer_iters for r in ms.runs],
        "objective_trace": [float(v) for v in ms.best.objective_trace],
        "support": edges,
        "wall_time": ms.wall_time,
    })
    return EXIT_OK if ms.converged else EXIT_NOT_CONVERGED


def cmd_cv(args):
    y = _read_data(args.data)
    n = y.shape[0]
    solver = _solver_from_args(args, n)
    grid = tuple(args.grid) if args.grid else default_grid(args.penalty, n)
    out = _out_dir(args.out_dir)
    res = cv_select(y, CVConfig(folds=args.folds, grid=grid, seed=args.seed,
                                solver=solver,
                                workers=max(1, args.threads)))
    _write_table(out / "cv_table", list(res.rows()), ["scale", "fold", "heldout_nll", "converged"],
                 args.format)
    dump_json(out / "selected.json", {
        "schema_version": SCHEMA_VERSION,
        "family": args.penalty,
        "selected": res.selected,
        "grid": res.grid.tolist(),
        "mean_heldout_nll": [float(v) for v in res.mean_scores],
        "fold_sizes": res.fold_sizes,
        "seed": args.seed,
    })
    return EXIT_OK


def cmd_benchmark(args):
    unknown = set(args.methods) - set(METHODS)
    if unknown:
        raise InputError(f"unknown methods {sorted(unknown)}")
    scales = {}
    if args.tau is not None:
        scales["horseshoe"] = args.tau
    if args.rho is not None:
        scales["constant"] = args.rho
    cfg = BenchmarkConfig(
        structure=StructureSpec(kind=args.kind, q=args.q, edge_prob=args.edge_prob, seed=args.seed),
        n=args.n,
        reps=args.reps,
        methods=tuple(args.methods),
        tune=not args.no_tune,
        folds=args.folds,
        scales=scales or None,
        n_starts=args.starts,
        tol=args.tol,
        max_outer_iters=args.max_iters,
        seed=args.seed,
        workers=max(1, args.threads),
    )
    out = _out_dir(args.out_dir)
    rows = run_benchmark(cfg)
    if args.format == "json":
        _write_table(out / "report", rows, list(REPORT_COLUMNS), "json")
    else:
        write_report_csv(out / "report.csv", rows)
    dump_json(out / "summary.json", summary_json(cfg, rows))
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "cv": cmd_cv,
    "benchmark": cmd_benchmark,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except DegeneracyError as exc:
        print(f"ghslla: numerical degeneracy: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (InputError, DomainError, ValueError, OSError) as exc:
        print(f"ghslla: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
