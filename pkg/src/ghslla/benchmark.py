"""Replicated simulation study: generate, tune, fit, evaluate.

Rows of the report are ordered by (replicate, method) whatever order the
workers finish in, so a run is reproducible from its configuration alone.
"""

from __future__ import annotations

import csv
import json
import math
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .linalg import sample_scatter
from .metrics import evaluate, support_metrics
from .penalty import PenaltyConfig
from .simgen import StructureSpec, generate_precision, replicate_seed, sample_gaussian
from .solver import SolverConfig, multistart_estimate
from .tuning import CVConfig, cv_select

METHODS = {
    "lla_horseshoe_cauchy": PenaltyConfig(family="horseshoe", backend="cauchy_mixture_quadrature"),
    "lla_horseshoe_laplace": PenaltyConfig(family="horseshoe", backend="laplace_mixture_quadrature"),
    "lla_horseshoe_expint": PenaltyConfig(family="horseshoe", backend="expint_closed_form"),
    "lla_constant": PenaltyConfig(family="constant"),
}

METRICS = ("steins_loss", "frobenius_error", "tpr", "fpr", "mcc", "wall_time")

REPORT_COLUMNS = (
    "replicate", "method", "status", "scale", "steins_loss", "frobenius_error",
    "tpr", "fpr", "mcc", "majority_tpr", "majority_fpr", "majority_mcc",
    "wall_time", "cv_time", "outer_iters_mean", "converged", "failed_starts", "error",
)


@dataclass(frozen=True)
class BenchmarkConfig:
    """Settings of a simulation study.

    ``scales`` gives the fixed ``tau`` / ``rho`` per family when
    ``tune=False``; ``grids`` overrides the default CV grid per family.
    """

    structure: StructureSpec = field(default_factory=StructureSpec)
    n: int = 120
    reps: int = 10
    methods: tuple = ("lla_horseshoe_cauchy", "lla_horseshoe_laplace", "lla_constant")
    tune: bool = True
    folds: int = 5
    grids: dict | None = None
    scales: dict | None = None
    n_starts: int = 50
    tol: float = 1e-3
    max_outer_iters: int = 200
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}; choose from {sorted(METHODS)}")

    def grid_for(self, family):
        if self.grids and family in self.grids:
            return tuple(self.grids[family])
        return study_grid(family, self.n)

    def scale_for(self, family):
        if self.scales and family in self.scales:
            return float(self.scales[family])
        return 0.2 if family == "horseshoe" else 0.1 * self.n


def study_grid(family, n):
    """Default CV grid of the study: 13 log-spaced values over two decades.

    Denser than :func:`ghslla.tuning.default_grid` (ratio ``10^(1/6)``
    between neighbours), with the same spacing for both families so neither
    is favoured: ``tau`` in ``[1e-2, 1]``, ``rho`` in ``(n/2) * [1e-2, 1]``.
    """
    base = np.logspace(-2, 0, 13)
    if family == "horseshoe":
        return tuple(base)
    return tuple(0.5 * n * base)


def replicate_data(cfg, rep):
    """Ground truth and data of replicate ``rep``."""
    spec = replace(cfg.structure, seed=replicate_seed(cfg.structure.seed, rep))
    omega0 = generate_precision(spec)
    y = sample_gaussian(omega0, cfg.n, replicate_seed(cfg.seed, rep) + 2**32)
    return omega0, y


def _fit_method(cfg, method, y, omega0, rep):
    base = METHODS[method]
    family = base.family
    solver = SolverConfig(
        penalty=base,
        tol=cfg.tol,
        max_outer_iters=cfg.max_outer_iters,
        seed=replicate_seed(cfg.seed, rep),
        track_objective=False,
    )
    cv_time = 0.0
    if cfg.tune:
        t0 = time.perf_counter()
        cv = cv_select(
            y,
            CVConfig(
                folds=cfg.folds,
                grid=cfg.grid_for(family),
                seed=replicate_seed(cfg.seed, rep),
                solver=replace(solver, start="ridge"),
            ),
        )
        cv_time = time.perf_counter() - t0
        scale = cv.selected
    else:
        scale = cfg.scale_for(family)
    fit_cfg = replace(
        solver, penalty=base.with_scale(scale), start="resampled_ridge", n_starts=cfg.n_starts
    )
    ms = multistart_estimate(sample_scatter(y), cfg.n, fit_cfg)
    report = evaluate(ms.average, omega0, wall_time=ms.wall_time)
    mtpr, mfpr, mmcc = support_metrics(ms.support.astype(float), omega0)
    return {
        "replicate": rep,
        "method": method,
        "status": "ok",
        "scale": scale,
        **{k: getattr(report, k) for k in METRICS},
        "majority_tpr": mtpr,
        "majority_fpr": mfpr,
        "majority_mcc": mmcc,
        "cv_time": cv_time,
        "outer_iters_mean": float(np.mean([r.outer_iters for r in ms.runs])),
        "converged": ms.converged,
        "failed_starts": ms.n_failed,
        "error": "",
    }


def run_replicate(cfg, rep):
    """Report rows (one per method) of replicate ``rep``."""
    rows = []
    try:
        omega0, y = replicate_data(cfg, rep)
    except Exception as exc:  # recorded per row, the study goes on
        return [_failed_row(rep, m, exc) for m in cfg.methods]
    for method in cfg.methods:
        try:
            rows.append(_fit_method(cfg, method, y, omega0, rep))
        except Exception as exc:
            rows.append(_failed_row(rep, method, exc))
    return rows


def _failed_row(rep, method, exc):
    row = {k: float("nan") for k in REPORT_COLUMNS}
    row.update(
        replicate=rep,
        method=method,
        status="failed",
        converged=False,
        failed_starts=0,
        error=f"{type(exc).__name__}: {exc}".replace("\n", " "),
    )
    traceback.print_exception(type(exc), exc, exc.__traceback__)
    return row


def _run_one(args):
    cfg, rep = args
    return run_replicate(cfg, rep)


def run_benchmark(cfg):
    """Run every replicate; returns the report rows ordered by (replicate, method)."""
    jobs = [(cfg, rep) for rep in range(cfg.reps)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as ex:
            chunks = list(ex.map(_run_one, jobs))
    else:
        chunks = [_run_one(j) for j in jobs]
    return [row for chunk in chunks for row in chunk]


def summarize(rows, methods=None):
    """Mean and sample sd of every metric per method, over successful rows."""
    methods = methods or list(dict.fromkeys(r["method"] for r in rows))
    out = {}
    for m in methods:
        ok = [r for r in rows if r["method"] == m and r["status"] == "ok"]
        entry = {"n_ok": len(ok), "n_failed": sum(1 for r in rows if r["method"] == m) - len(ok)}
        for k in METRICS + ("majority_tpr", "majority_fpr", "majority_mcc", "scale", "cv_time"):
            vals = [float(r[k]) for r in ok]
            finite = [v for v in vals if math.isfinite(v)]
            entry[k] = {
                "mean": float(np.mean(finite)) if finite else None,
                "sd": float(np.std(finite, ddof=1)) if len(finite) > 1 else None,
            }
        out[m] = entry
    return out


def _fmt(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_report_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in rows:
            w.writerow([_fmt(r.get(k, "")) for k in REPORT_COLUMNS])


def read_report_csv(path):
    rows = []
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            row = dict(r)
            for k in REPORT_COLUMNS:
                if k in ("method", "status", "error"):
                    continue
                if k == "converged":
                    row[k] = r[k] == "true"
                elif k in ("replicate", "failed_starts"):
                    row[k] = int(float(r[k])) if r[k] not in ("", "nan") else 0
                else:
                    row[k] = float(r[k])
            rows.append(row)
    return rows


def summary_json(cfg, rows):
    return {
        "schema_version": 1,
        "structure": cfg.structure.to_dict(),
        "n": cfg.n,
        "reps": cfg.reps,
        "methods": list(cfg.methods),
        "tuned": cfg.tune,
        "n_starts": cfg.n_starts,
        "seed": cfg.seed,
        "summary": summarize(rows, list(cfg.methods)),
    }


def dump_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
