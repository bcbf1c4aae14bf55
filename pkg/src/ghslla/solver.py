"""Local linear approximation (LLA) solver for the penalised Gaussian likelihood.

Each outer iteration sweeps the columns from last to first.  For column ``i``
the matrix is viewed with row/column ``i`` exchanged with the last one; the
off-diagonal block ``beta`` is then a weighted lasso problem solved one
coordinate at a time with the weights ``G = pen'(|beta|)`` frozen at the
values the column had when the pass started.  The diagonal entry follows from
the Schur complement ``gamma = n / s22``.

The inverse ``W = Omega^{-1}`` is carried along so that ``Omega_11^{-1}`` for
each column is an O(q^2) rank-one downdate.  ``W`` is recomputed from scratch
after every sweep.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit

from .exceptions import DegeneracyError, DomainError, InputError
from .linalg import as_symmetric, gaussian_nll, inv_pd, is_positive_definite, is_psd_scatter
from .penalty import PenaltyConfig, pen_deriv_array, pen_value_array

START_KINDS = ("identity", "scaled_diagonal_random", "ridge", "resampled_ridge", "user")

# ridge level of the data-driven starts, relative to the mean sample variance
RIDGE_LEVEL = 0.1


@dataclass(frozen=True)
class SolverConfig:
    """Settings for :func:`lla_solve` and :func:`multistart_estimate`.

    ``tol`` bounds the Frobenius norm of the change over one full sweep.
    ``start`` picks the initial estimate; the random kinds draw from
    ``seed``.  With ``debug=True`` positive definiteness is verified after
    every column write instead of once per sweep.
    """

    penalty: PenaltyConfig = field(default_factory=PenaltyConfig)
    tol: float = 1e-3
    max_outer_iters: int = 200
    start: str = "resampled_ridge"
    start_matrix: np.ndarray | None = field(default=None, compare=False, repr=False)
    n_starts: int = 1
    seed: int = 0
    track_objective: bool = True
    debug: bool = False

    def __post_init__(self):
        if not self.tol > 0:
            raise InputError("tol must be positive")
        if self.max_outer_iters < 1:
            raise InputError("max_outer_iters must be >= 1")
        if self.n_starts < 1:
            raise InputError("n_starts must be >= 1")
        if self.start not in START_KINDS:
            raise InputError(f"unknown start {self.start!r}; choose from {START_KINDS}")
        if self.start == "user" and self.start_matrix is None:
            raise InputError("start='user' needs start_matrix")
        if not (0 <= int(self.seed) < 2**64):
            raise InputError("seed must fit in 64 unsigned bits")


@dataclass
class ColumnWorkspace:
    omega11_inv: np.ndarray
    beta: np.ndarray
    gamma: float
    s12: np.ndarray
    s22: float
    g_weights: np.ndarray
    order: np.ndarray


@dataclass
class SolverResult:
    estimate: np.ndarray
    outer_iters: int
    converged: bool
    objective_trace: list
    wall_time: float
    delta_trace: list = field(default_factory=list)
    start: np.ndarray | None = field(default=None, repr=False)


@dataclass
class MultistartResult:
    """Outcome of :func:`multistart_estimate`.

    ``average`` is the entrywise mean of the per-start estimates, ``best``
    the single run with the lowest final objective, and ``support`` the
    off-diagonal pattern that is non-zero in strictly more than half of the
    runs.
    """

    average: np.ndarray
    best: SolverResult
    support: np.ndarray
    runs: list
    n_failed: int = 0
    wall_time: float = 0.0

    @property
    def converged(self):
        return all(r.converged for r in self.runs)


def soft_threshold_coord(omega_hat, eta):
    """Minimiser of the scalar lasso step.

    Returns ``-eta - omega_hat`` when ``omega_hat < -eta``, ``eta - omega_hat``
    when ``omega_hat > eta`` and zero otherwise (ties map to zero).
    """
    omega_hat = float(omega_hat)
    eta = float(eta)
    if not (math.isfinite(omega_hat) and math.isfinite(eta)):
        raise InputError("soft threshold arguments must be finite")
    if eta < 0:
        raise InputError("eta must be non-negative")
    if omega_hat < -eta:
        return -eta - omega_hat
    if omega_hat > eta:
        return eta - omega_hat
    return 0.0


@njit(cache=True)
def _coordinate_pass(c, beta, s12, s22, g, cbeta):
    # one ascending pass over the column; cbeta tracks c @ beta.
    # returns the index of a degenerate coordinate, or -1
    m = beta.shape[0]
    for k in range(m):
        ckk = c[k, k]
        if not ckk > 0.0:
            return k
        a = s22 * ckk
        rest = cbeta[k] - ckk * beta[k]
        what = (s12[k] + s22 * rest) / a
        eta = 2.0 * g[k] / a
        if what < -eta:
            new = -eta - what
        elif what > eta:
            new = eta - what
        else:
            new = 0.0
        delta = new - beta[k]
        if delta != 0.0:
            for j in range(m):
                cbeta[j] += c[j, k] * delta
            beta[k] = new
    return -1


def column_order(q, col):
    """Row order of column ``col`` after exchanging it with the last column.

    Coordinates are visited in this order, so updating column ``col`` in place
    matches swapping it to the end, updating, and swapping back.
    """
    perm = np.arange(q)
    perm[col], perm[q - 1] = perm[q - 1], perm[col]
    return perm[:-1]


def update_column(omega, scatter, col, penalty, n, inverse=None):
    """Update column ``col`` of ``omega`` in place.

    Parameters
    ----------
    omega : ndarray, shape (q, q)
        Current PD iterate; modified in place (row and column ``col``).
    scatter : ndarray, shape (q, q)
        Unnormalised scatter ``nS``.
    col : int
        Zero-based column index.
    penalty : PenaltyConfig
        Source of the weights ``pen'(|omega_{k,col}|)``.
    n : int
        Sample size.
    inverse : ndarray, optional
        ``omega^{-1}``, updated in place when given.  Computed when omitted.

    Returns
    -------
    ColumnWorkspace
    """
    q = omega.shape[0]
    if not 0 <= col < q:
        raise InputError(f"column {col} out of range")
    w = inv_pd(omega, "omega") if inverse is None else inverse
    idx = column_order(q, col)
    s22 = float(scatter[col, col])
    if not s22 > 0:
        raise DegeneracyError(
            f"column {col}: s22 = {s22} <= 0 (constant zero variable?)", column=col
        )
    wcol = w[idx, col]
    c = w[np.ix_(idx, idx)] - np.outer(wcol, wcol) / w[col, col]
    beta = omega[idx, col].copy()
    s12 = np.ascontiguousarray(scatter[idx, col])
    g = pen_deriv_array(penalty, beta)
    cbeta = c @ beta
    bad = _coordinate_pass(c, beta, s12, s22, g, cbeta)
    if bad >= 0:
        raise DegeneracyError(
            f"column {col}: C22 <= 0 at coordinate {int(idx[bad])}", column=col
        )
    cbeta = c @ beta
    gamma = n / s22
    omega[idx, col] = beta
    omega[col, idx] = beta
    omega[col, col] = gamma + float(beta @ cbeta)
    if inverse is not None:
        inverse[col, col] = 1.0 / gamma
        inverse[idx, col] = -cbeta / gamma
        inverse[col, idx] = -cbeta / gamma
        inverse[np.ix_(idx, idx)] = c + np.outer(cbeta, cbeta) / gamma
    return ColumnWorkspace(
        omega11_inv=c, beta=beta, gamma=gamma, s12=s12, s22=s22, g_weights=g, order=idx
    )


def objective_eval(omega, scatter, n, penalty):
    """Penalised negative log-posterior.

    ``gaussian_nll + sum_{i != j} pen(|omega_ij|)``; diagonal entries carry no
    penalty.
    """
    omega = np.asarray(omega, dtype=float)
    nll = gaussian_nll(omega, scatter, n)
    iu = np.triu_indices(omega.shape[0], 1)
    return nll + 2.0 * float(np.sum(pen_value_array(penalty, omega[iu])))


def initial_estimate(kind, scatter, n, rng=None, user=None):
    """Starting point for the solver.

    ``identity`` and ``scaled_diagonal_random`` (diagonal entries uniform on
    [0.5, 2]) are diagonal.  Under the horseshoe a zero entry has an
    effectively infinite weight and stays zero, so from these starts the
    estimate remains diagonal.

    ``ridge`` is ``(S + d I)^{-1}`` with ``d`` a tenth of the mean sample
    variance.  ``resampled_ridge`` draws ``n`` Gaussian rows with covariance
    ``S + d I``, and returns the ridge inverse of their covariance: a random
    dense start whose spread matches the sampling noise of the data.
    """
    q = scatter.shape[0]
    if kind == "identity":
        return np.eye(q)
    if kind == "user":
        if user is None:
            raise InputError("user start requested without a matrix")
        return as_symmetric(user)
    rng = np.random.default_rng(rng)
    if kind == "scaled_diagonal_random":
        return np.diag(rng.uniform(0.5, 2.0, size=q))
    s = scatter / n
    level = RIDGE_LEVEL * float(np.mean(np.diag(s)))
    if not level > 0:
        raise InputError("scatter has zero trace")
    ridged = s + level * np.eye(q)
    if kind == "ridge":
        return inv_pd(ridged, "ridge start")
    if kind == "resampled_ridge":
        m = max(int(n), 2)
        l = np.linalg.cholesky(ridged)
        z = rng.standard_normal((m, q)) @ l.T
        return inv_pd(z.T @ z / m + level * np.eye(q), "resampled start")
    raise InputError(f"unknown start {kind!r}")


def lla_solve(scatter, n, cfg=None, start=None):
    """Run the LLA iterations from a single start.

    Parameters
    ----------
    scatter : array-like, shape (q, q)
        Unnormalised scatter ``nS = Y^T Y``.
    n : int
        Number of samples behind ``scatter``.
    cfg : SolverConfig, optional
    start : array-like, optional
        Overrides the start policy of ``cfg``.

    Returns
    -------
    SolverResult
    """
    cfg = cfg or SolverConfig()
    t0 = time.perf_counter()
    scatter = as_symmetric(scatter)
    if not n > 0:
        raise InputError("n must be positive")
    if not is_psd_scatter(scatter):
        raise InputError("scatter matrix is not positive semidefinite")
    q = scatter.shape[0]
    zero_cols = np.flatnonzero(np.diag(scatter) <= 0)
    if zero_cols.size:
        raise DegeneracyError(
            f"variables {zero_cols.tolist()} have zero scatter; remove or rescale them",
            column=int(zero_cols[0]),
        )
    if start is None:
        start = initial_estimate(cfg.start, scatter, n, rng=cfg.seed, user=cfg.start_matrix)
    omega = as_symmetric(start)
    if omega.shape != (q, q):
        raise InputError(f"start has shape {omega.shape}, expected {(q, q)}")
    if not is_positive_definite(omega):
        raise InputError("start matrix is not positive definite")
    omega0 = omega.copy()
    w = inv_pd(omega)
    penalty = cfg.penalty
    trace = [objective_eval(omega, scatter, n, penalty)] if cfg.track_objective else []
    deltas = []
    converged = False
    it = 0
    for it in range(1, cfg.max_outer_iters + 1):
        previous = omega.copy()
        for col in range(q - 1, -1, -1):
            try:
                update_column(omega, scatter, col, penalty, n, inverse=w)
            except DegeneracyError as exc:
                raise DegeneracyError(f"iteration {it}: {exc}", column=exc.column, iteration=it) from exc
            if cfg.debug and not is_positive_definite(omega):
                raise DegeneracyError(
                    f"iteration {it}: lost positive definiteness at column {col}",
                    column=col,
                    iteration=it,
                )
        try:
            w = inv_pd(omega)
        except DomainError as exc:
            raise DegeneracyError(
                f"iteration {it}: iterate is not positive definite", iteration=it
            ) from exc
        if cfg.track_objective:
            trace.append(objective_eval(omega, scatter, n, penalty))
        delta = float(np.linalg.norm(omega - previous))
        deltas.append(delta)
        if delta < cfg.tol:
            converged = True
            break
    return SolverResult(
        estimate=omega,
        outer_iters=it,
        converged=converged,
        objective_trace=trace,
        wall_time=time.perf_counter() - t0,
        delta_trace=deltas,
        start=omega0,
    )


def start_seed(seed, index):
    """Seed of start ``index``; start 0 reuses ``seed`` itself."""
    if index == 0:
        return int(seed)
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1, np.uint64)[0])


def multistart_estimate(scatter, n, cfg=None):
    """Run :func:`lla_solve` from ``cfg.n_starts`` seeded starts and pool the runs."""
    cfg = cfg or SolverConfig()
    t0 = time.perf_counter()
    runs = []
    errors = []
    for k in range(cfg.n_starts):
        sub = replace(cfg, seed=start_seed(cfg.seed, k), n_starts=1)
        try:
            res = lla_solve(scatter, n, sub)
        except (DegeneracyError, DomainError) as exc:
            errors.append(exc)
            continue
        runs.append(res)
    if not runs:
        raise DegeneracyError(
            f"all {cfg.n_starts} starts failed; first error: {errors[0]}"
        )
    stack = np.stack([r.estimate for r in runs])
    average = stack.mean(axis=0)
    if cfg.track_objective:
        best = min(runs, key=lambda r: r.objective_trace[-1])
    else:
        scatter_arr = np.asarray(scatter, dtype=float)
        best = min(runs, key=lambda r: objective_eval(r.estimate, scatter_arr, n, cfg.penalty))
    support = (stack != 0).sum(axis=0) * 2 > len(runs)
    np.fill_diagonal(support, False)
    return MultistartResult(
        average=average,
        best=best,
        support=support,
        runs=runs,
        n_failed=len(errors),
        wall_time=time.perf_counter() - t0,
    )
