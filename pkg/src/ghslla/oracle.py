"""Slow, independent reference computations for verifying the solver.

Nothing here calls into :mod:`ghslla.solver`; the 2x2 objective is written
out by hand from the determinant and trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .exceptions import InputError
from .penalty import pen_value


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned box over ``(omega_11, omega_22, omega_12)`` and a step."""

    box: tuple
    step: float = 1e-3

    def __post_init__(self):
        if not self.step > 0:
            raise InputError("grid step must be positive")
        if len(self.box) != 3:
            raise InputError("box needs intervals for omega_11, omega_22, omega_12")
        for lo, hi in self.box:
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise InputError(f"bad interval ({lo}, {hi})")

    def axis(self, k):
        # integer multiples of the step, so 0 is on the grid when covered
        lo, hi = self.box[k]
        i0 = math.ceil(lo / self.step - 1e-9)
        i1 = math.floor(hi / self.step + 1e-9)
        return np.arange(i0, i1 + 1) * self.step


@dataclass
class GridMinimum:
    omega: np.ndarray
    value: float
    on_boundary: bool
    evaluated: int


@njit(cache=True)
def _grid_scan(a, b, c, pen, s11, s22, s12, n):
    best = np.inf
    bi = bj = bk = -1
    count = 0
    for k in range(c.size):
        c2 = c[k] * c[k]
        lin_c = s12 * c[k] + pen[k]
        for i in range(a.size):
            lin_a = 0.5 * s11 * a[i] + lin_c
            for j in range(b.size):
                det = a[i] * b[j] - c2
                if det <= 0.0:
                    continue
                count += 1
                f = -0.5 * n * np.log(det) + lin_a + 0.5 * s22 * b[j]
                if f < best:
                    best = f
                    bi, bj, bk = i, j, k
    return best, bi, bj, bk, count


def grid_map_2x2(scatter, n, penalty, grid):
    """Exhaustive minimiser of the penalised objective over a 2x2 grid.

    The objective ``-(n/2) log(w11 w22 - w12^2) + (s11 w11 + s22 w22)/2
    + s12 w12 + 2 pen(w12)`` is evaluated at every positive definite grid
    point.

    Parameters
    ----------
    scatter : array-like, shape (2, 2)
        Unnormalised scatter ``nS``.
    n : int
    penalty : PenaltyConfig
    grid : GridSpec

    Returns
    -------
    GridMinimum
        ``on_boundary`` flags an argmin on a face of the box, in which case
        the box should be enlarged before trusting the result.
    """
    s = np.asarray(scatter, dtype=float)
    if s.shape != (2, 2):
        raise InputError("grid_map_2x2 needs a 2x2 scatter")
    a = grid.axis(0)
    b = grid.axis(1)
    c = grid.axis(2)
    a = a[a > 0]
    b = b[b > 0]
    if a.size == 0 or b.size == 0 or c.size == 0:
        raise InputError("empty grid axis")
    pen = np.array([2.0 * pen_value(penalty, v) for v in c])
    value, i, j, k, count = _grid_scan(a, b, c, pen, s[0, 0], s[1, 1], s[0, 1], float(n))
    if count == 0:
        raise InputError("no positive definite point in the grid")
    omega = np.array([[a[i], c[k]], [c[k], b[j]]])
    edge = i in (0, a.size - 1) or j in (0, b.size - 1) or k in (0, c.size - 1)
    return GridMinimum(omega=omega, value=float(value), on_boundary=bool(edge), evaluated=count)


def box_2x2(scatter, n, margin=0.05):
    """Box spanning the diagonal-only fit and the unpenalised fit, plus ``margin``.

    Shrinkage moves the estimate between these two, so the box is a natural
    first guess; enlarge it if :func:`grid_map_2x2` reports a boundary hit.
    """
    s = np.asarray(scatter, dtype=float)
    det = s[0, 0] * s[1, 1] - s[0, 1] ** 2
    if not (s[0, 0] > 0 and s[1, 1] > 0 and det > 0):
        raise InputError("scatter must be positive definite")
    mle = n / det * np.array([[s[1, 1], -s[0, 1]], [-s[0, 1], s[0, 0]]])
    diag = (n / s[0, 0], n / s[1, 1], 0.0)
    full = (mle[0, 0], mle[1, 1], mle[0, 1])
    return tuple(
        (min(d, f) - margin, max(d, f) + margin) for d, f in zip(diag, full)
    )


def mc_penalty_deriv(x, tau, draws=100_000, seed=0):
    """Monte Carlo estimate of the horseshoe ``pen'(|x|)``.

    Self-normalised importance sampling over half-Cauchy local scales:
    ``pen' = |x| E[w / (lambda tau)^2] / E[w]`` with ``w = N(x; 0, (lambda tau)^2)``.

    Returns
    -------
    estimate, standard_error : float
    """
    x = abs(float(x))
    if not x > 0:
        raise InputError("x must be non-zero")
    if not tau > 0:
        raise InputError("tau must be positive")
    if draws < 100_000:
        raise InputError("use at least 1e5 draws")
    rng = np.random.default_rng(seed)
    sig = np.abs(rng.standard_cauchy(int(draws))) * tau
    with np.errstate(under="ignore", divide="ignore", invalid="ignore"):
        logw = -0.5 * (x / sig) ** 2 - np.log(sig)
    logw = np.where(np.isfinite(logw), logw, -np.inf)
    w = np.exp(logw - logw.max())
    f = x / sig**2
    f = np.where(w > 0, f, 0.0)
    sw = w.sum()
    ess = sw**2 / np.sum(w * w)
    if ess < 100:
        raise InputError(f"effective sample size {ess:.1f} < 100; estimate unreliable")
    est = float(np.sum(w * f) / sw)
    # delta-method variance of a ratio estimator
    wbar = sw / w.size
    var = np.mean((w * (f - est)) ** 2) / wbar**2 / w.size
    return est, float(math.sqrt(var))


def finite_diff(f, x, h):
    """Centred difference ``(f(x + h) - f(x - h)) / (2 h)``."""
    if not h > 0:
        raise InputError("h must be positive")
    hi = f(x + h)
    lo = f(x - h)
    if not (math.isfinite(hi) and math.isfinite(lo)):
        raise ArithmeticError(f"non-finite evaluation near x = {x}")
    return (hi - lo) / (2.0 * h)
