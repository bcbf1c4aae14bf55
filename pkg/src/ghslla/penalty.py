"""Shrinkage penalties and their derivatives.

The horseshoe penalty is ``pen(|x|) = -log p(x | tau)`` where

    p(x | tau) = int_0^inf N(x; 0, lambda^2 tau^2) (2/pi) (1 + lambda^2)^-1 dlambda.

The local scales ``lambda`` are always integrated out; they never appear as
quantities in their own right.  Three independent routes compute the same
density and its negative log-derivative:

``expint_closed_form``
    ``p = exp(z) E1(z) / (tau sqrt(2 pi^3))`` with ``z = x^2 / (2 tau^2)``.
``cauchy_mixture_quadrature``
    adaptive quadrature over the half-Cauchy mixing variable after the
    substitution ``lambda = tan(theta)``.
``laplace_mixture_quadrature``
    the horseshoe written as a scale mixture of Laplace densities.  The
    mixing density of the Laplace rate ``b`` (``tau = 1``) is
    ``4 D(b / sqrt 2) / (pi^{3/2} b)`` with ``D`` Dawson's integral, which
    follows from writing the variance density ``v^{-1/2} (1 + v)^{-1} / pi``
    as a Laplace transform.

``pen'`` diverges at the origin.  Weights are capped at ``g_max``; the cap is
applied consistently to the value as well, i.e. below the point ``x_cap``
where ``pen'(x_cap) = g_max`` the penalty continues linearly with slope
``g_max``.  The capped penalty is still concave in ``|x|`` so the local linear
approximation remains a majoriser of it.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
import scipy.integrate
import scipy.interpolate
import scipy.optimize
import scipy.special

from .exceptions import InputError
from .specfun import HS_LOG_NORMALISER, log_scaled_e1, mills_excess

FAMILIES = ("horseshoe", "constant")
BACKENDS = (
    "expint_closed_form",
    "cauchy_mixture_quadrature",
    "laplace_mixture_quadrature",
)

DEFAULT_G_MAX = 1e12


@dataclass(frozen=True)
class PenaltyConfig:
    """Penalty family and its parameters.

    Parameters
    ----------
    family : {"horseshoe", "constant"}
    tau : float
        Global scale of the horseshoe.
    rho : float
        Weight of the constant (lasso) penalty.  ``rho = 0`` gives the
        unpenalised likelihood.
    backend : str
        Numerical route for the horseshoe, one of :data:`BACKENDS`.
    quadrature_rel_tol : float
        Relative tolerance handed to the adaptive quadrature.
    g_max : float
        Cap on the horseshoe weight, used at and near zero.
    """

    family: str = "horseshoe"
    tau: float = 1.0
    rho: float = 0.0
    backend: str = "expint_closed_form"
    quadrature_rel_tol: float = 1e-9
    g_max: float = DEFAULT_G_MAX

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InputError(f"unknown penalty family {self.family!r}")
        if self.backend not in BACKENDS:
            raise InputError(f"unknown horseshoe backend {self.backend!r}")
        if self.family == "horseshoe" and not (self.tau > 0 and math.isfinite(self.tau)):
            raise InputError(f"tau must be positive and finite, got {self.tau}")
        if self.family == "constant" and not (self.rho >= 0 and math.isfinite(self.rho)):
            raise InputError(f"rho must be non-negative and finite, got {self.rho}")
        if not (0 < self.quadrature_rel_tol <= 1e-4):
            raise InputError("quadrature_rel_tol must lie in (0, 1e-4]")
        if not self.g_max > 0:
            raise InputError("g_max must be positive")

    @property
    def scale(self):
        """The tuning value: ``tau`` for the horseshoe, ``rho`` for the constant family."""
        return self.tau if self.family == "horseshoe" else self.rho

    def with_scale(self, value):
        """Copy of this config with the tuning value replaced."""
        from dataclasses import replace

        if self.family == "horseshoe":
            return replace(self, tau=float(value))
        return replace(self, rho=float(value))


@dataclass(frozen=True)
class PenaltyBounds:
    x: float
    lower: float
    upper: float


# ---------------------------------------------------------------------------
# closed form (tau = 1 in the scaled variable y = |x| / tau)


def _closed_deriv_unit(y):
    y = np.asarray(y, dtype=float)
    return y * mills_excess(0.5 * y * y)


def _closed_logdens_unit(y):
    y = np.asarray(y, dtype=float)
    return log_scaled_e1(0.5 * y * y) - HS_LOG_NORMALISER


# ---------------------------------------------------------------------------
# half-Cauchy mixture quadrature


def _geometric_points(lo, hi, ratio=4.0):
    # breakpoints spanning every scale between lo and hi
    k = max(1, int(math.ceil(math.log(hi / lo) / math.log(ratio))))
    return list(np.geomspace(lo, hi, k + 1))


def _quad(f, a, b, points, rtol):
    pts = sorted(p for p in set(points) if a < p < b)
    val, _ = scipy.integrate.quad(
        f, a, b, points=pts or None, epsabs=0.0, epsrel=rtol, limit=500
    )
    return val


def _cauchy_integrals(x, tau, rtol):
    # lambda = tan(theta) turns (1 + lambda^2)^-1 dlambda into dtheta
    a = x / tau
    c = 1.0 / math.sqrt(2.0 * math.pi)

    def dens(theta):
        sig = tau * math.tan(theta)
        if sig <= 0.0:
            return 0.0
        return c * math.exp(-0.5 * (x / sig) ** 2) / sig

    def weighted(theta):
        sig = tau * math.tan(theta)
        if sig <= 0.0:
            return 0.0
        return c * math.exp(-0.5 * (x / sig) ** 2) / sig**3

    half_pi = 0.5 * math.pi
    scales = _geometric_points(min(a, 1.0) / 64.0, max(a, 1.0) * 64.0)
    points = [math.atan(v) for v in scales + [a, a / math.sqrt(3.0)]]
    den = (2.0 / math.pi) * _quad(dens, 0.0, half_pi, points, rtol)
    num = (2.0 / math.pi) * _quad(weighted, 0.0, half_pi, points, rtol)
    return num, den


def _cauchy_deriv(x, tau, rtol):
    num, den = _cauchy_integrals(x, tau, rtol)
    return x * num / den


def _cauchy_logdens(x, tau, rtol):
    _, den = _cauchy_integrals(x, tau, rtol)
    return math.log(den)


# ---------------------------------------------------------------------------
# Laplace mixture quadrature (tau = 1, y = |x| / tau)

_LAPLACE_T_MAX = 80.0


def _laplace_integrals(y, rtol):
    # substituting t = b y; the mixing density times the Laplace kernel
    # reduces to Dawson's integral against exp(-t)
    k = 1.0 / (math.sqrt(2.0) * y)
    dawsn = scipy.special.dawsn

    def i0(t):
        return dawsn(k * t) * math.exp(-t)

    def i1(t):
        return dawsn(k * t) * t * math.exp(-t)

    points = _geometric_points(min(y, 1.0) / 64.0, 4.0) + [math.sqrt(2.0) * y]
    a0 = _quad(i0, 0.0, _LAPLACE_T_MAX, points, rtol)
    a1 = _quad(i1, 0.0, _LAPLACE_T_MAX, points, rtol)
    return a0, a1


def _laplace_deriv_unit(y, rtol):
    a0, a1 = _laplace_integrals(y, rtol)
    return a1 / (y * a0)


def _laplace_logdens_unit(y, rtol):
    a0, _ = _laplace_integrals(y, rtol)
    return math.log(2.0 * a0 / (math.pi**1.5 * y))


# ---------------------------------------------------------------------------
# exact scalar evaluation per backend


def _hs_deriv_exact(cfg, ax):
    if cfg.backend == "expint_closed_form":
        return float(_closed_deriv_unit(ax / cfg.tau)) / cfg.tau
    if cfg.backend == "cauchy_mixture_quadrature":
        return _cauchy_deriv(ax, cfg.tau, cfg.quadrature_rel_tol)
    return _laplace_deriv_unit(ax / cfg.tau, cfg.quadrature_rel_tol) / cfg.tau


def _hs_logdens_exact(cfg, ax):
    if cfg.backend == "expint_closed_form":
        return float(_closed_logdens_unit(ax / cfg.tau)) - math.log(cfg.tau)
    if cfg.backend == "cauchy_mixture_quadrature":
        return _cauchy_logdens(ax, cfg.tau, cfg.quadrature_rel_tol)
    return _laplace_logdens_unit(ax / cfg.tau, cfg.quadrature_rel_tol) - math.log(cfg.tau)


@functools.lru_cache(maxsize=256)
def cap_point(tau, g_max=DEFAULT_G_MAX):
    """Point ``x_cap > 0`` where the horseshoe ``pen'`` equals ``g_max``.

    Located with the closed form; below it every backend uses the linear
    continuation.
    """
    target = tau * g_max

    def f(logy):
        return math.log(float(_closed_deriv_unit(math.exp(logy)))) - math.log(target)

    lo, hi = math.log(1e-150), math.log(1e8)
    if f(hi) >= 0:
        return tau * 1e8
    logy = scipy.optimize.brentq(f, lo, hi, xtol=1e-14, rtol=1e-15)
    return tau * math.exp(logy)


@functools.lru_cache(maxsize=256)
def _cap_logdens(tau, g_max):
    xc = cap_point(tau, g_max)
    return xc, float(_closed_logdens_unit(xc / tau)) - math.log(tau)


def _check_finite(x):
    xf = float(x)
    if not math.isfinite(xf):
        raise InputError(f"penalty argument must be finite, got {x}")
    return xf


def pen_deriv(cfg, x):
    """Derivative ``pen'(|x|)`` of the penalty, the LLA weight at ``x``.

    For the horseshoe this is evaluated by the backend in ``cfg`` and is
    capped at ``cfg.g_max`` (the value returned at ``x = 0``).
    """
    ax = abs(_check_finite(x))
    if cfg.family == "constant":
        return float(cfg.rho)
    if ax <= cap_point(cfg.tau, cfg.g_max):
        return float(cfg.g_max)
    return min(_hs_deriv_exact(cfg, ax), float(cfg.g_max))


def pen_value(cfg, x):
    """Penalty ``pen(|x|) = -log p(|x|)``.

    The horseshoe value is the exact negative log marginal density above the
    cap point (so it is normalised, not merely defined up to a constant).
    """
    ax = abs(_check_finite(x))
    if cfg.family == "constant":
        return cfg.rho * ax
    xc, logdens_c = _cap_logdens(cfg.tau, cfg.g_max)
    if ax <= xc:
        return -logdens_c - cfg.g_max * (xc - ax)
    return -_hs_logdens_exact(cfg, ax)


def pen_deriv_bounds(x):
    """Lower and upper bounds on the ``tau = 1`` horseshoe ``pen'(x)``.

    Derived from the classical sandwich on the horseshoe density.
    """
    x = _check_finite(x)
    if x <= 0:
        raise InputError("bounds are defined for x > 0")
    lower = 2.0 / (x * math.log1p(2.0 / (x * x))) - x
    upper = 4.0 / (x * math.log1p(4.0 / (x * x))) - x
    return PenaltyBounds(x=x, lower=lower, upper=upper)


# ---------------------------------------------------------------------------
# vectorised evaluation used by the solver
#
# The quadrature backends are too slow to call per matrix entry, so each
# tabulates its own tau = 1 curves once on a log grid and interpolates with
# cubic splines; outside the table the closed form takes over.

_TABLE_LOG_Y = (math.log(1e-8), math.log(1e5))
_TABLE_SIZE = 801


@functools.lru_cache(maxsize=None)
def _unit_tables(backend, rtol):
    u = np.linspace(*_TABLE_LOG_Y, _TABLE_SIZE)
    y = np.exp(u)
    if backend == "cauchy_mixture_quadrature":
        dvals = np.array([_cauchy_integrals(v, 1.0, rtol) for v in y])
        deriv = y * dvals[:, 0] / dvals[:, 1]
        logdens = np.log(dvals[:, 1])
    else:
        lvals = np.array([_laplace_integrals(v, rtol) for v in y])
        deriv = lvals[:, 1] / (y * lvals[:, 0])
        logdens = np.log(2.0 * lvals[:, 0] / (math.pi**1.5 * y))
    # interpolate smooth, slowly varying transforms of both curves
    d_spline = scipy.interpolate.CubicSpline(u, np.log(y * deriv))
    p_spline = scipy.interpolate.CubicSpline(u, logdens + 2.0 * np.log1p(y))
    return d_spline, p_spline


def _unit_deriv_vec(cfg, y):
    if cfg.backend == "expint_closed_form":
        return _closed_deriv_unit(y)
    d_spline, _ = _unit_tables(cfg.backend, cfg.quadrature_rel_tol)
    lo, hi = _TABLE_LOG_Y
    out = np.empty_like(y)
    with np.errstate(divide="ignore"):
        u = np.log(y)
    inside = (u >= lo) & (u <= hi)
    out[inside] = np.exp(d_spline(u[inside])) / y[inside]
    if np.any(~inside):
        out[~inside] = _closed_deriv_unit(y[~inside])
    return out


def _unit_logdens_vec(cfg, y):
    if cfg.backend == "expint_closed_form":
        return _closed_logdens_unit(y)
    _, p_spline = _unit_tables(cfg.backend, cfg.quadrature_rel_tol)
    lo, hi = _TABLE_LOG_Y
    out = np.empty_like(y)
    with np.errstate(divide="ignore"):
        u = np.log(y)
    inside = (u >= lo) & (u <= hi)
    out[inside] = p_spline(u[inside]) - 2.0 * np.log1p(y[inside])
    if np.any(~inside):
        out[~inside] = _closed_logdens_unit(y[~inside])
    return out


def pen_deriv_array(cfg, x):
    """Vectorised :func:`pen_deriv` (table-interpolated for quadrature backends)."""
    ax = np.abs(np.asarray(x, dtype=float))
    if cfg.family == "constant":
        return np.full(ax.shape, float(cfg.rho))
    out = np.full(ax.shape, float(cfg.g_max))
    live = ax > cap_point(cfg.tau, cfg.g_max)
    if np.any(live):
        vals = _unit_deriv_vec(cfg, ax[live] / cfg.tau) / cfg.tau
        out[live] = np.minimum(vals, cfg.g_max)
    return out


def pen_value_array(cfg, x):
    """Vectorised :func:`pen_value`."""
    ax = np.abs(np.asarray(x, dtype=float))
    if cfg.family == "constant":
        return cfg.rho * ax
    xc, logdens_c = _cap_logdens(cfg.tau, cfg.g_max)
    out = -logdens_c - cfg.g_max * (xc - ax)
    live = ax > xc
    if np.any(live):
        out[live] = -(_unit_logdens_vec(cfg, ax[live] / cfg.tau) - math.log(cfg.tau))
    return out
