"""Exponential integral E1 in the scaled forms the horseshoe penalty needs.

``E1`` itself underflows for moderate arguments, but the horseshoe density
only ever uses ``exp(z) * E1(z)``.  Three regimes are used:

* ``z <= 1``: power series for E1, then multiplied by ``exp(z)``;
* ``1 < z <= 700``: continued fraction, which yields ``exp(z) E1(z)`` directly;
* ``z > 700``: asymptotic series for ``z exp(z) E1(z)``.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

EULER_GAMMA = 0.57721566490153286060651209008240243
HS_LOG_NORMALISER = 0.5 * math.log(2.0 * math.pi**3)

_SERIES_TERMS = 30
_ASYMPTOTIC_Z = 700.0
_ASYMPTOTIC_TERMS = 10
_CF_MAX_ITER = 1000
_CF_EPS = 1e-16


@njit(cache=True)
def _scaled_e1_scalar(z):
    if z <= 1.0:
        # E1(z) = -gamma - ln z - sum_{k>=1} (-z)^k / (k k!)
        total = 0.0
        term = 1.0
        for k in range(1, _SERIES_TERMS + 1):
            term = term * (-z) / k
            total += term / k
        return math.exp(z) * (-EULER_GAMMA - math.log(z) - total)
    if z <= _ASYMPTOTIC_Z:
        # modified Lentz evaluation of the continued fraction
        tiny = 1e-300
        b = z + 1.0
        c = 1.0 / tiny
        d = 1.0 / b
        h = d
        for i in range(1, _CF_MAX_ITER + 1):
            an = -float(i * i)
            b += 2.0
            d = an * d + b
            if abs(d) < tiny:
                d = tiny
            c = b + an / c
            if abs(c) < tiny:
                c = tiny
            d = 1.0 / d
            delta = c * d
            h *= delta
            if abs(delta - 1.0) < _CF_EPS:
                break
        return h
    # z exp(z) E1(z) ~ sum_k (-1)^k k! / z^k
    total = 1.0
    term = 1.0
    for k in range(1, _ASYMPTOTIC_TERMS + 1):
        term = -term * k / z
        total += term
    return total / z


@njit(cache=True)
def _mills_excess_scalar(z):
    if z <= _ASYMPTOTIC_Z:
        return 1.0 / (z * _scaled_e1_scalar(z)) - 1.0
    # 1 - z e^z E1(z) = 1/z - 2/z^2 + 6/z^3 - ..., summed directly
    one_minus = 0.0
    term = 1.0
    for k in range(1, _ASYMPTOTIC_TERMS + 1):
        term = -term * k / z
        one_minus -= term
    return one_minus / (1.0 - one_minus)


@njit(cache=True)
def _map_scaled_e1(z, out):
    for i in range(z.size):
        out[i] = _scaled_e1_scalar(z[i])


@njit(cache=True)
def _map_mills_excess(z, out):
    for i in range(z.size):
        out[i] = _mills_excess_scalar(z[i])


def _apply(kernel, z):
    zz = np.asarray(z, dtype=float)
    if np.any(~(zz > 0)):
        raise ValueError("argument must be > 0")
    flat = np.ascontiguousarray(zz).ravel()
    out = np.empty_like(flat)
    kernel(flat, out)
    out = out.reshape(zz.shape)
    return float(out) if zz.ndim == 0 else out


def scaled_e1(z):
    """``exp(z) * E1(z)`` for ``z > 0`` (array or scalar)."""
    return _apply(_map_scaled_e1, z)


def e1(z):
    """Exponential integral ``E1(z)`` for ``z > 0`` (underflows to 0 past ~700)."""
    zz = np.asarray(z, dtype=float)
    with np.errstate(under="ignore"):
        return np.exp(-zz) * scaled_e1(zz)


def mills_excess(z):
    """``exp(-z) / (z E1(z)) - 1``, computed without cancellation for large ``z``.

    This is the factor multiplying ``|x| / tau^2`` in the horseshoe penalty
    derivative.  It behaves like ``1 / (z (-gamma - ln z))`` near zero and
    like ``1 / z`` for large ``z``.
    """
    return _apply(_map_mills_excess, z)


def log_scaled_e1(z):
    """``log(exp(z) E1(z))``."""
    return np.log(scaled_e1(z))
