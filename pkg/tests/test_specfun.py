import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import exp1

from ghslla.specfun import e1, log_scaled_e1, mills_excess, scaled_e1

mpmath.mp.dps = 40


def _mp_scaled_e1(z):
    z = mpmath.mpf(z)
    return float(mpmath.exp(z) * mpmath.e1(z))


@pytest.mark.parametrize("z", [1e-12, 1e-6, 0.01, 0.5, 1.0, 1.5, 3.0, 20.0, 150.0, 699.0, 701.0, 1e4, 1e8])
def test_scaled_e1_matches_mpmath(z):
    assert scaled_e1(z) == pytest.approx(_mp_scaled_e1(z), rel=1e-13)


def test_e1_matches_scipy_on_grid():
    z = np.logspace(-8, 2.5, 400)
    np.testing.assert_allclose(e1(z), exp1(z), rtol=1e-13)


def test_large_argument_does_not_underflow():
    # e^z E1(z) ~ 1/z, finite even where E1 itself underflows
    assert scaled_e1(1e5) == pytest.approx(1e-5 * (1 - 1e-5 + 2e-10), rel=1e-14)
    assert math.isfinite(log_scaled_e1(1e300))


@pytest.mark.parametrize("z", [1e-8, 0.3, 2.0, 50.0, 699.9, 700.1, 5e3, 1e7])
def test_mills_excess_matches_mpmath(z):
    zm = mpmath.mpf(z)
    ref = mpmath.exp(-zm) / (zm * mpmath.e1(zm)) - 1
    if z > 1e6:
        assert mills_excess(z) == pytest.approx(float(ref), rel=1e-6)
    else:
        assert mills_excess(z) == pytest.approx(float(ref), rel=1e-11)


def test_non_positive_arguments_rejected():
    for z in (0.0, -1.0):
        with pytest.raises(ValueError):
            scaled_e1(z)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-10, max_value=1e6))
def test_scaled_e1_bracketed_by_classical_bounds(z):
    # 0.5 log(1 + 2/z) < e^z E1(z) < log(1 + 1/z)
    v = scaled_e1(z)
    assert 0.5 * math.log1p(2 / z) <= v * (1 + 1e-13)
    assert v <= math.log1p(1 / z) * (1 + 1e-13)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-10, max_value=1e6))
def test_mills_excess_positive(z):
    assert mills_excess(z) > 0
