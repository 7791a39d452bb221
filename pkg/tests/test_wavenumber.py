import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from biharmonic_rp import DomainError, complex_wavenumber, wavenumber_from_kappa_r


def test_lossless_square_roots():
    assert complex_wavenumber(4.0, 0.0).kappa == 2.0 + 0j
    assert complex_wavenumber(1.0, 0.0).kappa == 1.0 + 0j


def test_high_frequency_limits():
    wn = complex_wavenumber(1e6, 1.0)
    assert 0.999 <= wn.kappa_r / 1e3 <= 1.001
    assert 0.2475 <= 1e3 * wn.kappa_i <= 2.525e-1


def test_quartic_residual_example():
    wn = complex_wavenumber(7.0, 3.0)
    assert abs(wn.kappa**4 - (49 + 21j)) < 1e-10


@given(st.floats(1e-3, 1e8), st.floats(0.0, 1e3))
def test_root_is_physical_and_solves_quartic(k, sigma):
    wn = complex_wavenumber(k, sigma)
    assert wn.kappa_r > 0 and wn.kappa_i >= 0
    target = k * k + 1j * sigma * k
    assert abs(wn.kappa**4 - target) <= 1e-12 * abs(target)


@given(st.floats(1e2, 1e12), st.floats(1e-3, 10.0))
def test_imaginary_part_free_of_cancellation(k, sigma):
    # kappa_i / kappa_r ~ sigma / (4k) is where a naive evaluation loses digits
    ref = oracles.kappa(k, sigma)
    wn = complex_wavenumber(k, sigma)
    assert abs(wn.kappa_i / float(ref.imag) - 1) < 1e-13
    assert abs(wn.kappa_r / float(ref.real) - 1) < 1e-14


@given(st.floats(0.05, 500.0), st.floats(0.0, 50.0))
def test_kappa_r_inversion(kr, sigma):
    wn = wavenumber_from_kappa_r(kr, sigma)
    assert abs(wn.kappa_r - kr) <= 1e-12 * kr


@pytest.mark.parametrize("k,sigma", [(0.0, 1.0), (-1.0, 0.0), (1.0, -0.5), (np.nan, 0.0)])
def test_invalid_inputs(k, sigma):
    with pytest.raises(DomainError):
        complex_wavenumber(k, sigma)
