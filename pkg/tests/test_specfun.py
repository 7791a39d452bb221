import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from biharmonic_rp.errors import DomainError, SingularityError
from biharmonic_rp.specfun import DEFAULT_CONFIG, hankel1, macdonald

sector = st.builds(lambda r, t: r * np.exp(1j * t), st.floats(1e-3, 200.0),
                   st.floats(0.0, np.pi / 2 * (1 - 1e-9)))


def test_hankel_value_at_one():
    h = hankel1(0, 1.0)
    assert abs(h - (0.7651976866 + 0.0882569642j)) < 1e-10


def test_hankel_magnitude_large_argument():
    assert abs(abs(hankel1(0, 100.0)) / 0.0797885 - 1) < 3e-3


def test_hankel_small_argument_log():
    z = 1e-8
    h = hankel1(0, z)
    assert abs(h.real - 1) < 1e-12
    assert abs(h.imag / ((2 / np.pi) * np.log(z)) - 1) < 0.01


def test_macdonald_value_at_one():
    k = macdonald(0, 1.0)
    assert abs(k.real - 0.4210244382) < 1e-10
    assert abs(k.imag) < 1e-12


def test_macdonald_leading_asymptotic():
    z = 50.0
    assert abs(macdonald(0, z) * np.exp(z) * np.sqrt(z) / np.sqrt(np.pi / 2) - 1) < 0.01


@pytest.mark.parametrize("nu", [0, 1])
def test_against_extended_precision(nu):
    z = oracles.sector_points(150, seed=99)
    ref_h = np.array([oracles.hankel1(nu, v) for v in z])
    ref_k = np.array([oracles.besselk(nu, v) for v in z])
    assert np.max(np.abs(hankel1(nu, z) - ref_h) / np.abs(ref_h)) < 1e-9
    assert np.max(np.abs(macdonald(nu, z) - ref_k) / np.abs(ref_k)) < 1e-9


@given(st.builds(lambda r, t: r * np.exp(-1j * t), st.floats(1e-3, 200.0),
                 st.floats(0.0, np.pi / 2 * (1 - 1e-9))), st.sampled_from([0, 1]))
def test_macdonald_hankel_relation(z, nu):
    # Re z > 0 and Im z <= 0 keeps i z inside the Hankel sector
    lhs = macdonald(nu, z)
    rhs = (np.pi / 2) * 1j ** (nu + 1) * hankel1(nu, 1j * z)
    assert abs(lhs - rhs) <= 1e-12 * abs(lhs)


@given(sector, st.sampled_from([0, 1]))
def test_exponential_bound(z, nu):
    theta = z.real
    if theta <= 0:
        return
    bound = np.exp(-z.imag * np.sqrt(1 - theta**2 / abs(z) ** 2)) * abs(hankel1(nu, theta))
    assert abs(hankel1(nu, z)) <= bound * (1 + 1e-12)


@pytest.mark.parametrize("nu", [0, 1])
def test_crossover_continuity(nu):
    rc = DEFAULT_CONFIG.crossover_radius
    for t in np.linspace(0, np.pi / 2, 100):
        lo = hankel1(nu, rc * (1 - 1e-12) * np.exp(1j * t))
        hi = hankel1(nu, rc * (1 + 1e-12) * np.exp(1j * t))
        assert abs(hi - lo) <= 1e-9 * abs(hi)


@given(st.floats(0.05, 60.0), st.floats(0.0, 1.4))
def test_derivative_identity(r, t):
    z = r * np.exp(1j * t)
    h = 1e-5 * abs(z)
    d = (hankel1(0, z + h) - hankel1(0, z - h)) / (2 * h)
    assert abs(d + hankel1(1, z)) <= 1e-6 * abs(hankel1(1, z))


def test_domain_errors():
    with pytest.raises(SingularityError):
        hankel1(0, 0.0)
    with pytest.raises(DomainError):
        hankel1(0, -1.0 + 0.5j)
    with pytest.raises(DomainError):
        hankel1(2, 1.0)
    with pytest.raises(DomainError):
        macdonald(0, -1.0)
    with pytest.raises(DomainError):
        macdonald(0, 1j)
