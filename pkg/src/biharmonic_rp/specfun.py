"""Hankel and Macdonald functions of order 0 and 1 in the closed right half-plane.

Three evaluation regimes are combined for ``hankel1``:

* ascending series ``J_nu + i Y_nu`` for ``|z| < crossover_radius``;
* Hankel's large-argument expansion for ``|z| >= crossover_radius``;
* inside the crossover disc, close to the positive imaginary axis, where
  ``H_nu`` is exponentially small and the series cancels catastrophically,
  the trapezoidal rule applied to ``K_nu(w) = int_0^inf exp(-w cosh t)
  cosh(nu t) dt`` with ``w = -iz``.

``macdonald`` is reduced to ``hankel1`` through ``K_nu(z) = (pi/2) i^(nu+1)
H_nu(iz)``, using ``K_nu(conj z) = conj K_nu(z)`` to keep ``iz`` inside the
supported sector.
"""

from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import DomainError, SingularityError

__all__ = ["SpecFunConfig", "DEFAULT_CONFIG", "hankel1", "macdonald"]

EULER_GAMMA = 0.57721566490153286061


@dataclass(frozen=True)
class SpecFunConfig:
    crossover_radius: float = 12.0
    series_terms: int = 40
    asym_terms: int = 20
    # Series is abandoned once |z| + Im(z) exceeds this (cancellation ~ e^budget).
    cancellation_budget: float = 14.0

    def __post_init__(self):
        if not self.crossover_radius > 0:
            raise ValueError("crossover_radius must be positive")
        if self.series_terms < 1 or self.asym_terms < 1:
            raise ValueError("term caps must be >= 1")


DEFAULT_CONFIG = SpecFunConfig()


def _check_order(nu):
    if nu not in (0, 1):
        raise DomainError(f"only orders 0 and 1 are implemented, got {nu!r}")


def _ascending(nu, z, nterms):
    """J_nu(z) + i Y_nu(z) from the ascending series."""
    q = -(z * z) / 4.0
    log_term = np.log(z / 2.0) + EULER_GAMMA
    if nu == 0:
        term = np.ones_like(z)
        jsum = term.copy()
        ysum = np.zeros_like(z)
        harmonic = 0.0
        for k in range(1, nterms):
            term = term * q / (k * k)
            harmonic += 1.0 / k
            jsum += term
            ysum -= harmonic * term
        y = (2.0 / np.pi) * (log_term * jsum + ysum)
        return jsum + 1j * y
    half = z / 2.0
    term = np.ones_like(z)
    jsum = term.copy()
    ysum = term.copy()  # H_0 + H_1 = 1 for k = 0
    h_k = 0.0
    for k in range(1, nterms):
        term = term * q / (k * (k + 1))
        h_k += 1.0 / k
        jsum += term
        ysum += (2.0 * h_k + 1.0 / (k + 1)) * term
    j1 = half * jsum
    y1 = -2.0 / (np.pi * z) + (2.0 / np.pi) * log_term * j1 - half * ysum / np.pi
    return j1 + 1j * y1


def _asym_coefficients(nu, nterms):
    mu = 4.0 * nu * nu
    coeffs = [1.0]
    for k in range(1, nterms):
        coeffs.append(coeffs[-1] * (mu - (2 * k - 1) ** 2) / (k * 8.0))
    return coeffs


def _asymptotic(nu, z, nterms):
    total = np.zeros_like(z)
    inv = 1.0 / z
    power = np.ones_like(z)
    for k, a in enumerate(_asym_coefficients(nu, nterms)):
        total += (1j**k) * a * power
        power = power * inv
    phase = np.exp(1j * (z - nu * np.pi / 2.0 - np.pi / 4.0))
    return np.sqrt(2.0 / (np.pi * z)) * phase * total


def _macdonald_quadrature(nu, w):
    """K_nu(w) for Re(w) > 0 by the trapezoidal rule on the cosh integral."""
    a = np.arctan2(w.real, np.abs(w.imag))  # half-width of the strip of decay
    # aliasing error ~ exp(-pi a / step) times the integrand on Im t = a/2,
    # which exceeds |K| by at most exp(|w| (sin a - sin a/2))
    growth = np.abs(w) * (np.sin(a) - np.sin(a / 2.0))
    step = np.pi * a / (36.0 + growth)
    t_max = np.arccosh(np.maximum(45.0 / w.real, 1.0)) + 2 * step
    nodes = int(np.ceil(np.max(t_max / step))) + 1
    # nodes past t_max contribute below exp(-45) relative and are kept for vectorization
    t = step[:, None] * np.arange(nodes)[None, :]
    f = np.exp(-w[:, None] * np.cosh(t))
    if nu == 1:
        f = f * np.cosh(t)
    return step * (f.sum(axis=1) - 0.5 * f[:, 0])


def hankel1(nu, z, config=DEFAULT_CONFIG):
    """Hankel function of the first kind ``H_nu^(1)(z)`` for ``nu in {0, 1}``.

    Parameters
    ----------
    nu : int
        Order, 0 or 1.
    z : complex or array_like
        Argument with ``Re(z) >= 0`` and ``z != 0``.

    Returns
    -------
    complex or ndarray
    """
    _check_order(nu)
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(z == 0):
        raise SingularityError("H_nu^(1) is singular at z = 0")
    if np.any(z.real < -1e-14 * np.abs(z)):
        raise DomainError("hankel1 supports only |arg z| <= pi/2")
    out = np.empty_like(z)
    mod = np.abs(z)
    big = mod >= config.crossover_radius
    tiny_h = ~big & (mod + z.imag > config.cancellation_budget)
    series = ~big & ~tiny_h
    if big.any():
        out[big] = _asymptotic(nu, z[big], config.asym_terms)
    if series.any():
        out[series] = _ascending(nu, z[series], config.series_terms)
    if tiny_h.any():
        w = -1j * z[tiny_h]
        out[tiny_h] = (2.0 / (np.pi * 1j)) * (-1j) ** nu * _macdonald_quadrature(nu, w)
    return out[0] if scalar else out


def macdonald(nu, z, config=DEFAULT_CONFIG):
    """Modified Bessel function of the second kind ``K_nu(z)``, ``Re(z) > 0``."""
    _check_order(nu)
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(z.real <= 0):
        raise DomainError("macdonald requires Re(z) > 0")
    upper = z.imag > 0
    # for Im z > 0 evaluate at conj(z) so that i*conj(z) has Re >= 0
    zz = np.where(upper, np.conj(z), z)
    val = (np.pi / 2.0) * (1j ** (nu + 1)) * hankel1(nu, 1j * zz, config)
    val = np.where(upper, np.conj(val), val)
    return val[0] if scalar else val


def hankel_asymptotic_coefficient(nu, k):
    """``a_k(nu)`` of Hankel's expansion, exposed for the truncated kernel."""
    _check_order(nu)
    num = 1.0
    for l in range(1, k + 1):
        num *= 4.0 * nu * nu - (2 * l - 1) ** 2
    return num / (factorial(k) * 8.0**k)
