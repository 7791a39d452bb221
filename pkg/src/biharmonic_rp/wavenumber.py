"""Complex wavenumber of the damped biharmonic operator.

The dispersion relation is ``kappa**4 = k**2 + 1j*sigma*k`` and the root with
``Re(kappa) > 0`` and ``Im(kappa) >= 0`` is the physical one.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError

__all__ = ["Wavenumber", "complex_wavenumber", "wavenumber_from_kappa_r"]


@dataclass(frozen=True)
class Wavenumber:
    """Spectral parameters ``(k, sigma, kappa)`` of one frequency."""

    k: float
    sigma: float
    kappa: complex

    @property
    def kappa_r(self) -> float:
        return self.kappa.real

    @property
    def kappa_i(self) -> float:
        return self.kappa.imag

    @property
    def lossless(self) -> bool:
        return self.sigma == 0.0


def _radicals(k, sigma):
    s = np.sqrt(k**4 + sigma**2 * k**2)
    a = (s / 4.0) ** 0.5  # ((k^4 + sigma^2 k^2) / 16)^(1/4)
    b = ((s + k**2) / 8.0) ** 0.5
    return s, a, b


def complex_wavenumber(k, sigma=0.0):
    """Return the physical root of ``kappa**4 = k**2 + 1j*sigma*k``.

    Uses the closed-form nested radicals so the branch is fixed without a
    generic complex fourth root. The imaginary part is evaluated through the
    cancellation-free form ``sigma^2 k^2 / (sqrt(k^4 + sigma^2 k^2) + k^2)``.

    Parameters
    ----------
    k : float
        Real wavenumber, ``k > 0``.
    sigma : float
        Damping coefficient, ``sigma >= 0``.

    Returns
    -------
    Wavenumber
    """
    k = float(k)
    sigma = float(sigma)
    if not np.isfinite(k) or k <= 0.0:
        raise DomainError(f"wavenumber k must be positive, got {k!r}")
    if not np.isfinite(sigma) or sigma < 0.0:
        raise DomainError(f"damping sigma must be nonnegative, got {sigma!r}")
    if sigma == 0.0:
        return Wavenumber(k, 0.0, complex(np.sqrt(k), 0.0))
    s, a, b = _radicals(k, sigma)
    kappa_r = np.sqrt(a + b)
    # a - b = (s - k^2)/8/(a + b), with s - k^2 rewritten without cancellation
    diff = sigma**2 * k**2 / (s + k**2) / 8.0
    kappa_i = np.sqrt(diff / (a + b))
    return Wavenumber(k, sigma, complex(kappa_r, kappa_i))


def wavenumber_from_kappa_r(kappa_r, sigma=0.0):
    """Invert ``k -> Re(kappa(k))``; used for sweeps uniform in ``kappa_r``."""
    kappa_r = float(kappa_r)
    if kappa_r <= 0.0:
        raise DomainError(f"kappa_r must be positive, got {kappa_r!r}")
    if sigma == 0.0:
        return complex_wavenumber(kappa_r**2, 0.0)
    # Re(kappa) >= sqrt(k) and Re(kappa)^2 -> k, so k lies below kappa_r^2
    hi = kappa_r**2
    lo = hi
    while complex_wavenumber(lo, sigma).kappa_r > kappa_r:
        lo *= 0.5
    k = brentq(lambda t: complex_wavenumber(t, sigma).kappa_r - kappa_r, lo, hi,
               xtol=1e-15 * hi, rtol=4 * np.finfo(float).eps, maxiter=200)
    return complex_wavenumber(k, sigma)
