"""Fundamental solution of ``Delta^2 u - kappa^4 u = -delta_y`` in 2D and 3D.

The kernel is continuous across the diagonal, with a logarithmic singularity
only in its derivatives. In 2D the difference ``H_0(kappa r) - H_0(i kappa r)``
is summed as one series for small ``|kappa r|``, so the two ``log`` terms
cancel analytically instead of numerically.
"""

from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import DomainError, SingularityError
from .specfun import hankel1, hankel_asymptotic_coefficient, macdonald
from .wavenumber import Wavenumber

__all__ = [
    "GreensEval",
    "AsymCoeff",
    "phi",
    "phi_radial",
    "phi_diagonal",
    "phi_truncated",
    "asym_coeff",
    "evaluate",
]

EULER_GAMMA = 0.57721566490153286061
# below this |kappa r| the 2D difference series is used
SMALL_ARGUMENT = 4.0
_DIFF_TERMS = 40


@dataclass(frozen=True)
class GreensEval:
    dim: int
    wn: Wavenumber
    value: complex


@dataclass(frozen=True)
class AsymCoeff:
    j: int
    c: complex


def _check_dim(dim):
    if dim not in (2, 3):
        raise DomainError(f"dimension must be 2 or 3, got {dim!r}")


def phi_diagonal(wn, dim):
    """Value of the kernel at ``x = y``.

    ``-i/(8 kappa^2)`` in 2D and ``-(1+i)/(8 pi kappa)`` in 3D.
    """
    _check_dim(dim)
    kappa = wn.kappa
    if dim == 2:
        return -1j / (8.0 * kappa * kappa)
    return -(1.0 + 1j) / (8.0 * np.pi * kappa)


def _hankel_difference_series(a):
    """``H_0(a) - H_0(i a)`` from the ascending series of both terms."""
    q = a * a / 4.0
    log_term = np.log(a / 2.0) + EULER_GAMMA
    term = np.ones_like(a)
    j0 = term.copy()
    odd = np.zeros_like(a)  # sum over odd k of q^k / k!^2
    odd_h = np.zeros_like(a)  # same, weighted by harmonic numbers
    harmonic = 0.0
    for k in range(1, _DIFF_TERMS):
        term = term * q / (k * k)
        harmonic += 1.0 / k
        if k % 2:
            j0 -= term
            odd += term
            odd_h += harmonic * term
        else:
            j0 += term
    # J_0(a) - J_0(ia) = -2 odd; Y-series difference contributes 2 odd_h
    return j0 + (2j / np.pi) * (-2.0 * log_term * odd + 2.0 * odd_h)


def phi_radial(r, wn, dim):
    """Kernel as a function of the distance ``r = |x - y|`` (array-valued)."""
    _check_dim(dim)
    scalar = np.ndim(r) == 0
    r = np.atleast_1d(np.asarray(r, dtype=float))
    kappa = wn.kappa
    out = np.empty(r.shape, dtype=complex)
    diag = r == 0
    out[diag] = phi_diagonal(wn, dim)
    rr = r[~diag]
    a = kappa * rr
    if dim == 3:
        # e^{i a} - e^{-a} without cancellation at small a
        num = np.expm1(1j * a) - np.expm1(-a)
        out[~diag] = -num / (8.0 * np.pi * kappa * kappa * rr)
    else:
        vals = np.empty(a.shape, dtype=complex)
        small = np.abs(a) < SMALL_ARGUMENT
        if small.any():
            vals[small] = _hankel_difference_series(a[small])
        if (~small).any():
            ab = a[~small]
            # H_0(i a) = (2 / (pi i)) K_0(a)
            vals[~small] = hankel1(0, ab) - (2.0 / (np.pi * 1j)) * macdonald(0, ab)
        out[~diag] = -1j / (8.0 * kappa * kappa) * vals
    return out[0] if scalar else out


def _distance(x, y, dim):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != dim or y.shape[-1] != dim:
        raise DomainError(f"points must have {dim} coordinates")
    return np.sqrt(np.sum((x - y) ** 2, axis=-1))


def phi(x, y, wn, dim=None):
    """Fundamental solution ``Phi(x, y, k)``.

    Parameters
    ----------
    x, y : array_like
        Points of shape ``(..., dim)``; broadcast against each other.
    wn : Wavenumber
    dim : int, optional
        2 or 3; inferred from the trailing axis of ``x`` when omitted.

    Returns
    -------
    complex or ndarray
        ``-(e^{i kappa r} - e^{-kappa r}) / (8 pi kappa^2 r)`` in 3D and
        ``-(i / (8 kappa^2)) (H_0(kappa r) - H_0(i kappa r))`` in 2D, with the
        analytic diagonal value at ``r = 0``.
    """
    if dim is None:
        dim = np.shape(x)[-1]
    _check_dim(dim)
    return phi_radial(_distance(x, y, dim), wn, dim)


def evaluate(x, y, wn, dim=None):
    """Scalar ``phi`` wrapped with its metadata."""
    if dim is None:
        dim = np.shape(x)[-1]
    return GreensEval(dim, wn, complex(phi(x, y, wn, dim)))


def asym_coeff(j):
    """Coefficient ``C_j`` of the 2D large-argument kernel expansion.

    ``C_0 = 1`` and, for ``j >= 1``,
    ``C_j = sqrt(2/pi) 8^-j / j! prod_{l=1}^{j} (2l-1)^2 e^{-i pi/4}``.

    These are the coefficients in the published normalization. They differ
    from the ones generated by Hankel's expansion by the factor
    ``sqrt(2/pi) e^{-i pi/4} (-i)^j`` (absent at ``j = 0``), which
    ``phi_truncated`` restores; see ``hankel_coeff``.
    """
    j = int(j)
    if j < 0:
        raise DomainError("j must be nonnegative")
    if j == 0:
        return 1.0 + 0j
    prod = 1
    for l in range(1, j + 1):
        prod *= (2 * l - 1) ** 2
    return complex(np.sqrt(2.0 / np.pi) * prod / (factorial(j) * 8.0**j)
                   * np.exp(-1j * np.pi / 4.0))


def hankel_coeff(j):
    """Coefficient making the truncated expansion consistent with ``phi``.

    ``sqrt(2/pi) e^{-i pi/4} i^j a_j(0)`` with ``a_j`` from Hankel's series,
    i.e. ``sqrt(2/pi) e^{-i pi/4} (-i)^j prod (2l-1)^2 / (j! 8^j)``.
    """
    j = int(j)
    if j < 0:
        raise DomainError("j must be nonnegative")
    return complex(np.sqrt(2.0 / np.pi) * np.exp(-1j * np.pi / 4.0)
                   * (1j**j) * hankel_asymptotic_coefficient(0, j))


def phi_truncated(x, y, wn, N):
    """Partial sum ``Phi_N`` of the 2D large-argument expansion.

    ``-sum_{j=0}^{N} c_j / (8 kappa^2 (kappa r)^{j+1/2})
    (i e^{i kappa r} - i^{-j+1/2} e^{-kappa r})`` with ``c_j = hankel_coeff(j)``.
    """
    r = _distance(x, y, 2)
    if np.any(r == 0):
        raise SingularityError("truncated expansion diverges at r = 0")
    if N < 0:
        raise DomainError("N must be nonnegative")
    kappa = wn.kappa
    a = kappa * r
    total = 0.0
    for j in range(N + 1):
        bracket = 1j * np.exp(1j * a) - (1j ** (0.5 - j)) * np.exp(-a)
        total = total + hankel_coeff(j) * bracket / a ** (j + 0.5)
    return -total / (8.0 * kappa * kappa)
