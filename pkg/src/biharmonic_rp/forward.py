"""Nystrom discretization of the Lippmann-Schwinger equation ``u = K u + Phi``.

``K f(z_i) = sum_j w_j Phi(z_i, z_j) rho(z_j) f(z_j)`` on the cell centres of
a uniform grid over ``D`` with midpoint weights ``w_j = h^d``. Because the
kernel only depends on ``z_i - z_j``, ``K`` is a block-Toeplitz product that
is applied matrix-free by zero-padded FFT convolution. ``solve_direct`` forms
the dense matrix and uses LU; ``backscatter`` solves many right-hand sides and
realizations at once with restarted GMRES on the matrix-free operator.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft
import scipy.linalg as sla
from scipy.optimize import brentq

from .errors import ConfigurationError, DomainError, IterationLimitError, ResonanceError
from .greens import phi, phi_radial
from .randfield import FieldRealization
from .wavenumber import complex_wavenumber

__all__ = [
    "ScatterGrid",
    "Receiver",
    "FieldSolution",
    "SolverConfig",
    "KernelOperator",
    "potential_on_grid",
    "assemble_system",
    "solve_direct",
    "receiver_kernel",
    "solve_lippmann_schwinger",
    "backscatter",
    "born_term",
    "born_partial_sum",
    "contraction_ratio",
    "locate_k0",
]


@dataclass(frozen=True)
class ScatterGrid:
    """Cell centres of the cube ``[lo, lo + n h]^dim``."""

    dim: int
    n: int
    h: float
    lo: float = -0.5

    def __post_init__(self):
        if self.dim not in (2, 3) or self.n < 1 or not self.h > 0:
            raise ConfigurationError("invalid scatter grid")

    @classmethod
    def from_box(cls, lo, hi, n):
        lo = np.asarray(lo, float)
        hi = np.asarray(hi, float)
        side = hi - lo
        if not np.allclose(side, side[0]):
            raise ConfigurationError("support box must be a cube")
        return cls(len(lo), int(n), float(side[0] / n), float(lo[0]))

    @property
    def shape(self):
        return (self.n,) * self.dim

    @property
    def size(self):
        return self.n**self.dim

    @property
    def axis(self):
        return self.lo + (np.arange(self.n) + 0.5) * self.h

    @property
    def nodes(self):
        mesh = np.meshgrid(*([self.axis] * self.dim), indexing="ij")
        return np.stack(mesh, axis=-1).reshape(-1, self.dim)

    @property
    def weights(self):
        return np.full(self.size, self.h**self.dim)

    @property
    def volume(self):
        return (self.n * self.h) ** self.dim

    @property
    def box(self):
        hi = self.lo + self.n * self.h
        return (self.lo,) * self.dim, (hi,) * self.dim

    def distance_to(self, points):
        """Euclidean distance of each point to the covered box."""
        p = np.atleast_2d(np.asarray(points, float))
        lo, hi = self.box
        gap = np.maximum(np.maximum(np.asarray(lo) - p, p - np.asarray(hi)), 0.0)
        return np.sqrt(np.sum(gap**2, axis=-1))

    def to_dict(self):
        return {"dim": self.dim, "n": self.n, "h": self.h, "lo": self.lo}


@dataclass(frozen=True)
class SolverConfig:
    residual_tol: float = 1e-10
    condition_limit: float = 1e14
    restart: int = 40
    max_restarts: int = 50
    # right-hand sides per batched FFT block
    block: int = 32


DEFAULT_SOLVER = SolverConfig()


@dataclass
class Receiver:
    x: np.ndarray
    u: complex
    u0: complex
    us: complex


@dataclass
class FieldSolution:
    wn: object
    source: np.ndarray
    u_on_grid: np.ndarray
    receivers: list = field(default_factory=list)
    residual: float = 0.0


def potential_on_grid(rho, grid):
    """Samples of ``rho`` on the scatter grid as an array of ``grid.shape``."""
    if isinstance(rho, FieldRealization):
        fg = rho.grid
        if abs(fg.h - grid.h) > 1e-12 * grid.h:
            raise ConfigurationError("field grid step differs from the scatter grid step")
        lo, hi = grid.box
        vals = rho.values[fg.box_slices(lo, hi)]
    else:
        vals = np.asarray(rho, dtype=float)
        if vals.ndim == 0:
            vals = np.full(grid.shape, float(vals))
    if vals.shape[-grid.dim:] != grid.shape:
        raise ConfigurationError(f"potential of shape {vals.shape} does not match grid {grid.shape}")
    return vals


class KernelOperator:
    """``f -> sum_j w_j Phi(z_i - z_j) f_j`` by zero-padded FFT convolution."""

    def __init__(self, grid, wn):
        self.grid = grid
        self.wn = wn
        n, d = grid.n, grid.dim
        off = np.arange(-(n - 1), n) * grid.h
        mesh = np.meshgrid(*([off] * d), indexing="ij", sparse=True)
        r = np.sqrt(sum(m * m for m in mesh))
        table = phi_radial(r.ravel(), wn, d).reshape(r.shape)
        self.table = table  # Phi at offsets (2n-1)^d, centre at index n-1
        padded = np.zeros((2 * n,) * d, dtype=complex)
        padded[(slice(0, 2 * n - 1),) * d] = table
        self._hat = sfft.fftn(padded) * grid.h**d
        self._axes = tuple(range(-d, 0))
        self._out = (slice(n - 1, 2 * n - 1),) * d

    def __call__(self, f):
        n, d = self.grid.n, self.grid.dim
        fh = sfft.fftn(f, s=(2 * n,) * d, axes=self._axes)
        full = sfft.ifftn(self._hat * fh, axes=self._axes)
        return full[(Ellipsis,) + self._out]


def assemble_system(rho, grid, wn):
    """Dense matrix ``I - K`` with ``K_ij = w_j Phi(z_i, z_j) rho(z_j)``.

    Diagonal kernel entries use ``phi_diagonal``.
    """
    vals = potential_on_grid(rho, grid).ravel()
    n, d = grid.n, grid.dim
    op = KernelOperator(grid, wn)
    idx = np.indices(grid.shape).reshape(d, -1)
    w = grid.h**d
    mat = np.empty((grid.size, grid.size), dtype=complex)
    table = op.table
    for i0 in range(0, grid.size, 512):
        rows = idx[:, i0:i0 + 512]
        diff = rows[:, :, None] - idx[:, None, :] + (n - 1)
        mat[i0:i0 + 512] = -w * table[tuple(diff)] * vals[None, :]
    mat[np.diag_indices(grid.size)] += 1.0
    return mat


def _kernel_matrix(grid, wn):
    """Unweighted ``Phi(z_i, z_j)``; used by tests to check symmetry."""
    n, d = grid.n, grid.dim
    op = KernelOperator(grid, wn)
    idx = np.indices(grid.shape).reshape(d, -1)
    diff = idx[:, :, None] - idx[:, None, :] + (n - 1)
    return op.table[tuple(diff)]


def receiver_kernel(points, grid, wn):
    """``Phi(x, z_j)`` for each point, shape ``(len(points),) + grid.shape``."""
    pts = np.atleast_2d(np.asarray(points, float))
    if pts.shape[-1] != grid.dim:
        raise DomainError("point dimension differs from grid dimension")
    nodes = grid.nodes
    out = np.empty((len(pts), grid.size), dtype=complex)
    for i, x in enumerate(pts):
        out[i] = phi(nodes, x, wn, grid.dim)
    return out.reshape((len(pts),) + grid.shape)


def _check_outside(grid, points):
    if np.any(grid.distance_to(points) <= 0):
        raise DomainError("sources and receivers must lie at positive distance from D")


def _condition_number(lu_piv, anorm):
    lu, _ = lu_piv
    gecon = sla.get_lapack_funcs("gecon", (lu,))
    rcond, info = gecon(lu, anorm, norm="1")
    return np.inf if rcond == 0 else 1.0 / rcond


def solve_direct(rho, grid, y, receivers, wn, config=DEFAULT_SOLVER):
    """Solve ``(I - K) u = Phi(., y)`` by dense LU with partial pivoting.

    Parameters
    ----------
    rho : FieldRealization or ndarray
    grid : ScatterGrid
    y : array_like
        Source point outside ``D``.
    receivers : array_like
        Receiver points outside ``D``, shape ``(X, dim)``.
    wn : Wavenumber

    Returns
    -------
    FieldSolution

    Raises
    ------
    ResonanceError
        If the 1-norm condition estimate exceeds ``config.condition_limit`` or
        the residual cannot be brought below ``config.residual_tol``.
    """
    y = np.asarray(y, float)
    recv = np.atleast_2d(np.asarray(receivers, float))
    _check_outside(grid, np.vstack([y[None, :], recv]))
    vals = potential_on_grid(rho, grid).ravel()
    mat = assemble_system(vals.reshape(grid.shape), grid, wn)
    rhs = phi(grid.nodes, y, wn, grid.dim)
    anorm = np.max(np.sum(np.abs(mat), axis=0))
    lu_piv = sla.lu_factor(mat, check_finite=False)
    cond = _condition_number(lu_piv, anorm)
    if cond > config.condition_limit:
        raise ResonanceError(f"condition estimate {cond:.3e} exceeds {config.condition_limit:.1e}"
                             f" at k={wn.k:.6g}")
    u = sla.lu_solve(lu_piv, rhs, check_finite=False)
    scale = np.max(np.abs(rhs))
    res = np.max(np.abs(rhs - mat @ u)) / scale
    for _ in range(3):
        if res <= config.residual_tol:
            break
        u = u + sla.lu_solve(lu_piv, rhs - mat @ u, check_finite=False)
        res = np.max(np.abs(rhs - mat @ u)) / scale
    if res > config.residual_tol:
        raise ResonanceError(f"residual {res:.3e} above tolerance at k={wn.k:.6g}")
    w = grid.h**grid.dim
    out = FieldSolution(wn, y, u.reshape(grid.shape), residual=float(res))
    kx = receiver_kernel(recv, grid, wn).reshape(len(recv), -1)
    u0 = phi(recv, y, wn, grid.dim)
    us = kx @ (w * vals * u)
    for x, a, b in zip(recv, np.atleast_1d(u0), us):
        out.receivers.append(Receiver(x, complex(a + b), complex(a), complex(b)))
    return out


def _gmres(apply, b, x, target, restart, max_restarts):
    """Restarted GMRES run columnwise on a batch.

    ``b`` and ``x`` have shape ``(B, N)``; ``target`` is the per-column bound
    on ``||b - A x||_inf``. Returns ``(x, residual_inf)``.
    """
    nb, nn = b.shape
    for _ in range(max_restarts + 1):
        r = b - apply(x)
        res = np.max(np.abs(r), axis=1)
        if np.all(res <= target):
            return x, res
        beta = np.linalg.norm(r, axis=1)
        goal = 0.1 * target
        V = np.zeros((restart + 1, nb, nn), dtype=complex)
        H = np.zeros((nb, restart + 1, restart), dtype=complex)
        cs = np.zeros((nb, restart))
        sn = np.zeros((nb, restart), dtype=complex)
        g = np.zeros((nb, restart + 1), dtype=complex)
        g[:, 0] = beta
        safe = np.where(beta > 0, beta, 1.0)
        V[0] = r / safe[:, None]
        steps = 0
        for j in range(restart):
            w = apply(V[j])
            for i in range(j + 1):
                hij = np.einsum("bn,bn->b", V[i].conj(), w)
                H[:, i, j] = hij
                w = w - hij[:, None] * V[i]
            hn = np.linalg.norm(w, axis=1)
            H[:, j + 1, j] = hn
            V[j + 1] = w / np.where(hn > 0, hn, 1.0)[:, None]
            for i in range(j):
                t = cs[:, i] * H[:, i, j] + sn[:, i] * H[:, i + 1, j]
                H[:, i + 1, j] = -np.conj(sn[:, i]) * H[:, i, j] + cs[:, i] * H[:, i + 1, j]
                H[:, i, j] = t
            a = H[:, j, j]
            bb = H[:, j + 1, j]
            rr = np.sqrt(np.abs(a) ** 2 + np.abs(bb) ** 2)
            rr = np.where(rr > 0, rr, 1.0)
            phase = np.where(np.abs(a) > 0, a / np.where(np.abs(a) > 0, np.abs(a), 1.0), 1.0)
            cs[:, j] = np.abs(a) / rr
            sn[:, j] = phase * np.conj(bb) / rr
            H[:, j, j] = phase * rr
            H[:, j + 1, j] = 0.0
            g[:, j + 1] = -np.conj(sn[:, j]) * g[:, j]
            g[:, j] = cs[:, j] * g[:, j]
            steps = j + 1
            if np.all(np.abs(g[:, j + 1]) <= goal):
                break
        yv = np.zeros((nb, steps), dtype=complex)
        for i in range(steps - 1, -1, -1):
            acc = g[:, i] - np.einsum("bk,bk->b", H[:, i, i + 1:steps], yv[:, i + 1:steps])
            diag = H[:, i, i]
            yv[:, i] = np.where(diag != 0, acc / np.where(diag != 0, diag, 1.0), 0.0)
        x = x + np.einsum("kbn,bk->bn", V[:steps], yv)
    r = b - apply(x)
    res = np.max(np.abs(r), axis=1)
    if np.all(res <= target):
        return x, res
    raise IterationLimitError("GMRES did not reach the residual tolerance", iterate=x, residual=res)


def solve_lippmann_schwinger(kernel, rho_vals, rhs, scale=None, config=DEFAULT_SOLVER):
    """Solve ``(I - K_rho) u = rhs`` for a batch.

    ``rho_vals`` broadcasts against ``rhs`` of shape ``(..., *grid.shape)``.
    The residual is bounded by ``config.residual_tol * scale`` in the max norm
    per right-hand side; ``scale`` defaults to ``max|rhs|``.
    """
    shape = kernel.grid.shape
    lead = rhs.shape[: rhs.ndim - len(shape)]
    rho_b = np.broadcast_to(rho_vals, lead + shape).reshape(-1, *shape)
    b = rhs.reshape(-1, *shape)
    flat = b.reshape(len(b), -1)
    if scale is None:
        scale = np.max(np.abs(flat), axis=1)
    scale = np.broadcast_to(np.asarray(scale, float).ravel(), (len(b),))

    def apply(v):
        v = v.reshape(-1, *shape)
        return (v - kernel(rho_b * v)).reshape(len(v), -1)

    target = config.residual_tol * np.where(scale > 0, scale, 1.0)
    x, res = _gmres(apply, flat.copy(), flat.copy(), target, config.restart, config.max_restarts)
    res = res / np.where(scale > 0, scale, 1.0)
    return x.reshape(rhs.shape), res.reshape(lead)


def backscatter(rho_batch, grid, points, wn, config=DEFAULT_SOLVER, kernel=None, recv=None):
    """Backscattered fields ``u^s(x, x)`` with their leading Born terms.

    Parameters
    ----------
    rho_batch : ndarray
        Potentials of shape ``(R,) + grid.shape``.
    points : array_like
        Source-receiver points, shape ``(X, dim)``.

    Returns
    -------
    dict
        ``us``, ``u1``, ``u2``, ``b`` of shape ``(R, X)`` with
        ``us = u1 + u2 + b`` and ``b`` the Born remainder ``sum_{n>=3} u_n``,
        plus ``residual`` (max-norm LS residual per solve, relative to
        ``max|Phi(., x)|``).
    """
    pts = np.atleast_2d(np.asarray(points, float))
    _check_outside(grid, pts)
    rho_batch = np.asarray(rho_batch, float)
    if rho_batch.shape[1:] != grid.shape:
        raise ConfigurationError("potential batch does not match the grid")
    kernel = KernelOperator(grid, wn) if kernel is None else kernel
    phix = receiver_kernel(pts, grid, wn) if recv is None else recv
    w = grid.h**grid.dim
    scale = np.max(np.abs(phix.reshape(len(pts), -1)), axis=1)
    nr, nx = len(rho_batch), len(pts)
    out = {key: np.zeros((nr, nx), dtype=complex) for key in ("us", "u1", "u2", "b")}
    out["residual"] = np.zeros((nr, nx))
    axes = tuple(range(-grid.dim, 0))
    xstep = min(nx, config.block)
    rstep = max(1, config.block // xstep)
    for r0 in range(0, nr, rstep):
        for x0 in range(0, nx, xstep):
            rb = rho_batch[r0:r0 + rstep][:, None]
            px = phix[x0:x0 + xstep][None]
            g = w * rb * px  # weighted receiver kernel
            t1 = kernel(rb * px)
            t2 = kernel(rb * t1)
            # the remainder solves (I - K) v = K^2 Phi, u = Phi + K Phi + v
            sc = np.broadcast_to(scale[x0:x0 + xstep], t2.shape[:2])
            v, res = solve_lippmann_schwinger(kernel, rb, t2, sc, config)
            idx = (slice(r0, r0 + rstep), slice(x0, x0 + xstep))
            out["u1"][idx] = np.sum(g * px, axis=axes)
            out["u2"][idx] = np.sum(g * t1, axis=axes)
            out["b"][idx] = np.sum(g * v, axis=axes)
            out["residual"][idx] = res
    out["us"] = out["u1"] + out["u2"] + out["b"]
    return out


def _born_sequence(n, rho, grid, y, wn):
    vals = potential_on_grid(rho, grid)
    kernel = KernelOperator(grid, wn)
    u = phi(grid.nodes, np.asarray(y, float), wn, grid.dim).reshape(grid.shape)
    terms = [u]
    for _ in range(n):
        u = kernel(vals * u)
        terms.append(u)
    return vals, terms


def _evaluate_term(term_prev, vals, grid, x, wn):
    kx = phi(grid.nodes, np.asarray(x, float), wn, grid.dim).reshape(grid.shape)
    return complex(np.sum(grid.h**grid.dim * kx * vals * term_prev))


def born_term(n, rho, grid, x, y, wn):
    """``u_n(x, y)``: ``K`` applied ``n`` times to ``Phi(., y)``, evaluated at ``x``."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    _check_outside(grid, np.vstack([np.asarray(x, float), np.asarray(y, float)]))
    if n == 0:
        return complex(phi(np.asarray(x, float), np.asarray(y, float), wn, grid.dim))
    vals, terms = _born_sequence(n - 1, rho, grid, y, wn)
    return _evaluate_term(terms[-1], vals, grid, x, wn)


def born_partial_sum(N, rho, grid, x, y, wn, return_terms=False):
    """``sum_{n=0}^{N} u_n(x, y)``; optionally also the individual terms."""
    if N < 0:
        raise DomainError("N must be nonnegative")
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    _check_outside(grid, np.vstack([x, y]))
    terms = [complex(phi(x, y, wn, grid.dim))]
    if N > 0:
        vals, seq = _born_sequence(N - 1, rho, grid, y, wn)
        terms += [_evaluate_term(t, vals, grid, x, wn) for t in seq]
    total = complex(np.sum(terms))
    return (total, terms) if return_terms else total


def contraction_ratio(rho, grid, wn, iters=40, seed=0):
    """Estimate of the operator 2-norm ``sup ||K u|| / ||u||`` of the discrete ``K``.

    Power iteration on ``K^H K``. For a rough ``rho`` the matrix is far from
    normal, so this is much larger than the spectral radius; only a norm
    below 1 makes every Born remainder shrink.
    """
    vals = potential_on_grid(rho, grid)
    kernel = KernelOperator(grid, wn)
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    u /= np.linalg.norm(u)
    s = 0.0
    for _ in range(iters):
        v = kernel(vals * u)
        # K is complex symmetric, so K^H = conj(K_op) rho
        w = vals * np.conj(kernel(np.conj(v)))
        s = float(np.linalg.norm(w))
        if s == 0:
            return 0.0
        u = w / s
    return float(np.sqrt(s))


def locate_k0(rho, grid, sigma, k_lo, k_hi, iters=40, xtol=1e-3):
    """Smallest ``k`` in ``[k_lo, k_hi]`` past which the contraction ratio is below 1.

    Bisection on ``q(k) - 1``. Returns ``k_lo`` when ``q(k_lo) < 1``; raises
    ``DomainError`` when ``q(k_hi) >= 1``.
    """
    def f(k):
        return contraction_ratio(rho, grid, complex_wavenumber(k, sigma), iters) - 1.0

    if f(k_hi) >= 0:
        raise DomainError(f"contraction ratio is not below 1 at k={k_hi}")
    if f(k_lo) < 0:
        return float(k_lo)
    return float(brentq(f, k_lo, k_hi, xtol=xtol * k_lo))
