"""Nonnegative Tikhonov recovery of ``mu`` from samples of ``T_d``.

``T_d(x_i) ~ sum_j A_ij mu_j`` with ``A_ij = c_d w_j |x_i - z_j|^{-2(d-1)}``.
The objective is scale-free:

    F(mu) = ||A mu - T||^2 / ||A||_2^2 + lam ||L mu||^2 / ||L||_2^2,

with ``L`` the forward-difference gradient on the reconstruction grid and zero
values assumed outside ``D`` (``mu`` has compact support in ``D``). It is
minimized over ``mu >= 0`` by accelerated projected gradient with
backtracking, using a function-value restart so the objective never
increases.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import ConfigurationError, DomainError, IterationLimitError
from .estimator import kernel_constant

__all__ = [
    "ForwardMap",
    "StrengthEstimate",
    "ring_points",
    "circle_points",
    "assemble_forward_map",
    "gradient_operator",
    "recover_strength",
    "pick_lambda",
    "lambda_grid",
]


def circle_points(n, radius=2.0, center=(0.0, 0.0), phase=0.0):
    """``n`` equispaced points on a circle."""
    t = phase + 2.0 * np.pi * np.arange(n) / n
    return np.column_stack([center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)])


def ring_points(radii, per_ring, center=(0.0, 0.0)):
    """Equispaced points on concentric circles, staggered between rings."""
    pts = [circle_points(per_ring, r, center, phase=np.pi * i / per_ring)
           for i, r in enumerate(radii)]
    return np.vstack(pts)


@dataclass
class ForwardMap:
    points: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    shape: tuple
    h: float
    dim: int
    matrix: np.ndarray

    def __matmul__(self, mu):
        return self.matrix @ np.ravel(mu)


def assemble_forward_map(points, grid, d=None):
    """Discretize ``T_d`` on ``grid`` (a ``ScatterGrid`` over ``D``).

    Raises
    ------
    DomainError
        If a point lies in the closed box covered by ``grid``.
    """
    d = grid.dim if d is None else d
    pts = np.atleast_2d(np.asarray(points, float))
    if pts.shape[1] != d:
        raise DomainError("point dimension differs from grid dimension")
    if np.any(grid.distance_to(pts) <= 0):
        raise DomainError("measurement points must lie outside D")
    nodes = grid.nodes
    w = grid.weights
    r2 = np.sum((pts[:, None, :] - nodes[None, :, :]) ** 2, axis=-1)
    A = kernel_constant(d) * w[None, :] / r2 ** (d - 1)
    return ForwardMap(pts, nodes, w, grid.shape, grid.h, d, A)


def gradient_operator(shape, h):
    """Forward differences along each axis with zero extension outside the grid.

    Returns a sparse matrix of shape ``(sum_a (n_a + 1) prod_{b != a} n_b, prod n)``
    and its exact 2-norm.
    """
    blocks = []
    norm2 = 0.0
    for axis, n in enumerate(shape):
        diff = sp.diags([-np.ones(n), np.ones(n)], [0, -1], shape=(n + 1, n)) / h
        mats = [sp.identity(m, format="csr") for m in shape]
        mats[axis] = diff
        op = mats[0]
        for m in mats[1:]:
            op = sp.kron(op, m, format="csr")
        blocks.append(op)
        norm2 += (4.0 / h**2) * np.sin(n * np.pi / (2.0 * (n + 1))) ** 2
    return sp.vstack(blocks, format="csr"), float(np.sqrt(norm2))


@dataclass
class StrengthEstimate:
    mu_hat: np.ndarray
    lam: float
    data_residual: float
    objective: float
    iterations: int
    rel_error_vs_truth: float = None
    history: list = field(default_factory=list, repr=False)

    def relative_error(self, mu_true):
        mu_true = np.ravel(mu_true)
        return float(np.linalg.norm(self.mu_hat.ravel() - mu_true) / np.linalg.norm(mu_true))

    def pearson(self, mu_true):
        return float(np.corrcoef(self.mu_hat.ravel(), np.ravel(mu_true))[0, 1])


class _Problem:
    def __init__(self, fmap, T_hat, lam):
        A = fmap.matrix if isinstance(fmap, ForwardMap) else np.asarray(fmap, float)
        self.A = A
        self.T = np.asarray(T_hat, float).ravel()
        if A.shape[0] != self.T.size:
            raise ConfigurationError("data length differs from the number of rows")
        self.sA = float(np.linalg.norm(A, 2))
        if isinstance(fmap, ForwardMap):
            self.L, self.sL = gradient_operator(fmap.shape, fmap.h)
        else:
            self.L, self.sL = None, 1.0
        self.lam = float(lam)

        # Hessian of F / 2, precomputed: one dense product per gradient
        H = (A.T @ A) / self.sA**2
        if self.L is not None and self.lam > 0:
            H = H + (self.lam / self.sL**2) * (self.L.T @ self.L).toarray()
        self.H = H
        self.rhs = (A.T @ self.T) / self.sA**2

    def value(self, mu):
        # residual form keeps F accurate when it is near zero
        r = self.A @ mu - self.T
        f = (r @ r) / self.sA**2
        if self.L is not None and self.lam > 0:
            lm = self.L @ mu
            f += self.lam * (lm @ lm) / self.sL**2
        return f

    def grad(self, mu):
        return 2.0 * (self.H @ mu - self.rhs)


def _solve_face(H, rhs, free):
    s = np.zeros(len(rhs))
    Hf = H[np.ix_(free, free)]
    try:
        c = sla.cho_factor(Hf, check_finite=False)
        s[free] = sla.cho_solve(c, rhs[free], check_finite=False)
    except sla.LinAlgError:
        s[free] = np.linalg.lstsq(Hf, rhs[free], rcond=None)[0]
    return s


def _face_step(prob, x, fx, max_inner=None):
    """Active-set refinement seeded with the free set ``{x > 0}``.

    Alternates exact minimization on the current face with moves to the
    first blocking bound, and releases the bound with the most negative
    multiplier once the face minimizer is feasible (Lawson-Hanson
    iteration). Returns ``(x, f)``, unchanged unless ``F`` decreases.
    """
    H, rhs = prob.H, prob.rhs
    n = len(x)
    max_inner = 3 * n if max_inner is None else max_inner
    free = x > 0
    cur = x.copy()
    for _ in range(max_inner):
        if not free.any():
            w = rhs - H @ cur
            j = int(np.argmax(w))
            if w[j] <= 1e-14 * np.max(np.abs(rhs)):
                break
            free[j] = True
        s = _solve_face(H, rhs, free)
        if np.all(s[free] > 0):
            cur = s
            w = rhs - H @ cur  # minus half the gradient
            w[free] = -np.inf
            j = int(np.argmax(w))
            if w[j] <= 1e-14 * np.max(np.abs(rhs)):
                break
            free[j] = True
            continue
        block = free & (s <= 0)
        alpha = np.min(cur[block] / (cur[block] - s[block]))
        cur = cur + alpha * (s - cur)
        cur[cur < 0] = 0.0
        free &= cur > 1e-300
    fc = prob.value(cur)
    return (cur, fc) if fc < fx else (x, fx)


def recover_strength(fmap, T_hat, lam, x0=None, max_iter=100_000, rtol=1e-10, mu_true=None,
                     face_every=200):
    """Minimize ``F`` over ``mu >= 0``.

    Accelerated projected gradient with backtracking. Every ``face_every``
    iterations a Newton step restricted to the current free set (``mu > 0``)
    is tried and kept only if it lowers ``F``, so the objective sequence is
    non-increasing throughout.

    Parameters
    ----------
    fmap : ForwardMap or ndarray
        A plain matrix is accepted (then ``L`` is omitted).
    T_hat : array_like
    lam : float
        Relative regularization weight, ``lam >= 0``.
    x0 : array_like, optional
        Feasible starting point (default zeros).
    max_iter : int
    rtol : float
        Stop once a projected-gradient step lowers ``F`` by at most ``rtol * F``.
    face_every : int
        Period of the free-set Newton step; 0 disables it.

    Returns
    -------
    StrengthEstimate

    Raises
    ------
    IterationLimitError
        After ``max_iter`` iterations; carries the last iterate and residual.
    """
    if lam < 0:
        raise DomainError("lambda must be nonnegative")
    prob = _Problem(fmap, T_hat, lam)
    n = prob.A.shape[1]
    x = np.zeros(n) if x0 is None else np.maximum(np.asarray(x0, float).ravel(), 0.0)
    fx = prob.value(x)
    y, t = x.copy(), 1.0
    lip = 2.0 * (1.0 + prob.lam)  # exact bound after normalization
    step_l = lip / 4.0
    history = [fx]
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        fy, gy = prob.value(y), prob.grad(y)
        while True:  # backtracking on the quadratic upper bound
            z = np.maximum(y - gy / step_l, 0.0)
            dz = z - y
            fz = prob.value(z)
            if fz <= fy + gy @ dz + 0.5 * step_l * (dz @ dz) * (1 + 1e-12) + 1e-300:
                break
            step_l = min(2.0 * step_l, lip)
            if step_l == lip:
                z = np.maximum(y - gy / step_l, 0.0)
                fz = prob.value(z)
                break
        if fz <= fx:
            decrease = fx - fz
            t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            y = z + ((t - 1.0) / t_new) * (z - x)
            x, t = z, t_new
            fx = fz
            history.append(fx)
            if decrease <= rtol * max(fx, 1e-300) or fx == 0.0:
                converged = True
                break
        else:
            history.append(fx)
            if t == 1.0:
                # a plain projected step from the incumbent cannot lower F
                converged = True
                break
            # momentum overshoot: restart from the incumbent, F unchanged
            y, t = x.copy(), 1.0
        if face_every and it % face_every == 0:
            xn, fn = _face_step(prob, x, fx)
            if fn < fx:
                x, fx = xn, fn
                y, t = x.copy(), 1.0
                history[-1] = fx
        assert history[-1] <= history[-2] * (1 + 1e-15) + 1e-300, "objective increased"
    r = prob.A @ x - prob.T
    res = float(np.linalg.norm(r))
    shape = fmap.shape if isinstance(fmap, ForwardMap) else x.shape
    if not converged:
        raise IterationLimitError(f"projected gradient hit {max_iter} iterations",
                                  iterate=x.reshape(shape), residual=res)
    est = StrengthEstimate(x.reshape(shape), float(lam), res, float(fx), it, history=history)
    if mu_true is not None:
        est.rel_error_vs_truth = est.relative_error(mu_true)
    return est


def lambda_grid(lo=1e-14, hi=1.0, per_decade=2):
    n = int(round(np.log10(hi / lo) * per_decade)) + 1
    return np.logspace(np.log10(lo), np.log10(hi), n)


def pick_lambda(fmap, T_hat, noise_estimate, grid=None, **solver):
    """Discrepancy principle on a log grid.

    Returns the smallest grid ``lam`` whose residual ``||A mu(lam) - T||`` is
    at least ``noise_estimate``, or the largest grid value if none is.
    """
    grid = lambda_grid() if grid is None else np.sort(np.asarray(grid, float))
    if grid.size == 0:
        raise ConfigurationError("empty lambda grid")
    if noise_estimate <= 0:
        return float(grid[0])
    solver.setdefault("rtol", 1e-8)
    for lam in grid:
        try:
            est = recover_strength(fmap, T_hat, lam, **solver)
            res = est.data_residual
        except IterationLimitError as err:
            res = err.residual
        if res >= noise_estimate:
            return float(lam)
    return float(grid[-1])
