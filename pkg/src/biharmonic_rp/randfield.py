"""Gaussian random potentials with covariance symbol ``mu(x) |xi|^-m``.

The potential is factored as ``rho = sqrt(mu) * Z`` where ``Z`` is a
stationary Gaussian field synthesized on a periodic box with spectral density
``A_d (delta^2 + |xi|^2)^(-m/2)``. The amplitude ``A_d`` fixes the constant in
front of ``mu`` so that the frequency-averaged backscattering data converge to
``T_d`` without an extra factor:

* ``A_3 = 2^m``;
* ``A_2 = 2^m pi^2 / 4``, compensating the unit leading coefficient used in
  the 2D large-argument kernel expansion.

Kernel convention: ``C(h) = (2 pi)^-d int S(xi) e^{i xi.h} d xi``.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma

from .errors import ConfigurationError, DomainError, SingularityError

__all__ = [
    "StrengthProfile",
    "PeriodicGrid",
    "FieldRealization",
    "CovarianceEstimate",
    "CovarianceFit",
    "grid_for_box",
    "spectral_amplitude",
    "riesz_constant",
    "calibrated_ir_cutoff",
    "sample_field",
    "realization_seeds",
    "generate_ensemble",
    "field_sampler",
    "empirical_covariance",
    "covariance_model",
    "fit_covariance_constant",
]


def _check_order(m, dim):
    if not (dim - 1 < m <= dim):
        raise DomainError(f"order m must lie in ({dim - 1}, {dim}], got {m!r}")


@dataclass(frozen=True)
class StrengthProfile:
    """Nonnegative correlation strength on an axis-aligned box.

    ``kind="bumps"`` is a sum of ``a exp(1 - 1/(1 - |x-c|^2/R^2))`` bumps, each
    contained in the box. ``kind="constant"`` is ``amplitudes[0]`` times the
    indicator of the box (a test profile, not smooth).
    """

    dim: int
    box_lo: tuple
    box_hi: tuple
    centers: tuple = ()
    radii: tuple = ()
    amplitudes: tuple = ()
    kind: str = "bumps"

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ConfigurationError("dim must be 2 or 3")
        lo = np.asarray(self.box_lo, float)
        hi = np.asarray(self.box_hi, float)
        if lo.shape != (self.dim,) or hi.shape != (self.dim,) or np.any(hi <= lo):
            raise ConfigurationError("support box must have dim increasing bounds")
        if self.kind not in ("bumps", "constant"):
            raise ConfigurationError(f"unknown profile kind {self.kind!r}")
        if any(a < 0 for a in self.amplitudes):
            raise ConfigurationError("amplitudes must be nonnegative")
        if self.kind == "bumps":
            if not (len(self.centers) == len(self.radii) == len(self.amplitudes)):
                raise ConfigurationError("centers, radii and amplitudes differ in length")
            for c, r in zip(self.centers, self.radii):
                c = np.asarray(c, float)
                if r <= 0 or np.any(c - r < lo) or np.any(c + r > hi):
                    raise ConfigurationError("every bump must lie inside the support box")
        elif len(self.amplitudes) != 1:
            raise ConfigurationError("constant profile needs one amplitude")

    @classmethod
    def bumps(cls, centers, radii, amplitudes, box=((-0.5, -0.5), (0.5, 0.5))):
        centers = tuple(tuple(float(v) for v in c) for c in centers)
        return cls(len(box[0]), tuple(box[0]), tuple(box[1]), centers,
                   tuple(float(r) for r in radii), tuple(float(a) for a in amplitudes))

    @classmethod
    def constant(cls, value, box=((-0.5, -0.5), (0.5, 0.5))):
        return cls(len(box[0]), tuple(box[0]), tuple(box[1]), amplitudes=(float(value),),
                   kind="constant")

    @classmethod
    def zero(cls, box=((-0.5, -0.5), (0.5, 0.5))):
        return cls.constant(0.0, box)

    @property
    def is_zero(self):
        return all(a == 0 for a in self.amplitudes)

    @property
    def diameter(self):
        return float(np.linalg.norm(np.subtract(self.box_hi, self.box_lo)))

    def inside(self, points):
        p = np.asarray(points, float)
        return np.all((p >= self.box_lo) & (p <= self.box_hi), axis=-1)

    def __call__(self, points):
        return self.eval(points)

    def eval(self, points):
        """Evaluate at points of shape ``(..., dim)``."""
        p = np.asarray(points, float)
        if p.shape[-1] != self.dim:
            raise DomainError(f"points must have {self.dim} coordinates")
        inside = self.inside(p)
        if self.kind == "constant":
            return np.where(inside, self.amplitudes[0], 0.0)
        out = np.zeros(p.shape[:-1])
        for c, r, a in zip(self.centers, self.radii, self.amplitudes):
            s = np.sum((p - np.asarray(c)) ** 2, axis=-1) / (r * r)
            mask = s < 1.0
            out[mask] += a * np.exp(1.0 - 1.0 / (1.0 - s[mask]))
        return np.where(inside, out, 0.0)

    def to_dict(self):
        return {
            "dim": self.dim, "box_lo": list(self.box_lo), "box_hi": list(self.box_hi),
            "centers": [list(c) for c in self.centers], "radii": list(self.radii),
            "amplitudes": list(self.amplitudes), "kind": self.kind,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["dim"]), tuple(d["box_lo"]), tuple(d["box_hi"]),
                   tuple(tuple(c) for c in d.get("centers", [])), tuple(d.get("radii", [])),
                   tuple(d["amplitudes"]), d.get("kind", "bumps"))


@dataclass(frozen=True)
class PeriodicGrid:
    """Cell-centred grid on the periodic box ``[origin, origin + n h)^dim``."""

    dim: int
    n: int
    h: float
    origin: float

    @property
    def length(self):
        return self.n * self.h

    @property
    def axis(self):
        return self.origin + (np.arange(self.n) + 0.5) * self.h

    @property
    def shape(self):
        return (self.n,) * self.dim

    def nodes(self):
        ax = np.meshgrid(*([self.axis] * self.dim), indexing="ij")
        return np.stack(ax, axis=-1)

    def box_slices(self, lo, hi):
        """Index slices of the nodes lying in ``[lo, hi]`` (per axis)."""
        out = []
        ax = self.axis
        for a, b in zip(lo, hi):
            idx = np.nonzero((ax >= a - 1e-12) & (ax <= b + 1e-12))[0]
            out.append(slice(int(idx[0]), int(idx[-1]) + 1))
        return tuple(out)

    def to_dict(self):
        return {"dim": self.dim, "n": self.n, "h": self.h, "origin": self.origin}


def grid_for_box(lo, hi, h, margin=None):
    """Periodic grid whose nodes include the cell centres of the cube ``[lo, hi]``.

    ``margin`` defaults to half the box diameter.
    """
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    side = hi - lo
    if not np.allclose(side, side[0]):
        raise ConfigurationError("support box must be a cube")
    cells = side[0] / h
    if abs(cells - round(cells)) > 1e-9:
        raise ConfigurationError("grid step must divide the box side")
    if margin is None:
        margin = 0.5 * float(np.linalg.norm(side))
    pad = int(np.ceil(margin / h - 1e-9))
    n = int(round(cells)) + 2 * pad
    return PeriodicGrid(len(lo), n, float(h), float(lo[0] - pad * h))


@dataclass
class FieldRealization:
    grid: PeriodicGrid
    values: np.ndarray
    order_m: float
    seed: int
    ir_cutoff: float
    profile: StrengthProfile = None
    meta: dict = field(default_factory=dict)

    def restrict(self, lo=None, hi=None):
        """Samples on the nodes of ``[lo, hi]`` (defaults to the profile box)."""
        if lo is None:
            lo, hi = self.profile.box_lo, self.profile.box_hi
        return self.values[self.grid.box_slices(lo, hi)]


def spectral_amplitude(m, dim):
    """Constant ``A_d`` in ``S(xi) = A_d (delta^2 + |xi|^2)^(-m/2)``."""
    return 2.0**m * (np.pi**2 / 4.0 if dim == 2 else 1.0)


def riesz_constant(m, dim):
    """``c`` with ``(2 pi)^-d int |xi|^-m e^{i xi.h} d xi = c |h|^(m-d)``, ``m < d``."""
    return gamma((dim - m) / 2.0) / (2.0**m * np.pi ** (dim / 2.0) * gamma(m / 2.0))


def _wavenumber_sq(grid, real=False):
    f = 2.0 * np.pi * np.fft.fftfreq(grid.n, d=grid.h)
    axes = [f] * grid.dim
    if real:
        axes[-1] = 2.0 * np.pi * np.fft.rfftfreq(grid.n, d=grid.h)
    mesh = np.meshgrid(*axes, indexing="ij", sparse=True)
    return sum(a * a for a in mesh)


def _fit_lags(grid, diameter):
    hi = int(np.floor(diameter / 4.0 / grid.h + 1e-9))
    return np.arange(4, max(hi, 5) + 1)


def calibrated_ir_cutoff(m, grid, diameter):
    """Cutoff ``delta`` matching the periodized and free-space kernels.

    For ``m < d`` the lattice sum without the zero mode differs from the
    Riesz kernel by nearly a constant over the lags ``[4h, diam/4]``; choosing
    ``delta`` so the zero mode supplies that constant keeps the power law
    intact on the scale of ``D``. For ``m = d`` one lattice cell is used.
    """
    default = 2.0 * np.pi / grid.length
    if m >= grid.dim:
        return default
    k2 = _wavenumber_sq(grid)
    s = np.zeros(k2.shape)
    pos = k2 > 0
    s[pos] = k2[pos] ** (-m / 2.0)
    cov = np.real(np.fft.ifftn(s)) / grid.h**grid.dim
    lags = _fit_lags(grid, diameter)
    along = cov[(lags,) + (0,) * (grid.dim - 1)]
    b0 = np.mean(riesz_constant(m, grid.dim) * (lags * grid.h) ** (m - grid.dim) - along)
    if b0 <= 0:
        return default
    return float((b0 * grid.n**grid.dim * grid.h**grid.dim) ** (-1.0 / m))


def _check_grid(grid, profile):
    if grid.dim != profile.dim:
        raise ConfigurationError("grid and profile dimensions differ")
    margin = 0.5 * profile.diameter
    glo = grid.origin
    ghi = grid.origin + grid.length
    if np.any(np.asarray(profile.box_lo) - glo < margin - 1e-9) or \
            np.any(ghi - np.asarray(profile.box_hi) < margin - 1e-9):
        raise ConfigurationError(
            f"periodic box must exceed the support by diam(D)/2 = {margin:.4g} on every side")


def _spectral_filter(m, grid, delta):
    k2 = _wavenumber_sq(grid, real=True)
    return np.sqrt(spectral_amplitude(m, grid.dim) * (delta**2 + k2) ** (-m / 2.0))


def sample_field(mu, m, grid, seed, ir_cutoff=None, _filter=None):
    """Draw ``rho = sqrt(mu) Z`` on ``grid``.

    Parameters
    ----------
    mu : StrengthProfile
    m : float
        Order in ``(d-1, d]``.
    grid : PeriodicGrid
        Must exceed the support box by ``diam(D)/2`` on every side.
    seed : int
        Seed of the white noise (``numpy.random.default_rng``).
    ir_cutoff : float, optional
        ``delta``; defaults to ``calibrated_ir_cutoff``.

    Returns
    -------
    FieldRealization
    """
    _check_order(m, grid.dim)
    _check_grid(grid, mu)
    if ir_cutoff is None:
        ir_cutoff = calibrated_ir_cutoff(m, grid, mu.diameter)
    filt = _spectral_filter(m, grid, ir_cutoff) if _filter is None else _filter
    amp = np.sqrt(mu.eval(grid.nodes()))
    rng = np.random.default_rng(seed)
    white = rng.standard_normal(grid.shape)
    # irfftn of a Hermitian half-spectrum is real by construction
    z = np.fft.irfftn(filt * np.fft.rfftn(white), s=grid.shape, axes=tuple(range(grid.dim))) / grid.h ** (grid.dim / 2.0)
    return FieldRealization(grid, amp * z, float(m), int(seed), float(ir_cutoff), mu)


def realization_seeds(master_seed, count):
    """Per-realization 64-bit seeds derived from ``(master_seed, i)``."""
    seeds = []
    for i in range(count):
        state = np.random.SeedSequence([int(master_seed), i]).generate_state(2, np.uint32)
        seeds.append(int(state[0]) | (int(state[1]) << 32))
    return seeds


def field_sampler(mu, m, grid, ir_cutoff=None):
    """Callable ``seed -> FieldRealization`` sharing one spectral filter."""
    _check_order(m, grid.dim)
    _check_grid(grid, mu)
    if ir_cutoff is None:
        ir_cutoff = calibrated_ir_cutoff(m, grid, mu.diameter)
    filt = _spectral_filter(m, grid, ir_cutoff)

    def one(seed):
        return sample_field(mu, m, grid, seed, ir_cutoff, _filter=filt)

    return one


def generate_ensemble(mu, m, grid, master_seed, count, threads=1, ir_cutoff=None):
    """Independent realizations with seeds from ``realization_seeds``."""
    one = field_sampler(mu, m, grid, ir_cutoff)
    seeds = realization_seeds(master_seed, count)
    if threads <= 1:
        return [one(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, seeds))


@dataclass(frozen=True)
class CovarianceEstimate:
    lag: float
    estimate: float
    stderr: float


def empirical_covariance(ensemble, anchor, lags):
    """Sample covariance ``E[rho(z) rho(z + lag e)]`` averaged over axis directions.

    Parameters
    ----------
    ensemble : list of FieldRealization
        At least two realizations on a common grid.
    anchor : array_like
        A point, or an array of points to average over, snapped to the grid.
    lags : sequence of float
        Lags, rounded to multiples of the grid step.

    Returns
    -------
    list of CovarianceEstimate
        ``stderr`` is NaN when it is undefined (two realizations, or no spread).
    """
    if len(ensemble) < 2:
        raise ConfigurationError("need at least two realizations")
    grid = ensemble[0].grid
    for f in ensemble[1:]:
        if f.grid != grid or f.order_m != ensemble[0].order_m:
            raise ConfigurationError("realizations do not share grid and parameters")
    data = np.stack([f.values for f in ensemble])
    anchors = np.atleast_2d(np.asarray(anchor, float))
    idx = np.rint((anchors - grid.origin) / grid.h - 0.5).astype(int)
    count = len(ensemble)
    out = []
    for lag in lags:
        s = int(round(lag / grid.h))
        prods = np.zeros(count)
        terms = 0
        for a in idx:
            va = data[(slice(None),) + tuple(a % grid.n)]
            va = va - va.mean()
            for axis in range(grid.dim):
                for sign in (1, -1):
                    b = a.copy()
                    b[axis] += sign * s
                    vb = data[(slice(None),) + tuple(b % grid.n)]
                    prods += va * (vb - vb.mean())
                    terms += 1
        prods /= terms
        est = prods.sum() / (count - 1)
        if count > 2 and np.std(prods) > 0:
            err = np.std(prods, ddof=1) * count / (count - 1) / np.sqrt(count)
        else:
            err = float("nan")
        out.append(CovarianceEstimate(s * grid.h, float(est), float(err)))
    return out


def covariance_model(z, zp, mu, m, fitted_constant, dim=None):
    """Leading covariance ``c mu(z) |z - z'|^(m-d)`` (``c mu(z) ln|z - z'|`` for ``m = d``)."""
    z = np.asarray(z, float)
    zp = np.asarray(zp, float)
    dim = z.shape[-1] if dim is None else dim
    r = float(np.linalg.norm(z - zp))
    if r == 0:
        raise SingularityError("covariance kernel is singular at z = z'")
    muz = float(mu.eval(z)) if hasattr(mu, "eval") else float(mu)
    if m == dim:
        return fitted_constant * muz * np.log(r)
    return fitted_constant * muz * r ** (m - dim)


@dataclass(frozen=True)
class CovarianceFit:
    constant: float
    offset: float
    slope: float
    r2: float


def fit_covariance_constant(estimates, mu_value, m, dim):
    """Least-squares constant of ``covariance_model`` against estimates.

    For ``m < d`` the fit is ``estimate = c mu |lag|^(m-d)`` through the origin
    and ``slope`` is the log-log slope. For ``m = d`` an offset is fitted with
    ``c``, and ``slope`` is the coefficient of ``ln(lag)``. ``r2`` is the
    coefficient of determination of the respective linear fit.
    """
    lag = np.array([e.lag for e in estimates])
    est = np.array([e.estimate for e in estimates])
    if m == dim:
        g = np.log(lag)
        A = np.column_stack([mu_value * g, np.ones_like(g)])
        (c, off), *_ = np.linalg.lstsq(A, est, rcond=None)
        resid = est - A @ np.array([c, off])
        r2 = 1.0 - resid @ resid / np.sum((est - est.mean()) ** 2)
        return CovarianceFit(float(c), float(off), float(c * mu_value), float(r2))
    g = mu_value * lag ** (m - dim)
    c = float(g @ est / (g @ g))
    if np.any(est <= 0):
        slope, r2 = float("nan"), float("nan")
    else:
        x, y = np.log(lag), np.log(est)
        slope, icpt = np.polyfit(x, y, 1)
        resid = y - (slope * x + icpt)
        r2 = 1.0 - resid @ resid / np.sum((y - y.mean()) ** 2)
    return CovarianceFit(c, 0.0, float(slope), float(r2))
