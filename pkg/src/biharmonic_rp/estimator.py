"""Frequency sweeps of backscattering data and the second-moment estimators.

Two estimators of ``T_d(x) = c_d int_D mu(z) |x - z|^{-2(d-1)} dz``:

* ensemble: band average in ``kappa_r`` of ``kappa_r^{m+14-2d} E|u^s|^2``;
* single realization (lossless only): band average in ``k`` of
  ``k^{(m+13)/2-d} |u^s|^2``, normalized by ``2 (sqrt(k_b) - sqrt(k_a))``,
  which is the length of the band in ``kappa = sqrt(k)``.

Both use the trapezoid rule on a uniform grid.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError, ModeError
from .forward import DEFAULT_SOLVER, KernelOperator, backscatter, potential_on_grid, receiver_kernel
from .io import read_csv, write_csv
from .randfield import FieldRealization
from .wavenumber import Wavenumber, complex_wavenumber, wavenumber_from_kappa_r

__all__ = [
    "SweepRecord",
    "Sweep",
    "StrengthData",
    "DiagnosticReport",
    "frequency_grid",
    "frequency_sweep",
    "ensemble_weight",
    "single_weight",
    "estimate_T_ensemble",
    "estimate_T_single",
    "reference_T",
    "kernel_constant",
    "born_diagnostics",
    "trapezoid",
]


def trapezoid(y, x, axis=-1):
    """Trapezoid rule along ``axis``; ``x`` is one-dimensional."""
    y = np.moveaxis(np.asarray(y), axis, -1)
    dx = np.diff(np.asarray(x, float))
    return np.sum(0.5 * (y[..., 1:] + y[..., :-1]) * dx, axis=-1)


def ensemble_weight(m, d):
    """Exponent of ``kappa_r`` in the ensemble estimator: ``m + 14 - 2d``."""
    return m + 14 - 2 * d


def single_weight(m, d):
    """Exponent of ``k`` in the single-realization estimator: ``(m + 13)/2 - d``."""
    return (m + 13) / 2 - d


def kernel_constant(d):
    """``1 / (8^4 pi^{4(d-2)})``."""
    return 1.0 / (8.0**4 * np.pi ** (4 * (d - 2)))


@dataclass
class SweepRecord:
    x: tuple
    k: float
    wn: Wavenumber
    us: complex
    realization_id: int
    u1: complex = None
    u2: complex = None
    born_residual: complex = None


@dataclass
class Sweep:
    """Sweep data as arrays of shape ``(R, F, X)``.

    ``points`` has shape ``(X, d)``, ``k`` shape ``(F,)``; ``u1``, ``u2`` and
    ``b`` (the Born remainder ``sum_{n>=3} u_n``) are optional diagnostics.
    """

    points: np.ndarray
    k: np.ndarray
    sigma: float
    us: np.ndarray
    realization_ids: np.ndarray
    mode: str = "ensemble"
    u1: np.ndarray = None
    u2: np.ndarray = None
    b: np.ndarray = None
    residual: np.ndarray = None
    meta: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def wavenumbers(self):
        return [complex_wavenumber(k, self.sigma) for k in self.k]

    @property
    def kappa(self):
        return np.array([w.kappa for w in self.wavenumbers])

    @property
    def has_diagnostics(self):
        return self.u1 is not None and self.u2 is not None and self.b is not None

    def __len__(self):
        return self.us.size

    def to_records(self):
        wns = self.wavenumbers
        out = []
        for r, rid in enumerate(self.realization_ids):
            for f, wn in enumerate(wns):
                for i, x in enumerate(self.points):
                    diag = {}
                    if self.has_diagnostics:
                        diag = dict(u1=complex(self.u1[r, f, i]), u2=complex(self.u2[r, f, i]),
                                    born_residual=complex(self.b[r, f, i]))
                    out.append(SweepRecord(tuple(float(v) for v in x), float(self.k[f]), wn,
                                           complex(self.us[r, f, i]), int(rid), **diag))
        return out

    @classmethod
    def from_records(cls, records, sigma=None, mode="ensemble"):
        """Rebuild the array form; records are sorted by ``(x, k, realization)``."""
        if not records:
            raise ConfigurationError("no records")
        recs = sorted(records, key=lambda r: (r.x, r.k, r.realization_id))
        points = sorted({r.x for r in recs})
        ks = sorted({r.k for r in recs})
        rids = sorted({r.realization_id for r in recs})
        shape = (len(rids), len(ks), len(points))
        if len(recs) != np.prod(shape):
            raise ConfigurationError("records do not form a complete (x, k, realization) grid")
        pi = {p: i for i, p in enumerate(points)}
        ki = {k: i for i, k in enumerate(ks)}
        ri = {r: i for i, r in enumerate(rids)}
        diag = all(r.u1 is not None for r in recs)
        arrays = {n: np.zeros(shape, complex) for n in ("us", "u1", "u2", "b")}
        for r in recs:
            idx = (ri[r.realization_id], ki[r.k], pi[r.x])
            arrays["us"][idx] = r.us
            if diag:
                arrays["u1"][idx] = r.u1
                arrays["u2"][idx] = r.u2
                arrays["b"][idx] = r.born_residual
        sig = recs[0].wn.sigma if sigma is None else sigma
        return cls(np.array(points, float), np.array(ks), sig, arrays["us"], np.array(rids), mode,
                   *(arrays[n] if diag else None for n in ("u1", "u2", "b")))

    def concat_frequencies(self, other):
        """Union of two sweeps on the same points and realizations.

        Frequencies present in both are kept once (from ``self``).
        """
        if not (np.array_equal(self.points, other.points)
                and np.array_equal(self.realization_ids, other.realization_ids)):
            raise ConfigurationError("sweeps differ in points or realizations")
        keep = ~np.isin(other.k, self.k)
        k = np.concatenate([self.k, other.k[keep]])
        order = np.argsort(k, kind="stable")

        def cat(a, b):
            if a is None or b is None:
                return None
            return np.concatenate([a, b[:, keep]], axis=1)[:, order]

        return Sweep(self.points, k[order], self.sigma, cat(self.us, other.us),
                     self.realization_ids, self.mode, cat(self.u1, other.u1),
                     cat(self.u2, other.u2), cat(self.b, other.b),
                     cat(self.residual, other.residual), dict(self.meta))

    def columns(self):
        wns = self.wavenumbers
        R, F, X = self.us.shape
        rr, ff, xx = np.meshgrid(np.arange(R), np.arange(F), np.arange(X), indexing="ij")
        ff, xx, rr = ff.ravel(), xx.ravel(), rr.ravel()
        header = [f"x{i}" for i in range(self.dim)] + ["k", "kappa_r", "kappa_i", "re_us",
                                                         "im_us", "realization_id"]
        cols = [self.points[xx, i] for i in range(self.dim)]
        kr = np.array([w.kappa_r for w in wns])
        ki = np.array([w.kappa_i for w in wns])
        us = self.us.ravel()
        cols += [self.k[ff], kr[ff], ki[ff], us.real, us.imag, self.realization_ids[rr]]
        if self.has_diagnostics:
            for name in ("u1", "u2", "b"):
                v = getattr(self, name).ravel()
                header += [f"re_{name}", f"im_{name}"]
                cols += [v.real, v.imag]
        return header, cols

    def save_csv(self, path):
        header, cols = self.columns()
        return write_csv(path, header, cols)

    @classmethod
    def load_csv(cls, path, sigma, mode="ensemble"):
        header, data = read_csv(path)
        dim = sum(1 for h in header if h.startswith("x") and h[1:].isdigit())
        diag = "re_u1" in header
        recs = []
        for i in range(len(data["k"])):
            x = tuple(float(data[f"x{j}"][i]) for j in range(dim))
            k = float(data["k"][i])
            extra = {}
            if diag:
                extra = dict(u1=complex(data["re_u1"][i], data["im_u1"][i]),
                             u2=complex(data["re_u2"][i], data["im_u2"][i]),
                             born_residual=complex(data["re_b"][i], data["im_b"][i]))
            recs.append(SweepRecord(x, k, complex_wavenumber(k, sigma),
                                    complex(data["re_us"][i], data["im_us"][i]),
                                    int(data["realization_id"][i]), **extra))
        return cls.from_records(recs, sigma, mode)


def frequency_grid(band, n_freq, sigma=0.0, mode="ensemble"):
    """Uniform grid in ``kappa_r`` (ensemble) or in ``k`` (single realization)."""
    lo, hi = float(band[0]), float(band[1])
    if not (0 < lo < hi) or n_freq < 2:
        raise ConfigurationError("band must satisfy 0 < lo < hi with at least two frequencies")
    if mode == "ensemble":
        return [wavenumber_from_kappa_r(v, sigma) for v in np.linspace(lo, hi, n_freq)]
    if mode == "single":
        return [complex_wavenumber(v, sigma) for v in np.linspace(lo, hi, n_freq)]
    raise ModeError(f"unknown mode {mode!r}")


def _potential_batch(rho, grid):
    if isinstance(rho, FieldRealization):
        rho = [rho]
    if isinstance(rho, np.ndarray) and rho.shape == grid.shape:
        rho = rho[None]
    if isinstance(rho, (list, tuple)):
        ids = [getattr(r, "seed", i) for i, r in enumerate(rho)]
        return np.stack([potential_on_grid(r, grid) for r in rho]), np.arange(len(rho)), ids
    arr = np.asarray(rho, float)
    return arr, np.arange(len(arr)), list(range(len(arr)))


def frequency_sweep(rho, points, band, n_freq, grid, sigma=0.0, mode="ensemble",
                    config=DEFAULT_SOLVER, progress=None):
    """Backscattering sweep ``u^s(x, k)`` with ``y = x`` for every realization.

    Parameters
    ----------
    rho : FieldRealization, list of FieldRealization or ndarray
        One realization or an ensemble; arrays have shape ``(R,) + grid.shape``.
    points : array_like
        Points of ``U``, shape ``(X, d)``.
    band : (float, float)
        Band in ``kappa_r`` (ensemble mode) or in ``k`` (single mode).
    n_freq : int
    grid : ScatterGrid

    Returns
    -------
    Sweep
        With the diagnostics ``u1``, ``u2``, ``b`` filled in.
    """
    pts = np.atleast_2d(np.asarray(points, float))
    batch, rids, seeds = _potential_batch(rho, grid)
    wns = frequency_grid(band, n_freq, sigma, mode)
    R, F, X = len(batch), len(wns), len(pts)
    arrays = {n: np.zeros((R, F, X), complex) for n in ("us", "u1", "u2", "b")}
    resid = np.zeros((R, F, X))
    for f, wn in enumerate(wns):
        try:
            out = backscatter(batch, grid, pts, wn, config, KernelOperator(grid, wn),
                              receiver_kernel(pts, grid, wn))
        except Exception as exc:
            raise type(exc)(f"sweep failed at k={wn.k:.10g}: {exc}") from exc
        for n in arrays:
            arrays[n][:, f] = out[n]
        resid[:, f] = out["residual"]
        if progress is not None:
            progress(f + 1, F)
    meta = {"band": [float(band[0]), float(band[1])], "n_freq": int(n_freq),
            "seeds": [int(s) for s in seeds], "grid": grid.to_dict()}
    return Sweep(pts, np.array([w.k for w in wns]), float(sigma), arrays["us"], rids, mode,
                 arrays["u1"], arrays["u2"], arrays["b"], resid, meta)


@dataclass
class StrengthData:
    points: np.ndarray
    T_hat: np.ndarray
    stderr: np.ndarray
    band: tuple
    mode: str
    m: float
    d: int
    sigma: float

    @property
    def negative_flags(self):
        """Points where ``T_hat < -3 stderr``."""
        return self.T_hat < -3.0 * np.nan_to_num(self.stderr)

    def save_csv(self, path):
        header = [f"x{i}" for i in range(self.d)] + ["T_hat", "stderr"]
        cols = [self.points[:, i] for i in range(self.d)] + [self.T_hat, self.stderr]
        return write_csv(path, header, cols)


def _sorted(sweep):
    order_k = np.argsort(sweep.k, kind="stable")
    keys = [tuple(p) for p in sweep.points]
    order_x = sorted(range(len(keys)), key=lambda i: keys[i])
    order_r = np.argsort(sweep.realization_ids, kind="stable")
    us = sweep.us[order_r][:, order_k][:, :, order_x]
    return sweep.points[order_x], sweep.k[order_k], us


def _check_uniform(x, what):
    dx = np.diff(x)
    if len(x) < 2 or np.any(dx <= 0) or np.max(np.abs(dx - dx.mean())) > 1e-8 * abs(dx.mean()):
        raise ConfigurationError(f"records are not on a common uniform {what} grid")


def estimate_T_ensemble(sweep, m, d):
    """Ensemble estimator on a uniform ``kappa_r`` grid.

    ``T_hat(x) = (kappa_b - kappa_a)^{-1} int kappa_r^{m+14-2d} mean_R |u^s|^2 d kappa_r``.
    ``stderr`` is the standard error across realizations.
    """
    if isinstance(sweep, list):
        sweep = Sweep.from_records(sweep)
    if sweep.mode != "ensemble":
        raise ModeError("ensemble estimator needs ensemble-mode records")
    points, k, us = _sorted(sweep)
    kr = np.array([complex_wavenumber(v, sweep.sigma).kappa_r for v in k])
    _check_uniform(kr, "kappa_r")
    wt = kr ** ensemble_weight(m, d)
    per_real = trapezoid(wt[None, :, None] * np.abs(us) ** 2, kr, axis=1) / (kr[-1] - kr[0])
    R = len(per_real)
    T = per_real.mean(axis=0)
    err = per_real.std(axis=0, ddof=1) / np.sqrt(R) if R > 1 else np.full(T.shape, np.nan)
    return StrengthData(points, T, err, (float(kr[0]), float(kr[-1])), "ensemble", m, d,
                        sweep.sigma)


def estimate_T_single(sweep, m, d):
    """Single-realization estimator on a uniform ``k`` grid (lossless media only).

    ``T_hat(x) = (2 (sqrt(k_b) - sqrt(k_a)))^{-1} int k^{(m+13)/2-d} |u^s|^2 dk``.
    """
    if isinstance(sweep, list):
        sweep = Sweep.from_records(sweep, mode="single")
    if sweep.sigma != 0:
        raise ModeError("the single-realization estimator requires sigma = 0")
    if len(sweep.realization_ids) != 1:
        raise ModeError("the single-realization estimator takes exactly one realization")
    points, k, us = _sorted(sweep)
    _check_uniform(k, "k")
    wt = k ** single_weight(m, d)
    T = trapezoid(wt[:, None] * np.abs(us[0]) ** 2, k, axis=0)
    T = T / (2.0 * (np.sqrt(k[-1]) - np.sqrt(k[0])))
    return StrengthData(points, T, np.full(T.shape, np.nan), (float(k[0]), float(k[-1])),
                        "single", m, d, 0.0)


def _quadrature_nodes(mu, n_quad):
    """Midpoint nodes and weights covering the support of ``mu``."""
    d = mu.dim
    boxes = []
    if mu.kind == "constant":
        boxes.append((np.asarray(mu.box_lo, float), np.asarray(mu.box_hi, float)))
    else:
        for c, r in zip(mu.centers, mu.radii):
            boxes.append((np.asarray(c) - r, np.asarray(c) + r))
    for lo, hi in boxes:
        hstep = (hi - lo) / n_quad
        axes = [lo[i] + (np.arange(n_quad) + 0.5) * hstep[i] for i in range(d)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        yield mesh, np.prod(hstep)


def reference_T(mu, x, d=None, wn=None, n_quad=None):
    """``T_d(x)`` by midpoint quadrature over the support of ``mu``.

    With ``wn`` given, the damped limit of ``kappa_r^{m+14-2d} E|u_1|^2``:
    ``(kappa_r/|kappa|)^{2(7-d)} c_d int e^{-4 kappa_i |x-z|} mu(z) |x-z|^{-2(d-1)} dz``.

    Each bump is integrated on its own bounding box, where the integrand is
    smooth with compact support.
    """
    d = mu.dim if d is None else d
    x = np.asarray(x, float)
    if mu.inside(x):
        raise DomainError("reference_T needs x outside D")
    if mu.is_zero:
        return 0.0
    n_quad = (400 if d == 2 else 80) if n_quad is None else n_quad
    total = 0.0
    for nodes, w in _quadrature_nodes(mu, n_quad):
        r = np.sqrt(np.sum((nodes - x) ** 2, axis=-1))
        vals = mu.eval(nodes) / r ** (2 * (d - 1))
        if wn is not None:
            vals = vals * np.exp(-4.0 * wn.kappa_i * r)
        total += w * np.sum(vals)
    total *= kernel_constant(d)
    if wn is not None:
        total *= (wn.kappa_r / abs(wn.kappa)) ** (2 * (7 - d))
    return float(total)


@dataclass
class DiagnosticReport:
    """Born-term trajectories against ``kappa_r`` with decade averages.

    ``ratio`` is ``kappa_r^{m+14-2d} E|u_1|^2 / reference_T(damped)`` averaged
    over points; ``u2`` and ``remainder`` are the weighted ``E|u_2|^2`` and
    ``E|b|^2`` averaged over points.
    """

    kappa_r: np.ndarray
    ratio: np.ndarray
    u2: np.ndarray
    remainder: np.ndarray
    bottom: tuple
    top: tuple
    averages: dict

    def rows(self):
        return ["kappa_r", "ratio", "weighted_u2", "weighted_remainder"], [
            self.kappa_r, self.ratio, self.u2, self.remainder]


def _decade_average(kr, y, lo, hi):
    sel = (kr >= lo * (1 - 1e-12)) & (kr <= hi * (1 + 1e-12))
    if sel.sum() < 2:
        raise ConfigurationError("fewer than two frequencies in a decade")
    return float(trapezoid(y[sel], kr[sel]) / (kr[sel][-1] - kr[sel][0]))


def born_diagnostics(sweep, m, d, mu=None):
    """Trajectories of the three Born diagnostics over the band.

    Without ``mu`` the ratio trajectory is left as NaN. Decades are
    ``[kappa_a, 10 kappa_a]`` and ``[kappa_b / 10, kappa_b]``.
    """
    if not sweep.has_diagnostics:
        raise ConfigurationError("sweep carries no Born diagnostics")
    wns = sweep.wavenumbers
    kr = np.array([w.kappa_r for w in wns])
    wt = kr ** ensemble_weight(m, d)
    u1 = wt[:, None] * np.mean(np.abs(sweep.u1) ** 2, axis=0)
    u2 = (wt[:, None] * np.mean(np.abs(sweep.u2) ** 2, axis=0)).mean(axis=1)
    rem = (wt[:, None] * np.mean(np.abs(sweep.b) ** 2, axis=0)).mean(axis=1)
    if mu is not None and not mu.is_zero:
        ref = np.array([[reference_T(mu, x, d, wn) for x in sweep.points] for wn in wns])
        ratio = (u1 / ref).mean(axis=1)
    elif mu is not None:
        ratio = np.zeros(len(kr))
    else:
        ratio = np.full(len(kr), np.nan)
    bottom = (float(kr[0]), float(10 * kr[0]))
    top = (float(kr[-1] / 10), float(kr[-1]))
    avg = {}
    for name, y in (("ratio", ratio), ("u2", u2), ("remainder", rem)):
        avg[f"{name}_bottom"] = _decade_average(kr, y, *bottom)
        avg[f"{name}_top"] = _decade_average(kr, y, *top)
    return DiagnosticReport(kr, ratio, u2, rem, bottom, top, avg)
