"""Config-driven stages writing artifacts plus a JSON manifest each.

Every stage is a pure function of the config (and of earlier artifacts), so
rerunning a stage reproduces its files byte for byte.
"""

from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .estimator import (
    Sweep,
    born_diagnostics,
    estimate_T_ensemble,
    estimate_T_single,
    frequency_sweep,
    reference_T,
)
from .forward import potential_on_grid, solve_direct
from .inversion import assemble_forward_map, pick_lambda, recover_strength
from .io import read_csv, read_json, write_csv, write_json, write_manifest
from .randfield import field_sampler, generate_ensemble, realization_seeds
from .wavenumber import complex_wavenumber, wavenumber_from_kappa_r

__all__ = [
    "band_size",
    "potentials",
    "stage_synth",
    "stage_forward",
    "stage_sweep",
    "stage_estimate",
    "stage_diagnose",
    "stage_invert",
]


def band_size(band):
    """Frequencies in a band given ``per_decade`` (both ends included)."""
    if "n_freq" in band:
        return int(band["n_freq"])
    return int(round(np.log10(band["hi"] / band["lo"]) * band["per_decade"])) + 1


def potentials(cfg, count, master_seed=None, threads=1):
    """``count`` realizations restricted to the solver grid, shape ``(R,) + grid.shape``.

    Returns ``(batch, seeds)``. Each field is cut down to ``D`` as soon as it
    is drawn, so memory scales with the solver grid.
    """
    master = cfg.master_seed if master_seed is None else master_seed
    sg = cfg.scatter_grid()
    one = field_sampler(cfg.profile(), cfg.m, cfg.field_grid())
    seeds = realization_seeds(master, count)

    def cut(seed):
        return potential_on_grid(one(seed), sg)

    if threads <= 1:
        vals = [cut(s) for s in seeds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            vals = list(pool.map(cut, seeds))
    return np.stack(vals), seeds


def _finish(out, name, cfg, files, seeds=None, extra=None):
    return write_manifest(out, name, cfg.to_dict(), files, seeds=seeds, extra=extra)


def stage_synth(cfg, out, count=None, threads=1):
    """Draw the ensemble and store each field as raw float64 with JSON metadata."""
    from .io import save_field

    out = Path(out)
    count = cfg["ensemble"]["size"] if count is None else int(count)
    ens = generate_ensemble(cfg.profile(), cfg.m, cfg.field_grid(), cfg.master_seed, count,
                            threads)
    files = [save_field(f, out / "fields", name=f"field_{i:05d}") for i, f in enumerate(ens)]
    return _finish(out, "synth", cfg, files, seeds=[f.seed for f in ens],
                   extra={"count": count})


def stage_forward(cfg, out, k=None, realization=0):
    """One dense solve: source at the first point of ``U``, receivers on all of ``U``."""
    out = Path(out)
    k = cfg["band"]["lo"] ** 2 if k is None else float(k)
    wn = complex_wavenumber(k, cfg.sigma)
    batch, seeds = potentials(cfg, realization + 1)
    pts = cfg.points()
    sol = solve_direct(batch[realization], cfg.scatter_grid(), pts[0], pts, wn, cfg.solver())
    u = np.array([r.u for r in sol.receivers])
    us = np.array([r.us for r in sol.receivers])
    path = write_csv(out / "forward.csv", [f"x{i}" for i in range(cfg.dim)]
                     + ["re_u", "im_u", "re_us", "im_us"],
                     [pts[:, i] for i in range(cfg.dim)] + [u.real, u.imag, us.real, us.imag])
    return _finish(out, "forward", cfg, [path], seeds=[seeds[realization]],
                   extra={"k": k, "residual": sol.residual, "source": pts[0]})


def stage_sweep(cfg, out, mode="ensemble", points=None, count=None, band=None, n_freq=None,
                threads=1, master_seed=None, progress=None):
    """Backscattering sweep over ``U`` written as ``sweep.csv``."""
    out = Path(out)
    if mode == "single" and cfg.sigma != 0:
        raise ConfigurationError("sigma: single-realization sweeps need a lossless medium")
    count = (1 if mode == "single" else cfg["ensemble"]["size"]) if count is None else count
    pts = cfg.points() if points is None else np.asarray(points, float)
    if band is None:
        b = cfg["band"]
        band = (b["lo"], b["hi"]) if mode == "ensemble" else (b["lo"] ** 2, b["hi"] ** 2)
        n_freq = band_size(b) if n_freq is None else n_freq
    batch, seeds = potentials(cfg, count, master_seed, threads=threads)
    sw = frequency_sweep(batch, pts, band, n_freq, cfg.scatter_grid(), cfg.sigma, mode,
                         cfg.solver(), progress)
    path = sw.save_csv(out / "sweep.csv")
    return _finish(out, "sweep", cfg, [path], seeds=seeds,
                   extra={"mode": mode, "sigma": cfg.sigma, "band": list(band),
                          "n_freq": int(n_freq), "grid": cfg.scatter_grid().to_dict(),
                          "max_residual": float(np.max(sw.residual)), "m": cfg.m,
                          "dim": cfg.dim})


def load_sweep(directory):
    directory = Path(directory)
    man = read_json(directory / "sweep.manifest.json")
    return Sweep.load_csv(directory / "sweep.csv", man["sigma"], man["mode"]), man


def stage_estimate(cfg, out, sweep_dir=None):
    """``T_hat`` from a stored sweep (estimator chosen by the sweep mode)."""
    out = Path(out)
    sw, man = load_sweep(out if sweep_dir is None else sweep_dir)
    est = estimate_T_ensemble if man["mode"] == "ensemble" else estimate_T_single
    sd = est(sw, cfg.m, cfg.dim)
    path = sd.save_csv(out / "T_hat.csv")
    return _finish(out, "estimate", cfg, [path], extra={"mode": man["mode"], "band": sd.band})


def stage_diagnose(cfg, out, sweep_dir=None):
    """Born-term trajectories of a stored sweep and their decade averages."""
    out = Path(out)
    sw, _ = load_sweep(out if sweep_dir is None else sweep_dir)
    rep = born_diagnostics(sw, cfg.m, cfg.dim, cfg.profile())
    header, cols = rep.rows()
    path = write_csv(out / "born_trajectories.csv", header, cols)
    summary = write_json(out / "born_report.json", {"bottom": rep.bottom, "top": rep.top,
                                                    "averages": rep.averages})
    return _finish(out, "diagnose", cfg, [path, summary], extra={"averages": rep.averages})


def stage_invert(cfg, out, estimate_dir=None, lam=None):
    """Recover ``mu`` on the reconstruction grid from a stored ``T_hat``."""
    out = Path(out)
    src = Path(out if estimate_dir is None else estimate_dir)
    header, data = read_csv(src / "T_hat.csv")
    pts = np.column_stack([data[f"x{i}"] for i in range(cfg.dim)])
    T = data["T_hat"]
    grid = cfg.reconstruction_grid()
    fmap = assemble_forward_map(pts, grid)
    inv = cfg.data.get("inversion", {})
    if lam is None:
        if inv.get("lambda_mode", "fixed") == "discrepancy":
            noise = float(np.linalg.norm(np.nan_to_num(data["stderr"])))
            lam = pick_lambda(fmap, T, noise)
        else:
            lam = float(inv.get("lambda", 1e-10))
    mu_true = cfg.profile()(grid.nodes).reshape(grid.shape)
    est = recover_strength(fmap, T, lam, mu_true=mu_true)
    nodes = grid.nodes
    path = write_csv(out / "mu_hat.csv", [f"z{i}" for i in range(cfg.dim)] + ["mu_hat", "mu_true"],
                     [nodes[:, i] for i in range(cfg.dim)] + [est.mu_hat.ravel(), mu_true.ravel()])
    return _finish(out, "invert", cfg, [path],
                   extra={"lambda": est.lam, "iterations": est.iterations,
                          "data_residual": est.data_residual,
                          "rel_error_vs_truth": est.rel_error_vs_truth,
                          "pearson": est.pearson(mu_true) if np.ptp(est.mu_hat) > 0 else None})


def reference_curve(cfg, points, kappa_r):
    """Damped ``reference_T`` at each point and ``kappa_r`` (rows: frequencies)."""
    mu = cfg.profile()
    return np.array([[reference_T(mu, x, cfg.dim, wavenumber_from_kappa_r(kr, cfg.sigma))
                      for x in points] for kr in kappa_r])
