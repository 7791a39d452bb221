import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biharmonic_rp import complex_wavenumber
from biharmonic_rp.errors import ConfigurationError, DomainError, ModeError
from biharmonic_rp.estimator import (
    Sweep,
    born_diagnostics,
    ensemble_weight,
    estimate_T_ensemble,
    estimate_T_single,
    frequency_grid,
    frequency_sweep,
    kernel_constant,
    reference_T,
    single_weight,
)
from biharmonic_rp.forward import ScatterGrid, backscatter
from biharmonic_rp.randfield import StrengthProfile
from biharmonic_rp.wavenumber import wavenumber_from_kappa_r

BOX = ((-0.5, -0.5), (0.5, 0.5))
PTS = np.array([[2.0, 0.0], [0.0, -1.5], [-1.2, 1.2]])


def synthetic(weighted, band, n_freq, sigma=1.0, R=3, mode="ensemble", points=PTS, m=1.5):
    """Sweep whose weighted intensity equals ``weighted(kappa_r or k, r, i)``."""
    wns = frequency_grid(band, n_freq, sigma, mode)
    k = np.array([w.k for w in wns])
    var = np.array([w.kappa_r for w in wns]) if mode == "ensemble" else k
    d = points.shape[1]
    expo = ensemble_weight(m, d) if mode == "ensemble" else single_weight(m, d)
    us = np.zeros((R, len(k), len(points)), complex)
    for r in range(R):
        for i in range(len(points)):
            mag = np.sqrt(weighted(var, r, i) / var**expo)
            us[r, :, i] = mag * np.exp(1j * (r + i + var))
    return Sweep(points, k, sigma, us, np.arange(R), mode)


def test_weight_exponents():
    assert ensemble_weight(1.5, 2) == 11.5
    assert ensemble_weight(2.5, 3) == 10.5
    assert single_weight(1.5, 2) == 5.25
    assert single_weight(2.5, 3) == 4.75
    assert kernel_constant(2) == 1 / 8**4
    assert kernel_constant(3) == pytest.approx(1 / (8**4 * np.pi**4), rel=1e-15)


def test_zero_data_gives_zero_estimate():
    sd = estimate_T_ensemble(synthetic(lambda v, r, i: 0 * v, (1.0, 5.0), 9), 1.5, 2)
    assert np.all(sd.T_hat == 0) and np.all(sd.stderr == 0)


@given(st.lists(st.floats(1e-8, 1e3), min_size=3, max_size=3))
def test_injected_constant_recovered(vals):
    sw = synthetic(lambda v, r, i: vals[i] + 0 * v, (2.0, 30.0), 17)
    sd = estimate_T_ensemble(sw, 1.5, 2)
    order = [sorted(map(tuple, PTS)).index(tuple(p)) for p in PTS]
    assert np.allclose(sd.T_hat[order], vals, rtol=1e-12, atol=0)


@settings(max_examples=20)
@given(st.floats(-1.0, 1.0), st.floats(0.5, 2.0))
def test_substituted_linear_profile_gives_band_mean(a, b):
    lo, hi = 5.0, 25.0
    sw = synthetic(lambda v, r, i: b + a * (v - lo) / (hi - lo) * b, (lo, hi), 11, R=1)
    sd = estimate_T_ensemble(sw, 1.5, 2)
    assert np.allclose(sd.T_hat, b + 0.5 * a * b, rtol=1e-12)


def test_single_estimator_normalization():
    # |u|^2 k^w = 2 sqrt(k) integrates to (4/3)(kb^1.5 - ka^1.5) over the band in k
    ka, kb = 4.0, 100.0
    sw = synthetic(lambda v, r, i: 1.0 / np.sqrt(v), (ka, kb), 4001, sigma=0.0, R=1,
                   mode="single")
    sd = estimate_T_single(sw, 1.5, 2)
    assert np.allclose(sd.T_hat, 1.0, rtol=1e-5)


def test_bands_combine_additively():
    f = lambda v, r, i: (1 + i) * np.cos(v) ** 2 + r  # noqa: E731
    full = synthetic(f, (2.0, 10.0), 33)
    left = synthetic(f, (2.0, 6.0), 17)
    right = synthetic(f, (6.0, 10.0), 17)
    tl = estimate_T_ensemble(left, 1.5, 2).T_hat
    tr = estimate_T_ensemble(right, 1.5, 2).T_hat
    tf = estimate_T_ensemble(full, 1.5, 2).T_hat
    assert np.allclose(tf, 0.5 * (tl + tr), rtol=1e-12)
    merged = left.concat_frequencies(right)
    assert len(merged.k) == 33
    assert np.allclose(estimate_T_ensemble(merged, 1.5, 2).T_hat, tf, rtol=1e-12)


def test_estimate_is_linear_in_intensity():
    f = lambda v, r, i: 1 + np.sin(v + r) ** 2  # noqa: E731
    g = lambda v, r, i: v / (1 + i)  # noqa: E731
    tf = estimate_T_ensemble(synthetic(f, (1.0, 9.0), 21), 1.5, 2).T_hat
    tg = estimate_T_ensemble(synthetic(g, (1.0, 9.0), 21), 1.5, 2).T_hat
    th = estimate_T_ensemble(synthetic(lambda v, r, i: 2 * f(v, r, i) + 3 * g(v, r, i),
                                       (1.0, 9.0), 21), 1.5, 2).T_hat
    assert np.allclose(th, 2 * tf + 3 * tg, rtol=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_positive_and_permutation_invariant(seed):
    rng = np.random.default_rng(seed)
    sw = synthetic(lambda v, r, i: rng.random(v.shape), (1.0, 4.0), 7, R=4)
    sd = estimate_T_ensemble(sw, 1.5, 2)
    assert np.all(sd.T_hat >= 0)
    pk, px, pr = rng.permutation(7), rng.permutation(3), rng.permutation(4)
    shuffled = Sweep(sw.points[px], sw.k[pk], sw.sigma, sw.us[pr][:, pk][:, :, px],
                     sw.realization_ids[pr])
    sd2 = estimate_T_ensemble(shuffled, 1.5, 2)
    assert np.array_equal(sd.points, sd2.points)
    assert np.allclose(sd.T_hat, sd2.T_hat, rtol=1e-14)


def test_records_round_trip(tmp_path):
    sw = synthetic(lambda v, r, i: 1 + v * i, (1.0, 4.0), 5, R=2)
    recs = sw.to_records()
    assert len(recs) == len(sw) == 2 * 5 * 3
    back = Sweep.from_records(recs, sw.sigma)
    t0 = estimate_T_ensemble(sw, 1.5, 2).T_hat
    assert np.allclose(estimate_T_ensemble(back, 1.5, 2).T_hat, t0, rtol=1e-14)
    assert np.allclose(estimate_T_ensemble(recs, 1.5, 2).T_hat, t0, rtol=1e-14)
    sw.save_csv(tmp_path / "s.csv")
    loaded = Sweep.load_csv(tmp_path / "s.csv", sw.sigma)
    assert np.array_equal(estimate_T_ensemble(loaded, 1.5, 2).T_hat,
                          estimate_T_ensemble(back, 1.5, 2).T_hat)
    with pytest.raises(ConfigurationError):
        Sweep.from_records(recs[:-1], sw.sigma)


def test_mode_mismatches_rejected():
    lossy = synthetic(lambda v, r, i: 1 + 0 * v, (1.0, 4.0), 5, sigma=1.0, R=1, mode="single")
    with pytest.raises(ModeError):
        estimate_T_single(lossy, 1.5, 2)
    with pytest.raises(ModeError):
        estimate_T_ensemble(lossy, 1.5, 2)
    many = synthetic(lambda v, r, i: 1 + 0 * v, (1.0, 4.0), 5, sigma=0.0, R=2, mode="single")
    with pytest.raises(ModeError):
        estimate_T_single(many, 1.5, 2)
    with pytest.raises(ModeError):
        frequency_grid((1.0, 2.0), 3, mode="bogus")


def test_nonuniform_grid_rejected():
    sw = synthetic(lambda v, r, i: 1 + 0 * v, (1.0, 4.0), 5)
    sw.k = sw.k.copy()
    sw.k[2] *= 1.1
    with pytest.raises(ConfigurationError):
        estimate_T_ensemble(sw, 1.5, 2)


def test_reference_T_zero_and_inside():
    assert reference_T(StrengthProfile.zero(BOX), PTS[0]) == 0.0
    with pytest.raises(DomainError):
        reference_T(StrengthProfile.constant(1.0, BOX), np.zeros(2))


@pytest.mark.parametrize("d", [2, 3])
def test_reference_T_constant_profile_far_field(d):
    box = ((-0.5,) * d, (0.5,) * d)
    x = np.zeros(d)
    x[0] = 40.0
    T = reference_T(StrengthProfile.constant(2.0, box), x)
    assert T == pytest.approx(kernel_constant(d) * 2.0 / 40.0 ** (2 * (d - 1)), rel=1e-3)


def test_reference_T_narrow_bump_acts_as_point_mass():
    mu = StrengthProfile.bumps([(0.1, -0.2)], [0.02], [5.0], BOX)
    # mass of the bump by a fine midpoint rule on its support
    ax = 0.1 + (np.arange(800) + 0.5) / 800 * 0.04 - 0.02
    ay = -0.2 + (np.arange(800) + 0.5) / 800 * 0.04 - 0.02
    mesh = np.stack(np.meshgrid(ax, ay, indexing="ij"), axis=-1)
    mass = mu(mesh).sum() * (0.04 / 800) ** 2
    x = np.array([1.3, 0.4])
    r2 = np.sum((x - np.array([0.1, -0.2])) ** 2)
    assert reference_T(mu, x) == pytest.approx(kernel_constant(2) * mass / r2, rel=1e-2)


def test_reference_T_damped_limit():
    mu = StrengthProfile.bumps([(0.0, 0.0)], [0.3], [1.0], BOX)
    x = PTS[0]
    undamped = reference_T(mu, x)
    assert reference_T(mu, x, wn=complex_wavenumber(100.0, 0.0)) == pytest.approx(undamped,
                                                                                  rel=1e-14)
    wn = wavenumber_from_kappa_r(5.0, 1.0)
    damped = reference_T(mu, x, wn=wn)
    assert 0 < damped < undamped


def test_sweep_agrees_with_backscatter(rng):
    g = ScatterGrid(2, 4, 0.25)
    batch = rng.standard_normal((2,) + g.shape)
    sw = frequency_sweep(batch, PTS, (2.0, 4.0), 3, g, 1.0)
    assert sw.us.shape == (2, 3, 3) and sw.has_diagnostics
    wn = wavenumber_from_kappa_r(3.0, 1.0)
    out = backscatter(batch, g, PTS, wn)
    assert np.allclose(sw.us[:, 1], out["us"], rtol=1e-12, atol=0)


def test_born_diagnostics_zero_potential():
    g = ScatterGrid(2, 4, 0.25)
    sw = frequency_sweep(np.zeros((2,) + g.shape), PTS, (1.0, 20.0), 20, g, 1.0)
    rep = born_diagnostics(sw, 1.5, 2, StrengthProfile.zero(BOX))
    assert all(v == 0 for v in rep.averages.values())
    assert rep.bottom == (1.0, 10.0) and rep.top == (2.0, 20.0)
    no_diag = Sweep(sw.points, sw.k, sw.sigma, sw.us, sw.realization_ids)
    with pytest.raises(ConfigurationError):
        born_diagnostics(no_diag, 1.5, 2)
