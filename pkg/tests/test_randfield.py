import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from biharmonic_rp.errors import ConfigurationError, DomainError, SingularityError
from biharmonic_rp.randfield import (
    CovarianceEstimate,
    FieldRealization,
    StrengthProfile,
    covariance_model,
    empirical_covariance,
    fit_covariance_constant,
    generate_ensemble,
    grid_for_box,
    realization_seeds,
    riesz_constant,
    sample_field,
    spectral_amplitude,
)

BOX = ((-0.5, -0.5), (0.5, 0.5))


@pytest.fixture(scope="module")
def coarse():
    return grid_for_box(*BOX, 1.0 / 16)


def test_zero_strength_gives_zero_field(coarse):
    f = sample_field(StrengthProfile.zero(BOX), 1.5, coarse, seed=3)
    assert np.all(f.values == 0)


def test_values_are_real_and_deterministic(coarse):
    mu = StrengthProfile.bumps([(0.0, 0.1)], [0.3], [2.0], BOX)
    a = sample_field(mu, 1.7, coarse, seed=11)
    b = sample_field(mu, 1.7, coarse, seed=11)
    assert np.isrealobj(a.values) and a.values.dtype == np.float64
    assert a.values.tobytes() == b.values.tobytes()
    assert not np.array_equal(a.values, sample_field(mu, 1.7, coarse, seed=12).values)


def test_support_follows_strength(coarse):
    mu = StrengthProfile.bumps([(0.0, 0.0)], [0.2], [1.0], BOX)
    f = sample_field(mu, 1.5, coarse, seed=1)
    outside = mu(coarse.nodes()) == 0
    assert np.all(f.values[outside] == 0)
    assert np.any(f.values[~outside] != 0)


def test_ensemble_mean_is_centered():
    grid = grid_for_box(*BOX, 1.0 / 16)
    ens = generate_ensemble(StrengthProfile.constant(1.0, BOX), 1.5, grid, 77, 2000)
    data = np.stack([e.restrict() for e in ens])
    mean, std = data.mean(axis=0), data.std(axis=0, ddof=1)
    assert np.mean(np.abs(mean) <= 4 * std / np.sqrt(len(ens))) >= 0.99


def test_pooled_values_are_gaussian():
    grid = grid_for_box(*BOX, 1.0 / 64)
    ens = generate_ensemble(StrengthProfile.constant(1.0, BOX), 1.5, grid, 5, 2000)
    v = np.concatenate([e.restrict().ravel() for e in ens])
    v = (v - v.mean()) / v.std()
    assert abs(np.mean(v**3)) < 0.1
    assert abs(np.mean(v**4) - 3) < 0.1


def test_two_realization_covariance_formula(coarse):
    mu = StrengthProfile.constant(1.0, BOX)
    ens = generate_ensemble(mu, 1.5, coarse, 1, 2)
    est = empirical_covariance(ens, (0.03125, 0.03125), [0.125])[0]
    # direct two-sample formula at the anchor node and its four neighbours at lag 2h
    i = int(round((0.03125 - coarse.origin) / coarse.h - 0.5))
    a = np.array([e.values[i, i] for e in ens])
    nb = [np.array([e.values[i + di, i + dj] for e in ens])
          for di, dj in ((2, 0), (-2, 0), (0, 2), (0, -2))]
    expect = np.mean([np.sum((a - a.mean()) * (b - b.mean())) for b in nb])
    assert est.estimate == pytest.approx(expect, rel=1e-12)
    assert np.isnan(est.stderr)


def test_duplicated_realization_is_degenerate(coarse):
    f = sample_field(StrengthProfile.constant(1.0, BOX), 1.5, coarse, seed=2)
    est = empirical_covariance([f, f], (0.0, 0.0), [0.125, 0.25])
    assert all(e.estimate == 0 and np.isnan(e.stderr) for e in est)


def test_zero_strength_covariance_is_zero(coarse):
    ens = generate_ensemble(StrengthProfile.zero(BOX), 1.5, coarse, 4, 5)
    assert all(e.estimate == 0 for e in empirical_covariance(ens, (0, 0), [0.125, 0.25]))


def test_covariance_needs_compatible_ensembles(coarse):
    mu = StrengthProfile.constant(1.0, BOX)
    a = sample_field(mu, 1.5, coarse, 1)
    b = sample_field(mu, 1.8, coarse, 2)
    with pytest.raises(ConfigurationError):
        empirical_covariance([a, b], (0, 0), [0.125])
    with pytest.raises(ConfigurationError):
        empirical_covariance([a], (0, 0), [0.125])


def test_power_law_slope_for_rough_order():
    grid = grid_for_box(*BOX, 1.0 / 64)
    ens = generate_ensemble(StrengthProfile.constant(1.0, BOX), 1.5, grid, 31, 1000)
    lags = np.arange(4, 23) / 64
    fit = fit_covariance_constant(empirical_covariance(ens, [(0, 0), (0.1, -0.1)], lags),
                                  1.0, 1.5, 2)
    assert abs(fit.slope + 0.5) <= 0.15
    # free-space kernel of A_d |xi|^-m is A_d c |h|^(m-d)
    assert fit.constant == pytest.approx(riesz_constant(1.5, 2) * spectral_amplitude(1.5, 2),
                                         rel=0.2)


def test_log_law_at_critical_order():
    grid = grid_for_box(*BOX, 1.0 / 64)
    ens = generate_ensemble(StrengthProfile.constant(1.0, BOX), 2.0, grid, 32, 1000)
    lags = np.arange(4, 23) / 64
    fit = fit_covariance_constant(empirical_covariance(ens, [(0, 0), (0.1, -0.1)], lags),
                                  1.0, 2.0, 2)
    assert fit.r2 >= 0.9 and fit.slope < 0


def test_covariance_model_branches():
    z, zp = np.zeros(2), np.array([0.3, 0.4])
    assert covariance_model(z, zp, 2.0, 1.5, 0.7) == pytest.approx(0.7 * 2.0 * 0.5**-0.5)
    assert covariance_model(z, zp, 2.0, 2.0, 0.7) == pytest.approx(0.7 * 2.0 * np.log(0.5))
    assert covariance_model(z, zp, StrengthProfile.zero(BOX), 1.5, 0.7) == 0
    with pytest.raises(SingularityError):
        covariance_model(z, z, 1.0, 1.5, 1.0)


@given(st.floats(0.5, 3.0), st.floats(1.1, 1.9))
def test_fit_recovers_injected_constant(c, m):
    lags = np.linspace(0.05, 0.3, 12)
    est = [CovarianceEstimate(float(t), float(c * 2.0 * t ** (m - 2)), 0.0) for t in lags]
    fit = fit_covariance_constant(est, 2.0, m, 2)
    assert fit.constant == pytest.approx(c, rel=1e-12)
    assert fit.slope == pytest.approx(m - 2, abs=1e-10)


@pytest.mark.parametrize("m", [0.9, 2.5, 1.0])
def test_order_outside_range(coarse, m):
    with pytest.raises(DomainError):
        sample_field(StrengthProfile.constant(1.0, BOX), m, coarse, 0)


def test_margin_is_enforced():
    small = grid_for_box(*BOX, 1.0 / 16, margin=0.1)
    with pytest.raises(ConfigurationError):
        sample_field(StrengthProfile.constant(1.0, BOX), 1.5, small, 0)


def test_profile_validation():
    with pytest.raises(ConfigurationError):
        StrengthProfile.bumps([(0.4, 0.0)], [0.3], [1.0], BOX)
    with pytest.raises(ConfigurationError):
        StrengthProfile.bumps([(0.0, 0.0)], [0.3], [-1.0], BOX)
    p = StrengthProfile.bumps([(0.1, 0.0)], [0.3], [2.0], BOX)
    assert StrengthProfile.from_dict(p.to_dict()) == p


def test_seeds_are_stable_and_distinct():
    s = realization_seeds(2024, 50)
    assert s == realization_seeds(2024, 50)
    assert len(set(s)) == 50
    assert realization_seeds(2024, 60)[:50] == s


def test_realization_restrict(coarse):
    f = sample_field(StrengthProfile.constant(1.0, BOX), 1.5, coarse, 0)
    assert isinstance(f, FieldRealization)
    assert f.restrict().shape == (16, 16)
