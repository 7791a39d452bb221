import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biharmonic_rp.errors import ConfigurationError, DomainError, IterationLimitError
from biharmonic_rp.estimator import kernel_constant, reference_T
from biharmonic_rp.forward import ScatterGrid
from biharmonic_rp.inversion import (
    assemble_forward_map,
    circle_points,
    gradient_operator,
    lambda_grid,
    pick_lambda,
    recover_strength,
    ring_points,
)
from biharmonic_rp.randfield import StrengthProfile

BOX = ((-0.5, -0.5), (0.5, 0.5))
RADII = [1.25, 1.5, 2.0, 2.5, 3.0]
MU = StrengthProfile.bumps([(0.1, -0.05)], [0.4], [4.0], BOX)


@pytest.fixture(scope="module")
def ring_problem():
    g = ScatterGrid.from_box(*BOX, 16)
    fm = assemble_forward_map(ring_points(RADII, 12), g)
    mt = MU(g.nodes).reshape(g.shape)
    return fm, mt


def test_identity_map_without_regularization_returns_data(rng):
    T = rng.random(20)
    est = recover_strength(np.eye(20), T, 0.0)
    assert np.allclose(est.mu_hat, T, rtol=1e-8, atol=0)


def test_negative_data_clamped_to_zero(rng):
    T = rng.standard_normal(30)
    est = recover_strength(np.eye(30), T, 0.0)
    assert np.all(est.mu_hat >= 0)
    assert np.allclose(est.mu_hat, np.maximum(T, 0), rtol=1e-8, atol=1e-12)


@settings(max_examples=30)
@given(st.integers(2, 8), st.floats(0.05, 5.0), st.floats(0, 2 * np.pi), st.integers(1, 6))
def test_forward_map_entries_positive(n, gap, angle, count):
    g = ScatterGrid.from_box(*BOX, n)
    r = np.sqrt(0.5) + gap
    pts = circle_points(count, r, phase=angle)
    fm = assemble_forward_map(pts, g)
    assert fm.matrix.shape == (count, n * n)
    assert np.all(fm.matrix > 0)


def test_single_node_entry():
    g = ScatterGrid(3, 1, 0.2, lo=-0.1)
    x = np.array([[1.0, 2.0, -0.5]])
    fm = assemble_forward_map(x, g)
    assert fm.matrix[0, 0] == pytest.approx(kernel_constant(3) * 0.2**3 / 5.25**2, rel=1e-15)


def test_forward_map_matches_reference_T():
    g = ScatterGrid.from_box(*BOX, 32)
    pts = ring_points([1.25, 2.0], 6)
    fm = assemble_forward_map(pts, g)
    ref = np.array([reference_T(MU, x) for x in pts])
    assert np.allclose(fm @ MU(g.nodes), ref, rtol=1e-2)


def test_points_in_support_rejected():
    g = ScatterGrid.from_box(*BOX, 4)
    with pytest.raises(DomainError):
        assemble_forward_map([[0.2, 0.4]], g)
    with pytest.raises(DomainError):
        recover_strength(np.eye(3), np.ones(3), -1.0)


def test_ring_exact_data_recovery(ring_problem):
    fm, mt = ring_problem
    est = recover_strength(fm, fm @ mt, 1e-10, mu_true=mt)
    assert est.rel_error_vs_truth <= 0.10
    assert est.mu_hat.shape == mt.shape


def test_radial_profiles_indistinguishable_on_one_circle():
    # two centred radial bumps matched on the circle of radius 2 agree there
    # pointwise by symmetry, but not on the inner ring
    narrow = StrengthProfile.bumps([(0.0, 0.0)], [0.2], [1.0], BOX)
    wide = StrengthProfile.bumps([(0.0, 0.0)], [0.45], [1.0], BOX)
    circle = circle_points(8, 2.0, phase=0.1)
    ta = np.array([reference_T(narrow, x) for x in circle])
    tb = np.array([reference_T(wide, x) for x in circle])
    scale = ta[0] / tb[0]
    assert np.allclose(ta, scale * tb, rtol=1e-6)
    inner = circle_points(8, 0.8, phase=0.1)
    ia = np.array([reference_T(narrow, x) for x in inner])
    ib = np.array([reference_T(wide, x) for x in inner])
    assert np.all(np.abs(ia / (scale * ib) - 1) > 1e-2)


def test_regularization_monotone(ring_problem):
    fm, mt = ring_problem
    L, _ = gradient_operator(fm.shape, fm.h)
    T = fm @ mt
    res, rough = [], []
    for lam in (1e-8, 1e-5, 1e-2, 1.0):
        est = recover_strength(fm, T, lam, rtol=1e-12)
        res.append(est.data_residual)
        rough.append(np.linalg.norm(L @ est.mu_hat.ravel()))
    assert all(a <= b * (1 + 1e-6) for a, b in zip(res, res[1:]))
    assert all(a >= b * (1 - 1e-6) for a, b in zip(rough, rough[1:]))


def test_objective_never_increases(ring_problem):
    fm, mt = ring_problem
    est = recover_strength(fm, fm @ mt, 1e-6)
    h = np.array(est.history)
    assert np.all(np.diff(h) <= 1e-15 * h[:-1])


def test_minimizer_independent_of_start(ring_problem, rng):
    fm, mt = ring_problem
    T = fm @ mt
    sols = [recover_strength(fm, T, 1e-3, x0=x0, rtol=1e-14).mu_hat
            for x0 in (None, rng.random(mt.size), 10 * rng.random(mt.size))]
    for s in sols[1:]:
        assert np.linalg.norm(s - sols[0]) <= 1e-4 * np.linalg.norm(sols[0])


def test_gradient_operator_norm():
    L, norm = gradient_operator((5, 7), 0.1)
    assert L.shape == (6 * 7 + 5 * 8, 35)
    assert norm == pytest.approx(np.linalg.norm(L.toarray(), 2), rel=1e-12)


def test_pick_lambda_behaviour(ring_problem):
    fm, mt = ring_problem
    T = fm @ mt
    grid = lambda_grid(1e-10, 1.0, 1)
    assert pick_lambda(fm, T, 0.0, grid) == grid[0]
    picks = [pick_lambda(fm, T, s * np.linalg.norm(T), grid) for s in (1e-3, 1e-2, 1e-1)]
    assert all(a <= b for a, b in zip(picks, picks[1:]))
    assert pick_lambda(fm, T, 1e6 * np.linalg.norm(T), grid) == grid[-1]
    with pytest.raises(ConfigurationError):
        pick_lambda(fm, T, 1.0, [])


def test_iteration_limit_carries_iterate(ring_problem):
    fm, mt = ring_problem
    with pytest.raises(IterationLimitError) as info:
        recover_strength(fm, fm @ mt, 1e-10, max_iter=3, face_every=0)
    assert info.value.iterate.shape == mt.shape
    assert info.value.residual > 0


def test_data_length_checked():
    with pytest.raises(ConfigurationError):
        recover_strength(np.eye(3), np.ones(4), 0.0)
