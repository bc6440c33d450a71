import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import linalg

from ricci2d import ConformalSurface, lambda0, rayleigh_quotient, sphere, torus
from ricci2d.battery import make_battery, random_metric_phi
from ricci2d.oracles import ModelSolution, oracle_eval
from ricci2d.spectral import ConvergenceError, positive_ground_state


def dense_lambda0(s):
    """Smallest generalized eigenvalue from explicitly assembled matrices."""
    n = s.node_count
    L = np.column_stack([s.base.stiffness(e) for e in np.eye(n)])
    A = 0.5 * (L + L.T) + np.diag(0.25 * s.curvature_density * s.base.weights)
    return linalg.eigh(A, np.diag(s.vol_element), eigvals_only=True, subset_by_index=[0, 0])[0]


def test_rayleigh_quotient_examples(torus_base, sphere_base):
    assert rayleigh_quotient(ConformalSurface.flat(torus_base), np.ones(torus_base.node_count)) == 0.0
    assert rayleigh_quotient(ConformalSurface.flat(sphere_base),
                             np.ones(sphere_base.node_count)) == pytest.approx(0.5, rel=1e-12)
    assert rayleigh_quotient(ConformalSurface.flat(torus_base),
                             np.sin(torus_base.x)) == pytest.approx(1.0, rel=1e-2)


def test_rayleigh_quotient_rejects_zero(torus_base):
    with pytest.raises(ValueError):
        rayleigh_quotient(ConformalSurface.flat(torus_base), np.zeros(torus_base.node_count))


def test_flat_torus_ground_state(torus_base):
    r = lambda0(ConformalSurface.flat(torus_base, 0.2))
    assert abs(r.lambda0 - oracle_eval(ModelSolution.flat_torus(), "lambda0")) <= 1e-8
    assert np.ptp(r.eigenfunction.values) <= 1e-8


def test_round_sphere_ground_state(sphere_base):
    r = lambda0(ConformalSurface.flat(sphere_base))
    assert abs(r.lambda0 - 0.5) <= 1e-3
    assert np.all(r.eigenfunction.values > 0)


@pytest.mark.parametrize("t", [0.1, 0.25, 0.4])
def test_shrinking_sphere_ground_state(sphere_trajectory, t):
    r = lambda0(sphere_trajectory.surface_at(t))
    expected = oracle_eval(ModelSolution.round_sphere(), "lambda0", t)
    assert r.lambda0 == pytest.approx(expected, rel=1e-2)


def test_nonflat_torus_has_negative_ground_state(torus_base):
    assert lambda0(ConformalSurface(torus_base, 0.2 * np.sin(torus_base.x))).lambda0 < 0


@pytest.mark.parametrize("which", ["torus", "sphere"])
def test_matches_dense_eigensolver(which):
    base = torus(16) if which == "torus" else sphere(2)
    s = ConformalSurface(base, random_metric_phi(base, np.random.default_rng(7), 0.4))
    assert lambda0(s, tol=1e-10).lambda0 == pytest.approx(dense_lambda0(s), abs=1e-8)


def test_rayleigh_quotient_of_eigenfunction_within_residual(torus_base):
    s = ConformalSurface(torus_base, random_metric_phi(torus_base, np.random.default_rng(1), 0.3))
    r = lambda0(s)
    assert abs(rayleigh_quotient(s, r.eigenfunction) - r.lambda0) <= max(r.residual, 1e-12)
    assert r.eigenfunction.values.mean() >= 0


def test_ground_state_is_variational_minimum(sphere_base):
    s = ConformalSurface(sphere_base, random_metric_phi(sphere_base, np.random.default_rng(2), 0.3))
    r = lambda0(s)
    bat = make_battery(s, seed=0)
    assert min(rayleigh_quotient(s, u) for _, u in bat) >= r.lambda0 - 1e-8


def test_positive_ground_state_clamps(torus_base):
    s = ConformalSurface(torus_base, 0.2 * np.sin(torus_base.x))
    u = positive_ground_state(lambda0(s))
    assert u.min() > 0


def test_nonconvergence_carries_best_iterate(torus_base):
    s = ConformalSurface(torus_base, random_metric_phi(torus_base, np.random.default_rng(4), 0.4))
    with pytest.raises(ConvergenceError) as info:
        lambda0(s, tol=1e-14, max_iterations=1)
    best = info.value.best
    assert best.iterations == 1 and np.isfinite(best.lambda0)


def test_tolerance_must_be_positive(torus_base):
    with pytest.raises(ValueError):
        lambda0(ConformalSurface.flat(torus_base), tol=0.0)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), c=st.floats(-0.8, 0.8))
def test_scale_law(seed, c):
    base = torus(32)
    s = ConformalSurface(base, random_metric_phi(base, np.random.default_rng(seed), 0.3))
    a = lambda0(s, tol=1e-10).lambda0
    b = lambda0(s.shifted(c), tol=1e-10).lambda0
    assert b == pytest.approx(np.exp(-2 * c) * a, abs=1e-8)


def test_nondecreasing_along_random_torus_flows(random_torus_trajectories):
    for traj in random_torus_trajectories:
        values = [lambda0(s).lambda0 for s in traj.snapshots]
        assert np.diff(values).min() >= -1e-6
