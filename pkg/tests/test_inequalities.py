import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from ricci2d import ConformalSurface, StepControl, run_flow, sphere, torus, volume
from ricci2d import inequalities as ineq
from ricci2d.battery import l2_normalize, make_battery, random_metric_phi
from ricci2d.inequalities import LogSobolevConstants, PreconditionError
from ricci2d.oracles import analytic_cni

SPHERE_CNI = analytic_cni("round_sphere")
TORUS_CNI = analytic_cni("flat_torus")


@pytest.fixture(scope="module")
def unit_sphere(sphere_base):
    return ConformalSurface.flat(sphere_base)


@pytest.fixture(scope="module")
def flat_torus(torus_base):
    return ConformalSurface.flat(torus_base)


@pytest.fixture(scope="module")
def sphere_consts(unit_sphere):
    return ineq.constants_for(unit_sphere, c_ni_override=SPHERE_CNI)


# -- constants ------------------------------------------------------------

def test_unit_sphere_constants(sphere_consts):
    a1 = 1 / math.sqrt(2 * math.pi) + 1 / math.sqrt(4 * math.pi)
    assert sphere_consts.a1 == pytest.approx(a1, rel=1e-12)
    assert sphere_consts.a1 == pytest.approx(0.6810, abs=1e-4)
    assert sphere_consts.a2 == 1.0
    assert sphere_consts.delta0 == pytest.approx(0.8467, abs=1e-4)
    assert sphere_consts.b0 == pytest.approx(-0.14046, abs=1e-4)


def test_flat_torus_has_no_large_time_constants(flat_torus):
    c = ineq.constants_for(flat_torus, c_ni_override=TORUS_CNI)
    assert c.delta0 is None and c.b0 is None
    assert c.a1 == pytest.approx(TORUS_CNI + 1 / (2 * math.pi), rel=1e-12)


def test_constants_reject_invalid_inputs():
    with pytest.raises(ValueError):
        LogSobolevConstants.from_values(0.0, 1.0, 0.0, 0.5)
    with pytest.raises(ValueError):
        LogSobolevConstants.from_values(0.3, 1.0, 0.2, 0.5)


positive = st.floats(1e-3, 1e3)


@given(c=positive, vol=positive, m=st.floats(-1e3, 0.0), dm=st.floats(1e-3, 10.0), lam=positive)
def test_a1_nonincreasing_in_min_r_minus(c, vol, m, dm, lam):
    assume(m + dm <= 0)
    lo = LogSobolevConstants.from_values(c, vol, m, lam)
    hi = LogSobolevConstants.from_values(c, vol, m + dm, lam)
    assert hi.a1 <= lo.a1


@given(c=positive, vol=positive, m=st.floats(-1e3, 0.0), lam=positive, f=st.floats(1.01, 10.0))
def test_delta0_and_b0_decrease_in_lambda0(c, vol, m, lam, f):
    lo = LogSobolevConstants.from_values(c, vol, m, lam)
    hi = LogSobolevConstants.from_values(c, vol, m, lam * f)
    assert hi.delta0 < lo.delta0
    assert hi.b0 < lo.b0


def test_constants_as_dict_round_trip(sphere_consts):
    d = sphere_consts.as_dict()
    assert LogSobolevConstants(**d) == sphere_consts


# -- isoperimetric estimate -----------------------------------------------

def test_level_set_profile_of_cosine(flat_torus, torus_base):
    area, length = ineq.level_set_profile(flat_torus, np.cos(torus_base.x), np.array([1e-9]))
    assert area[0] == pytest.approx(2 * math.pi ** 2, rel=1e-2)
    assert length[0] == pytest.approx(4 * math.pi, rel=1e-6)


def test_level_set_profile_closed_form(flat_torus, torus_base):
    # {cos x < c} is a band of width 2 pi - 2 arccos(c), cut by two circles
    levels = np.array([0.5, -0.9, 0.1, -0.3, 0.77])
    area, length = ineq.level_set_profile(flat_torus, np.cos(torus_base.x), levels)
    np.testing.assert_allclose(area, 2 * math.pi * (2 * math.pi - 2 * np.arccos(levels)), rtol=2e-3)
    np.testing.assert_allclose(length, 4 * math.pi, rtol=1e-9)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_level_set_area_is_monotone(seed):
    base = sphere(3)
    rng = np.random.default_rng(seed)
    s = ConformalSurface(base, random_metric_phi(base, rng, 0.3))
    u = random_metric_phi(base, rng, 1.0)
    levels = np.linspace(-1.2, 1.2, 60)
    area, length = ineq.level_set_profile(s, u, levels)
    perm = rng.permutation(len(levels))
    area_p, length_p = ineq.level_set_profile(s, u, levels[perm])
    np.testing.assert_array_equal(area_p, area[perm])
    np.testing.assert_array_equal(length_p, length[perm])
    assert np.all(np.diff(area) >= -1e-12)
    assert area[0] == 0.0 and area[-1] == pytest.approx(volume(s), rel=1e-12)
    assert np.all(length >= 0)


def test_level_set_profile_of_sphere_equator(unit_sphere, sphere_base):
    area, length = ineq.level_set_profile(unit_sphere, sphere_base.verts[:, 2], np.array([0.0]))
    assert area[0] == pytest.approx(2 * math.pi, rel=1e-3)
    assert length[0] == pytest.approx(2 * math.pi, rel=1e-2)


@pytest.mark.parametrize("family", ["flat_torus", "round_sphere"])
def test_estimator_brackets_analytic_value(family, flat_torus, unit_sphere):
    s = flat_torus if family == "flat_torus" else unit_sphere
    est = ineq.neumann_isoperimetric_estimate(s)
    exact = analytic_cni(family)
    assert 0.98 * exact <= est <= 1.02 * exact


def test_estimator_is_scale_invariant(torus_base):
    s = ConformalSurface(torus_base, random_metric_phi(torus_base, np.random.default_rng(6), 0.2))
    a = ineq.neumann_isoperimetric_estimate(s)
    b = ineq.neumann_isoperimetric_estimate(s.shifted(0.7))
    assert abs(a - b) <= 1e-8


def test_cut_ratio_of_constant_is_zero(flat_torus):
    assert ineq.cut_ratio(flat_torus, np.ones(flat_torus.node_count)) == 0.0


# -- static inequalities --------------------------------------------------

def test_poincare_examples(flat_torus, unit_sphere, torus_base, sphere_base):
    assert ineq.poincare_check(flat_torus, np.full(flat_torus.node_count, 3.0), TORUS_CNI) == pytest.approx(0, abs=1e-10)
    d = ineq.poincare_check(flat_torus, np.sin(torus_base.x), TORUS_CNI)
    assert d == pytest.approx(TORUS_CNI * 8 * math.pi - math.pi * math.sqrt(2), rel=1e-2)
    assert ineq.poincare_check(unit_sphere, sphere_base.verts[:, 2], SPHERE_CNI) >= 0


def test_jensen_equality_for_constants(flat_torus, unit_sphere):
    for s in (flat_torus, unit_sphere):
        u = np.full(s.node_count, 1 / volume(s))
        e = ineq.jensen_entropy_check(s, u, 0.4)
        assert abs(e.jensen) <= 1e-10 and abs(e.l1_sobolev) <= 1e-10


def test_jensen_strict_for_bump(flat_torus, torus_base):
    d2 = (torus_base.x - math.pi) ** 2 + (torus_base.y - math.pi) ** 2
    u = ineq.l1_normalize(flat_torus, np.exp(-d2))
    assert ineq.jensen_entropy_check(flat_torus, u, TORUS_CNI).jensen > 0


def test_battery_satisfies_l1_sobolev(unit_sphere):
    for _, u in make_battery(unit_sphere):
        e = ineq.jensen_entropy_check(unit_sphere, ineq.l1_normalize(unit_sphere, u), SPHERE_CNI)
        assert e.l1_sobolev >= -1e-6 and e.jensen >= -1e-10


def test_entropy_check_requires_l1_normalization(flat_torus):
    with pytest.raises(PreconditionError):
        ineq.jensen_entropy_check(flat_torus, np.ones(flat_torus.node_count), TORUS_CNI)


# -- log-Sobolev inequalities ---------------------------------------------

def test_logsobolev_constant_on_unit_sphere(unit_sphere, sphere_consts):
    u = np.full(unit_sphere.node_count, (4 * math.pi) ** -0.5)
    d = ineq.logsobolev_deficit(unit_sphere, sphere_consts, u, 1.0, 0.0)
    expected = -math.log(4 * math.pi) - (0.5 + 4 * sphere_consts.a1 + 1)
    assert d == pytest.approx(expected, rel=1e-9)
    assert d == pytest.approx(-6.76, abs=5e-3)


def test_logsobolev_diverges_at_sigma_extremes(unit_sphere, sphere_consts, sphere_base):
    u = l2_normalize(unit_sphere, 1 + 0.5 * sphere_base.verts[:, 2])
    for sigma in (1e-12, 1e12):
        assert ineq.logsobolev_deficit(unit_sphere, sphere_consts, u, sigma, 0.0) < -20


def test_logsobolev_rejects_bad_inputs(unit_sphere, sphere_consts):
    u = np.full(unit_sphere.node_count, (4 * math.pi) ** -0.5)
    with pytest.raises(PreconditionError):
        ineq.logsobolev_deficit(unit_sphere, sphere_consts, 2 * u, 1.0, 0.0)
    with pytest.raises(PreconditionError):
        ineq.logsobolev_deficit(unit_sphere, sphere_consts, u, 0.0, 0.0)
    with pytest.raises(PreconditionError):
        ineq.logsobolev_deficit(unit_sphere, sphere_consts, u, 1.0, -1.0)


def test_large_time_form_on_unit_sphere(unit_sphere, sphere_consts):
    u = np.full(unit_sphere.node_count, (4 * math.pi) ** -0.5)
    assert ineq.logsobolev_deficit_B(unit_sphere, sphere_consts, u, sphere_consts.delta0, 0.0) <= 0
    with pytest.raises(PreconditionError):
        ineq.logsobolev_deficit_B(unit_sphere, sphere_consts, u, 0.1, 0.0)


def test_large_time_form_needs_positive_lambda0(flat_torus):
    c = ineq.constants_for(flat_torus, c_ni_override=TORUS_CNI)
    u = np.full(flat_torus.node_count, 1 / (2 * math.pi))
    with pytest.raises(PreconditionError):
        ineq.logsobolev_deficit_B(flat_torus, c, u, 1.0, 1.0)


@given(energy=st.floats(0.0, 1e3), t=st.floats(0.0, 10.0))
def test_sigma_minimum_dominates_closed_form(sphere_consts, energy, t):
    best = min(ineq.logsobolev_rhs(sphere_consts, energy, s, t)
               for s in ineq.sigma_candidates(sphere_consts, energy))
    assert best >= ineq.optimal_sigma_bound(sphere_consts, energy, t) - 1e-10


@given(energy=st.floats(1e-3, 1e3))
def test_large_time_minimum_is_closed_form(sphere_consts, energy):
    at_min = ineq.logsobolev_rhs_b(sphere_consts, energy, 1 / energy)
    assert at_min == pytest.approx(ineq.optimal_sigma_bound_b(sphere_consts, energy), abs=1e-12)


# -- adversarial search --------------------------------------------------

def test_large_sigma_maximizer_is_constant():
    base = torus(32)
    s = ConformalSurface.flat(base)
    consts = ineq.constants_for(s, c_ni_override=TORUS_CNI)
    res = ineq.adversarial_logsobolev_max(s, consts, 16.0, 0.0, make_battery(s), n_starts=3)
    assert res.objective == pytest.approx(-math.log(volume(s)), abs=1e-4)
    assert np.ptp(res.u.values) / np.abs(res.u.values).mean() <= 1e-2


def test_small_sigma_maximizer_stays_below_bound():
    s = ConformalSurface.flat(sphere(3))
    consts = ineq.constants_for(s, c_ni_override=SPHERE_CNI)
    bat = make_battery(s)
    res = ineq.adversarial_logsobolev_max(s, consts, 0.1, 0.0, bat, n_starts=4)
    assert res.deficit <= 0
    start = max(ineq._objective(s, u.values, 0.1) for _, u in bat)
    assert res.objective >= start
    assert ineq.l2_norm_sq(s, res.u) == pytest.approx(1.0, abs=1e-10)


# -- Sobolev constants ------------------------------------------------------

def test_cbar_unit_sphere(sphere_consts):
    a1 = sphere_consts.a1
    assert ineq.cbar(4, 1.0, sphere_consts) == pytest.approx(2 * math.exp(1 + 4 * a1 + 0.5), rel=1e-12)
    assert ineq.cbar(4, 1.0, sphere_consts) == pytest.approx(136.6, abs=0.1)


def test_cbar_large_p_limit(sphere_consts):
    a1 = sphere_consts.a1
    limit = math.exp(0.5 + 4 * a1 + 0.5)
    assert ineq.cbar(1e9, 1.0, sphere_consts) == pytest.approx(limit, rel=1e-6)


def test_cbar_rejects_bad_inputs(sphere_consts, flat_torus):
    with pytest.raises(PreconditionError):
        ineq.cbar(2.0, 1.0, sphere_consts)
    with pytest.raises(PreconditionError):
        ineq.cbar(4.0, -1.0, sphere_consts)
    flat = ineq.constants_for(flat_torus, c_ni_override=TORUS_CNI)
    with pytest.raises(PreconditionError):
        ineq.cbar(4.0, 1.0, flat, variant="B")


def test_constant_member_forces_intercept():
    base = torus(32)
    traj = run_flow(ConformalSurface.flat(base), StepControl(t_end=0.1), 0.05)
    s0 = traj.snapshots[0]
    track = ineq.sobolev_ratio_track(traj, 4.0, make_battery(s0))
    vol = volume(s0)
    for pt in track.per_time:
        assert pt.measured_B >= vol ** (2 / 4 - 1) * (1 - 1e-12)
        assert pt.mu == pytest.approx(4.0)
    assert not track.unbounded
