import math

import pytest
from hypothesis import given, settings, strategies as st

from ricci2d.oracles import (
    ModelSolution,
    analytic_cni,
    cap_area,
    cap_sweep_cni,
    oracle_eval,
    sphere_kappa_at_gate,
    straight_cut_cni,
)


def test_round_sphere_values():
    m = ModelSolution.round_sphere()
    assert oracle_eval(m, "vol", 0.25) == pytest.approx(2 * math.pi)
    assert oracle_eval(m, "lambda0", 0.0) == 0.5
    assert oracle_eval(m, "R", 0.0) == 2.0
    assert oracle_eval(m, "phi", 0.0) == 0.0
    assert oracle_eval(m, "T") == 0.5


def test_flat_torus_values():
    m = ModelSolution.flat_torus()
    for t in (0.0, 1.0, 7.5):
        assert oracle_eval(m, "lambda0", t) == 0.0
        assert oracle_eval(m, "R", t) == 0.0
        assert oracle_eval(m, "vol", t) == pytest.approx(4 * math.pi ** 2)
    assert oracle_eval(m, "T") == math.inf


def test_rejects_bad_queries():
    m = ModelSolution.round_sphere()
    with pytest.raises(ValueError):
        oracle_eval(m, "entropy")
    with pytest.raises(ValueError):
        oracle_eval(m, "vol", 0.5)
    with pytest.raises(ValueError):
        oracle_eval(m, "vol", -0.1)


def test_isoperimetric_constants_match_sweeps():
    assert analytic_cni("round_sphere") == pytest.approx(0.39894, abs=1e-5)
    assert analytic_cni("flat_torus") == pytest.approx(0.35355, abs=1e-5)
    assert cap_sweep_cni() == pytest.approx(analytic_cni("round_sphere"), rel=1e-6)
    assert straight_cut_cni() == pytest.approx(analytic_cni("flat_torus"), rel=1e-6)


def test_isoperimetric_constants_are_scale_invariant():
    assert cap_sweep_cni(radius=3.0) == pytest.approx(cap_sweep_cni(), rel=1e-12)
    assert straight_cut_cni(side=1.0) == pytest.approx(straight_cut_cni(), rel=1e-12)
    assert analytic_cni(ModelSolution.round_sphere(5.0)) == analytic_cni(ModelSolution.round_sphere())


def test_unknown_family_rejected():
    with pytest.raises(ValueError):
        analytic_cni("klein_bottle")


def test_cap_area_limits():
    assert cap_area(math.pi) == pytest.approx(4 * math.pi)
    assert cap_area(10.0) == pytest.approx(4 * math.pi)
    assert cap_area(1e-3) == pytest.approx(math.pi * 1e-6, rel=1e-6)


def test_kappa_at_gate_is_time_independent():
    k0 = sphere_kappa_at_gate(0.0)
    assert k0 == pytest.approx(4 * math.pi * (1 - math.cos(1 / math.sqrt(2))), rel=1e-12)
    assert k0 == pytest.approx(3.013, abs=1e-3)
    assert sphere_kappa_at_gate(0.4) == pytest.approx(k0, rel=1e-12)


@settings(max_examples=50)
@given(r0=st.floats(0.1, 10.0), c=st.floats(0.1, 10.0), frac=st.floats(0.0, 0.99))
def test_sphere_formulas_scale_consistently(r0, c, frac):
    # g -> c^2 g: radius r0 -> c r0, time t -> c^2 t
    a, b = ModelSolution.round_sphere(r0), ModelSolution.round_sphere(c * r0)
    t = frac * a.extinction_time
    assert oracle_eval(b, "vol", c * c * t) == pytest.approx(c * c * oracle_eval(a, "vol", t), rel=1e-9)
    assert oracle_eval(b, "lambda0", c * c * t) == pytest.approx(oracle_eval(a, "lambda0", t) / c ** 2, rel=1e-9)
    assert oracle_eval(b, "R", c * c * t) == pytest.approx(oracle_eval(a, "R", t) / c ** 2, rel=1e-9)
    assert oracle_eval(b, "T") == pytest.approx(c * c * oracle_eval(a, "T"), rel=1e-12)


@settings(max_examples=50)
@given(side=st.floats(0.1, 50.0), c=st.floats(0.1, 10.0))
def test_torus_formulas_scale_consistently(side, c):
    a, b = ModelSolution.flat_torus(side), ModelSolution.flat_torus(c * side)
    assert oracle_eval(b, "vol") == pytest.approx(c * c * oracle_eval(a, "vol"), rel=1e-12)
    assert oracle_eval(b, "lambda0") == 0.0
