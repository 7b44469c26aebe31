import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import solve_banded

from pareig.coeffield import Domain1D, make_field
from pareig.discretize import assemble, build_mesh
from pareig.stepper import (NormalizedState, PositivityLost, StepScheme, evolve_normalized,
                            propagate, step)

UNIT = Domain1D(0.0, 1.0)


def _sine_lambda(mesh, c=0.0):
    return (2.0 / mesh.dx ** 2) * (1.0 - math.cos(math.pi * mesh.dx)) - c


@pytest.mark.parametrize("theta", [1.0, 0.5])
def test_single_mode_growth_factor(theta):
    mesh = build_mesh(UNIT, 40)
    dt = 1e-3
    lam = _sine_lambda(mesh, 3.0)
    fld = make_field({"kind": "constant", "c": 3.0})
    tr, _ = evolve_normalized(fld, mesh, StepScheme(dt, theta), mesh.sine_profile(), 0.0, 0.5)
    if theta == 1.0:
        rate = -math.log1p(dt * lam) / dt
    else:
        rate = math.log((1 - dt * lam / 2) / (1 + dt * lam / 2)) / dt
    assert tr.beta[-1] == pytest.approx(0.5 * rate, rel=1e-10)


def test_dual_route_against_scipy_banded_solves():
    fld = make_field({"kind": "periodic", "period": 1.0, "a": "1 + 0.3*sin(2*pi*t)*x",
                      "b": "2*cos(2*pi*t)", "c": "3*sin(pi*x)*cos(2*pi*t)"})
    mesh = build_mesh(UNIT, 25)
    for theta in (1.0, 0.5):
        dt = 2e-3
        u = np.random.default_rng(2).uniform(0.1, 1.0, 25)
        ref = u / u.max()
        log_ref = 0.0
        for n in range(50):
            op = assemble(fld, mesh, (n + theta) * dt)
            rhs = ref - (1 - theta) * dt * (op.dense() @ ref)
            ab = theta * dt * op.banded()
            ab[1] += 1.0
            ref = solve_banded((1, 1), ab, rhs)
            m = ref.max()
            log_ref += math.log(m)
            ref /= m
        got, cum, _ = propagate(fld, mesh, StepScheme(dt, theta), u, 0.0, 50)
        assert got == pytest.approx(ref, rel=1e-11, abs=1e-13)
        assert cum[-1] == pytest.approx(log_ref, abs=1e-11)


def test_separable_rows_match_full_assembly():
    sig = {"family": "log_oscillatory", "amplitude": 1.0}
    sep = make_field({"kind": "separable_sigma", "c0": "x", "sigma": sig})
    assert sep.separable
    u0 = np.ones(31)
    mesh = build_mesh(UNIT, 31)
    scheme = StepScheme(1e-3, 1.0)
    tr_sep, _ = evolve_normalized(sep, mesh, scheme, u0, 0.0, 1.0)
    # same coefficients through the generic per-step path
    full = replace(sep, sigma=None, c0_fn=None)
    assert not full.separable
    tr_full, _ = evolve_normalized(full, mesh, scheme, u0, 0.0, 1.0)
    assert tr_sep.beta == pytest.approx(tr_full.beta, abs=1e-11)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 31), b=st.floats(-5, 5), c=st.floats(-5, 50))
def test_positivity_preserved(seed, b, c):
    rng = np.random.default_rng(seed)
    u0 = rng.uniform(0.0, 1.0, 20)
    u0[rng.integers(0, 20)] = 1.0
    fld = make_field({"kind": "constant", "b": b, "c": c})
    u, cum, _ = propagate(fld, build_mesh(UNIT, 20), StepScheme(1e-3, 1.0), u0, 0.0, 20)
    assert np.all(u > 0)
    assert u.max() == pytest.approx(1.0)
    assert np.all(np.isfinite(cum))


def test_log_mass_does_not_overflow():
    fld = make_field({"kind": "constant", "c": 900.0})
    tr, state = evolve_normalized(fld, build_mesh(UNIT, 9), StepScheme(1e-3, 1.0),
                                  np.ones(9), 0.0, 10.0, record_stride=100)
    assert state.log_mass > 700 * 10 * 0.9
    assert np.all(np.isfinite(tr.beta))


def test_monotonicity_condition_enforced():
    fld = make_field({"kind": "constant", "c": 2000.0})
    with pytest.raises(ValueError, match="monotonicity"):
        propagate(fld, build_mesh(UNIT, 9), StepScheme(1e-3, 1.0), np.ones(9), 0.0, 1)


def test_crank_nicolson_negative_entries_reported():
    fld = make_field({"kind": "constant"})
    mesh = build_mesh(UNIT, 199)
    u0 = np.zeros(199)
    u0[100] = 1.0
    with pytest.raises(PositivityLost, match="theta=1"):
        propagate(fld, mesh, StepScheme(1e-2, 0.5), u0, 0.0, 5)


def test_single_step_state_bookkeeping():
    mesh = build_mesh(UNIT, 9)
    fld = make_field({"kind": "constant", "c": 1.0})
    s = step(fld, mesh, StepScheme(0.01), NormalizedState(mesh.sine_profile(), 2.0, 0.0))
    assert s.t == pytest.approx(0.01)
    assert s.log_mass == pytest.approx(2.0 - math.log1p(0.01 * _sine_lambda(mesh, 1.0)))
    with pytest.raises(ValueError):
        step(fld, mesh, StepScheme(0.01), NormalizedState(-mesh.sine_profile(), 0.0, 0.0))


@pytest.mark.parametrize("bad", [{"theta": 0.3}, {"dt": 0.0},
                                 {"theta": 0.5, "positivity_guard": False}])
def test_scheme_validation(bad):
    with pytest.raises(ValueError):
        StepScheme(**bad)


def test_trace_sampling_and_errors():
    fld = make_field({"kind": "constant"})
    mesh = build_mesh(UNIT, 9)
    tr, st_ = evolve_normalized(fld, mesh, StepScheme(0.01), 3 * np.ones(9), 0.0, 1.0,
                                record_stride=10)
    assert len(tr.beta) == 11
    assert tr.beta[0] == pytest.approx(math.log(3.0))
    assert st_.t == pytest.approx(1.0)
    with pytest.raises(ValueError):
        evolve_normalized(fld, mesh, StepScheme(0.01), np.ones(9), 0.0, 1.0, record_stride=7)
    with pytest.raises(ValueError):
        evolve_normalized(fld, mesh, StepScheme(0.01), np.zeros(9), 0.0, 1.0)
