import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pareig.coeffield import Domain1D, make_field
from pareig.discretize import assemble, build_mesh
from pareig.kpp import (ancient_uniqueness_gap, entire_solution_pullback, evolve_kpp,
                        make_nonlinearity, mp_decay_test, persistence_verdict, probe_indices,
                        steady_state_residual, symbolic_kpp_identities)
from pareig.stepper import StepScheme

UNIT = Domain1D(0.0, 1.0)


@pytest.mark.parametrize("form", ["logistic_quadratic", "logistic_cubic"])
def test_symbolic_identities_hold(form):
    assert all(symbolic_kpp_identities(form).values())


@pytest.mark.parametrize("form, p", [("logistic_quadratic", 1), ("logistic_cubic", 2)])
def test_identities_numerically(form, p):
    fld = make_field({"kind": "constant", "c": 3.0})
    fs = make_nonlinearity(form, fld, n=2.0)
    s = np.linspace(0.01, 3.0, 50)
    s2 = s[::-1]
    assert fs.f(3.0, 2.0, s) / s - fs.f(3.0, 2.0, s2) / s2 == pytest.approx(2.0 * (s2 ** p - s ** p))
    assert fs.f(3.0, 2.0, fs.M) == pytest.approx(0.0, abs=1e-12)
    assert fs.M == pytest.approx((1.5) ** (1 / p))


def test_saturation_bound_uses_positive_part():
    fld = make_field({"kind": "time_independent", "c": "4*x - 1"})
    assert make_nonlinearity("logistic_quadratic", fld, n="1 + x").M == pytest.approx(3.0)
    neg = make_field({"kind": "constant", "c": -1.0})
    assert make_nonlinearity("logistic_quadratic", neg).M == 1.0


def test_nonlinearity_validation():
    fld = make_field({"kind": "constant", "c": 1.0})
    with pytest.raises(ValueError):
        make_nonlinearity("logistic_quartic", fld)
    with pytest.raises(ValueError, match="positive"):
        make_nonlinearity("logistic_quadratic", fld, n=0.0)
    with pytest.raises(ValueError, match="explicit"):
        make_nonlinearity("logistic_quadratic", fld, n=0.0, strict=False)
    lin = make_nonlinearity("logistic_quadratic", fld, n=0.0, strict=False, M=5.0)
    assert lin.M == 5.0


def test_single_step_matches_dense_solve():
    fld = make_field({"kind": "periodic", "period": 1.0, "c": "2 + sin(pi*x)*cos(2*pi*t)",
                      "b": "0.5"})
    mesh = build_mesh(UNIT, 15)
    fs = make_nonlinearity("logistic_quadratic", fld, n="1 + 0.5*x")
    dt = 1e-2
    u0 = np.random.default_rng(0).uniform(0.0, 2.0, 15)
    traj = evolve_kpp(fld, fs, u0, 0.0, dt, mesh, StepScheme(dt))
    A = np.eye(15) + dt * assemble(fld, mesh, dt).dense()
    A += np.diag(dt * (1 + 0.5 * mesh.nodes) * u0)
    expected = np.linalg.solve(A, u0)
    assert traj.final == pytest.approx(expected, rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 31), scale=st.floats(0.0, 5.0), cubic=st.booleans())
def test_invariant_interval(seed, scale, cubic):
    fld = make_field({"kind": "periodic", "period": 1.0, "c": "3 + 2*cos(2*pi*t)*x"})
    mesh = build_mesh(UNIT, 20)
    fs = make_nonlinearity("logistic_cubic" if cubic else "logistic_quadratic", fld)
    u0 = scale * np.random.default_rng(seed).uniform(0.0, 1.0, 20)
    traj = evolve_kpp(fld, fs, u0, 0.0, 2.0, mesh, StepScheme(1e-2), record_stride=5)
    bound = max(fs.M, float(u0.max()))
    assert np.all(traj.final >= 0)
    assert np.all(traj.sup <= bound * (1 + 1e-12))


def test_steady_state_is_reached():
    fld = make_field({"kind": "constant", "c": 20.0})
    mesh = build_mesh(UNIT, 49)
    fs = make_nonlinearity("logistic_quadratic", fld)
    traj = evolve_kpp(fld, fs, 0.1 * mesh.sine_profile(), 0.0, 20.0, mesh, StepScheme(1e-2), 100)
    assert steady_state_residual(fld, fs, traj.final, mesh) < 1e-6
    assert 0 < traj.final.max() < fs.M


def test_persistence_verdicts():
    mesh = build_mesh(UNIT, 49)
    scheme = StepScheme(1e-2)
    u0 = 0.1 * mesh.sine_profile()
    plus = make_field({"kind": "constant", "c": math.pi ** 2 + 2.0})
    minus = make_field({"kind": "constant", "c": math.pi ** 2 - 2.0})
    v = persistence_verdict(plus, make_nonlinearity("logistic_quadratic", plus), u0, 30.0,
                            mesh, scheme)
    assert v.verdict == "persistent" and v.consistency and v.mu_bp_plus < 0
    v = persistence_verdict(minus, make_nonlinearity("logistic_quadratic", minus), u0, 30.0,
                            mesh, scheme)
    assert v.verdict == "extinct" and v.consistency and v.mu_bp_plus > 0
    assert v.fitted_rate == pytest.approx(-v.mu_bp_plus, rel=1e-2)


def test_decay_rate_is_discrete_eigenvalue():
    mesh = build_mesh(UNIT, 49)
    dt = 1e-2
    fld = make_field({"kind": "constant", "c": 5.0})
    res = mp_decay_test(fld, mesh, StepScheme(dt), mesh.sine_profile(), [2.0, 4.0, 8.0])
    lam = 2.0 / mesh.dx ** 2 * (1.0 - math.cos(math.pi * mesh.dx)) - 5.0
    assert res.fitted_rate == pytest.approx(-math.log1p(dt * lam) / dt, rel=1e-10)
    assert res.classification == "decay"


def test_pullback_from_saturation_decreases():
    mesh = build_mesh(UNIT, 29)
    scheme = StepScheme(1e-2)
    fld = make_field({"kind": "periodic", "period": 1.0, "c": "pi**2 + 2 + cos(2*pi*t)"})
    fs = make_nonlinearity("logistic_quadratic", fld)
    pb = entire_solution_pullback(fld, fs, [2, 4, 6, 8], (0.0, 1.0), mesh, scheme)
    assert all(pb.monotone)
    assert pb.gaps[-1] < pb.gaps[0]
    assert min(pb.floors) > 0
    gaps = ancient_uniqueness_gap(fld, fs, [2, 4, 6, 8], 0.5 * fs.M * mesh.sine_profile(),
                                  (0.0, 1.0), mesh, scheme)
    assert gaps[-1] < gaps[0]
    with pytest.raises(ValueError, match="saturation"):
        ancient_uniqueness_gap(fld, fs, [2, 4], 2 * fs.M * np.ones(29), (0.0, 1.0), mesh, scheme)


def test_probe_covers_middle_of_interval():
    mesh = build_mesh(UNIT, 99)
    lo, hi = probe_indices(mesh)
    assert mesh.nodes[lo] == pytest.approx(0.2)
    assert mesh.nodes[hi - 1] == pytest.approx(0.8)


def test_semilinear_requires_backward_euler():
    fld = make_field({"kind": "constant", "c": 1.0})
    mesh = build_mesh(UNIT, 9)
    with pytest.raises(ValueError, match="theta"):
        evolve_kpp(fld, make_nonlinearity("logistic_quadratic", fld), np.ones(9), 0.0, 1.0,
                   mesh, StepScheme(1e-2, 0.5))
