import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pareig.coeffield import Domain1D, make_field
from pareig.discretize import assemble, build_mesh
from pareig.eigensolve import averaged_lower_bound, dirichlet_eigen, periodic_eigen
from pareig.stepper import StepScheme

UNIT = Domain1D(0.0, 1.0)


def test_laplacian_eigenvalue_closed_form():
    mesh = build_mesh(UNIT, 99)
    ev = dirichlet_eigen(make_field({"kind": "constant"}), mesh)
    closed = 2.0 / mesh.dx ** 2 * (1.0 - math.cos(math.pi * mesh.dx))
    assert ev.value == pytest.approx(closed, rel=1e-12)
    assert ev.eigenvector == pytest.approx(mesh.sine_profile(), abs=1e-8)


@settings(max_examples=30, deadline=None)
@given(a0=st.floats(0.3, 3.0), a1=st.floats(0.0, 1.0), b0=st.floats(-5.0, 5.0),
       c0=st.floats(-5.0, 10.0), n=st.integers(5, 40))
def test_inverse_iteration_matches_dense_spectrum(a0, a1, b0, c0, n):
    fld = make_field({"kind": "time_independent", "a": f"{a0!r} + {a1!r}*x",
                      "b": f"{b0!r}*cos(pi*x)", "c": f"{c0!r}*sin(pi*x)"})
    mesh = build_mesh(UNIT, n)
    dense = assemble(fld, mesh, 0.0).dense()
    w = np.linalg.eigvals(dense)
    principal = w[np.argmin(w.real)]
    ev = dirichlet_eigen(fld, mesh)
    assert abs(principal.imag) < 1e-8 * (1 + abs(principal.real))
    assert ev.value == pytest.approx(principal.real, rel=1e-8, abs=1e-8)
    assert np.all(ev.eigenvector > 0)


def test_frozen_eigenvalue_of_a_time_dependent_field():
    fld = make_field({"kind": "separable_sigma", "c0": 0.0,
                      "sigma": {"family": "cosine", "mean": 0.0, "amplitude": 2.0, "period": 4.0}})
    mesh = build_mesh(UNIT, 49)
    base = dirichlet_eigen(make_field({"kind": "constant"}), mesh).value
    assert dirichlet_eigen(fld, mesh, 0.0).value == pytest.approx(base - 2.0, rel=1e-10)
    assert dirichlet_eigen(fld, mesh, 1.0).value == pytest.approx(base, rel=1e-10)


def _exact_periodic_rate(lam, sigma_mean, amp, period, dt, theta):
    # separable sigma: each step multiplies the principal mode by 1 / (1 + dt (lam - sigma))
    n = int(round(period / dt))
    t = (np.arange(n) + theta) * dt
    s = sigma_mean + amp * np.cos(2 * np.pi * t / period)
    if theta == 1.0:
        return float(np.sum(np.log1p(dt * (lam - s)))) / period
    return float(np.sum(np.log((1 + dt * (lam - s) / 2) / (1 - dt * (lam - s) / 2)))) / period


@pytest.mark.parametrize("theta", [1.0, 0.5])
def test_period_map_matches_exact_discrete_rate(theta):
    fld = make_field({"kind": "separable_sigma", "c0": 0.0,
                      "sigma": {"family": "cosine", "mean": 1.0, "amplitude": 1.0, "period": 1.0}})
    mesh = build_mesh(UNIT, 49)
    lam = 2.0 / mesh.dx ** 2 * (1.0 - math.cos(math.pi * mesh.dx))
    dt = 1e-3
    pe = periodic_eigen(fld, mesh, StepScheme(dt, theta))
    assert pe.value == pytest.approx(_exact_periodic_rate(lam, 1.0, 1.0, 1.0, dt, theta),
                                     abs=1e-10)


def test_period_map_richardson_approaches_continuum():
    fld = make_field({"kind": "separable_sigma", "c0": 0.0,
                      "sigma": {"family": "cosine", "mean": 1.0, "amplitude": 1.0, "period": 1.0}})
    mesh = build_mesh(UNIT, 49)
    lam = 2.0 / mesh.dx ** 2 * (1.0 - math.cos(math.pi * mesh.dx))
    single = periodic_eigen(fld, mesh, StepScheme(1e-3))
    rich = periodic_eigen(fld, mesh, StepScheme(1e-3), dts=(1e-3, 5e-4))
    assert abs(rich.value - (lam - 1.0)) < 0.05 * abs(single.value - (lam - 1.0))


def test_period_map_needs_a_period():
    mesh = build_mesh(UNIT, 9)
    with pytest.raises(ValueError):
        periodic_eigen(make_field({"kind": "log_oscillatory"}), mesh, StepScheme(1e-2))
    with pytest.raises(ValueError, match="differs"):
        periodic_eigen(make_field({"kind": "periodic", "period": 1.0, "c": "cos(2*pi*t)"}),
                       mesh, StepScheme(1e-2), period=2.0)


def test_averaged_bound_of_separable_field():
    # lambda_D(t) = lambda_0 - sigma(t), least mean = lambda_0 - mean
    fld = make_field({"kind": "separable_sigma", "c0": "x",
                      "sigma": {"family": "cosine", "mean": 0.4, "amplitude": 1.0, "period": 2.0}})
    mesh = build_mesh(UNIT, 29)
    lam0 = dirichlet_eigen(fld, mesh, 0.5).value  # sigma(0.5) equals the mean
    grid = np.arange(0.0, 400.0, 0.05)
    got = averaged_lower_bound(fld, mesh, grid, T_list=[4.0, 20.0, 80.0])
    assert got == pytest.approx(lam0, abs=1e-6)


def test_averaged_bound_rejects_drift():
    fld = make_field({"kind": "periodic", "period": 1.0, "b": "sin(2*pi*t)"})
    with pytest.raises(ValueError, match="b == 0"):
        averaged_lower_bound(fld, build_mesh(UNIT, 9), np.linspace(0, 10, 101))
