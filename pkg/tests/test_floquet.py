import math
import warnings

import numpy as np
import pytest

from pareig.coeffield import Domain1D, make_field
from pareig.discretize import build_mesh
from pareig.floquet import (HolderBoundViolation, auto_burn_in, bundle_traces, compute_bundle,
                            harnack_constant, holder_details, holder_fit, separation_rate,
                            unit_window_bound)
from pareig.stepper import StepScheme
from pareig.trace import BetaTrace, linear_trace

UNIT = Domain1D(0.0, 1.0)


def _laplace_eig(mesh, k):
    return (2.0 / mesh.dx ** 2) * (1.0 - math.cos(k * math.pi * mesh.dx))


def test_frozen_bundle_has_exact_discrete_slope():
    mesh = build_mesh(UNIT, 39)
    dt = 1e-3
    fld = make_field({"kind": "constant", "c": 5.0})
    tr = compute_bundle(fld, mesh, StepScheme(dt), -1.0, 2.0, burn_in=1.0, record_stride=10)
    rate = -math.log1p(dt * (_laplace_eig(mesh, 1) - 5.0)) / dt
    assert tr.value_at(0.0) == 0.0
    assert tr.beta[-1] == pytest.approx(2.0 * rate, rel=1e-9)
    assert tr.beta[0] == pytest.approx(-1.0 * rate, rel=1e-9)
    assert tr.burn_in_used == 1.0


def test_bundle_tags_and_minus_slice():
    mesh = build_mesh(UNIT, 19)
    fld = make_field({"kind": "log_oscillatory", "amplitude": 1.0})
    r, plus, minus = bundle_traces(fld, mesh, StepScheme(1e-2), 2.0, 3.0, 1.0, record_stride=5)
    assert (r.interval_tag, plus.interval_tag, minus.interval_tag) == ("R", "R_plus", "R_minus")
    assert minus.t_end == pytest.approx(0.0)
    assert minus.beta == pytest.approx(r.beta[: minus.n_samples])
    assert plus.t_start == 0.0 and plus.beta[0] == 0.0


def test_separation_rate_matches_spectral_gap():
    mesh = build_mesh(UNIT, 49)
    dt = 1e-3
    i = np.arange(1, 50)
    s1 = np.sin(np.pi * i / 50)
    s2 = np.sin(2 * np.pi * i / 50)
    fld = make_field({"kind": "constant", "c": 2.0})
    gamma = separation_rate(fld, mesh, StepScheme(dt), s1 + 0.1 * s2, s1, 0.6, record_stride=10)
    l1, l2 = _laplace_eig(mesh, 1), _laplace_eig(mesh, 2)
    expected = math.log((1 + dt * (l2 - 2.0)) / (1 + dt * (l1 - 2.0))) / dt
    assert gamma == pytest.approx(expected, rel=1e-4)


def test_separation_rejects_proportional_data():
    mesh = build_mesh(UNIT, 9)
    u = mesh.sine_profile()
    with pytest.raises(ValueError, match="proportional"):
        separation_rate(make_field({"kind": "constant"}), mesh, StepScheme(1e-3), u, 2 * u, 1.0)


def test_harnack_ratio_is_one_for_proportional_data():
    mesh = build_mesh(UNIT, 19)
    u = mesh.sine_profile()
    fld = make_field({"kind": "periodic", "period": 1.0, "c": "3*cos(2*pi*t)*x"})
    c = harnack_constant(fld, mesh, StepScheme(1e-3), data=[u, 3 * u], horizon=2.0)
    assert c == pytest.approx(1.0, abs=1e-12)


def test_harnack_ratio_decreases_with_delay():
    mesh = build_mesh(UNIT, 19)
    fld = make_field({"kind": "constant", "c": 1.0})
    early = harnack_constant(fld, mesh, StepScheme(1e-3), s0=0.05, horizon=0.1, trials=3)
    late = harnack_constant(fld, mesh, StepScheme(1e-3), s0=1.0, horizon=1.1, trials=3)
    assert 1.0 <= late < early


def test_unit_window_and_holder_on_linear_trace():
    tr = linear_trace(-2.5, 0.0, 200.0, 0.1)
    uw = unit_window_bound(tr)
    assert uw.ln_c_prime == pytest.approx(2.5)
    assert uw.holds and uw.increment_cap is None
    det = holder_details(tr)
    assert det.alpha == pytest.approx(1.0)
    assert det.H == pytest.approx(2.5)
    assert det.holds
    assert holder_fit(tr) == pytest.approx((1.0, 2.5))


def test_unit_window_cap_from_scheme_metadata():
    mesh = build_mesh(UNIT, 19)
    fld = make_field({"kind": "quasi_periodic", "terms": [[2, 1], [2, math.sqrt(2)]]})
    tr = compute_bundle(fld, mesh, StepScheme(1e-3), 0.0, 5.0, 1.0, record_stride=10)
    uw = unit_window_bound(tr)
    assert uw.holds
    assert uw.max_increment <= uw.increment_cap


def test_holder_needs_long_traces():
    with pytest.raises(ValueError, match="100"):
        holder_details(linear_trace(1.0, 0.0, 50.0, 0.1))


def test_holder_violation_raised_for_jumps():
    beta = np.zeros(2001)
    beta[1000:] = 1.0  # a jump: sub-unit increments do not shrink with the lag
    tr = BetaTrace("R_plus", 0.0, 0.1, beta)
    det = holder_details(tr)
    assert det.alpha == pytest.approx(0.0)
    with pytest.raises(HolderBoundViolation):
        holder_fit(tr)


def test_auto_burn_in_is_whole_steps():
    mesh = build_mesh(UNIT, 49)
    scheme = StepScheme(3e-3)
    burn, gamma = auto_burn_in(make_field({"kind": "constant", "c": 1.0}), mesh, scheme)
    assert gamma > 10.0
    steps = burn / scheme.dt
    assert steps == pytest.approx(round(steps), abs=1e-9)


def test_bundle_argument_checks():
    mesh = build_mesh(UNIT, 9)
    fld = make_field({"kind": "constant"})
    with pytest.raises(ValueError):
        compute_bundle(fld, mesh, StepScheme(1e-2), 0.0, 1.0, burn_in=0.0)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        compute_bundle(fld, mesh, StepScheme(1e-2), 0.0, 1.0, burn_in=0.1, gamma=10.0)
    assert any("burn_in" in str(w.message) for w in caught)
