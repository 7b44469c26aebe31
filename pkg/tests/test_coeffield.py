import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from pareig.coeffield import (Domain1D, FieldError, eval as field_eval, integral_sigma,
                              make_field, make_sigma, perturbed, sigma_antiderivative)

FAMILIES = [
    {"family": "constant", "value": 0.7},
    {"family": "cosine", "mean": 0.3, "amplitude": 1.2, "period": 1.7},
    {"family": "quasi_periodic", "mean": -0.2, "terms": [[1.0, 1.0], [0.5, math.sqrt(2)]]},
    {"family": "log_oscillatory", "amplitude": 0.8},
    {"family": "piecewise_linear_iid", "distribution": {"name": "uniform"}, "seed": 3},
]


def test_log_oscillatory_closed_form():
    # F(t) = ((1+t)/2)(cos + sin)(ln(1+t)) - 1/2; at t = e^{pi/4} - 1 this is e^{pi/4}/sqrt(2) - 1/2
    sig = make_sigma({"family": "log_oscillatory", "amplitude": 1.0})
    t = math.exp(math.pi / 4) - 1
    expected = math.exp(math.pi / 4) / math.sqrt(2) - 0.5
    assert expected == pytest.approx(1.0508831, abs=1e-7)
    assert integral_sigma(sig, 0.0, t) == pytest.approx(expected, rel=1e-13)
    num, _ = quad(lambda s: math.cos(math.log(1 + s)), 0.0, t, epsabs=1e-13)
    assert integral_sigma(sig, 0.0, t) == pytest.approx(num, abs=1e-12)


def test_cosine_full_period_vanishes():
    sig = make_sigma({"family": "cosine", "mean": 0.0, "amplitude": 1.0, "period": 1.0})
    assert integral_sigma(sig, 0.0, 1.0) == pytest.approx(0.0, abs=1e-15)


def test_constant_draws_integrate_exactly():
    sig = make_sigma({"family": "piecewise_linear_iid",
                      "distribution": {"name": "uniform", "low": 0.5, "high": 0.5}, "seed": 1})
    assert integral_sigma(sig, 0.0, 10.0) == pytest.approx(5.0, abs=1e-13)


@pytest.mark.parametrize("spec", FAMILIES, ids=lambda s: s["family"])
@settings(max_examples=25, deadline=None)
@given(t0=st.floats(-60, 60), length=st.floats(0.0, 30.0))
def test_antiderivative_matches_quadrature(spec, t0, length):
    sig = make_sigma(spec)
    t1 = t0 + length
    pts = np.arange(math.ceil(t0), math.floor(t1) + 1) if spec["family"].startswith("piece") else None
    num, _ = quad(lambda s: float(sig.value(s)), t0, t1, points=pts, limit=400, epsabs=1e-11)
    assert integral_sigma(sig, t0, t1) == pytest.approx(num, abs=1e-8 * (1 + length))


@pytest.mark.parametrize("spec", FAMILIES, ids=lambda s: s["family"])
@settings(max_examples=25, deadline=None)
@given(ts=st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3))
def test_integral_additivity(spec, ts):
    sig = make_sigma(spec)
    a, b, c = sorted(ts)
    whole = integral_sigma(sig, a, c)
    parts = integral_sigma(sig, a, b) + integral_sigma(sig, b, c)
    scale = max(1.0, abs(whole), abs(sig.antiderivative(a)), abs(sig.antiderivative(b)),
                abs(sig.antiderivative(c)))
    assert abs(whole - parts) <= 1e-12 * scale


FIELDS = [
    {"kind": "constant", "a": 2.0, "b": -1.0, "c": 3.0},
    {"kind": "time_independent", "a": "1 + 0.5*x", "b": "cos(pi*x)", "c": "sin(pi*x)"},
    {"kind": "periodic", "period": 2.0, "a": "1 + 0.3*sin(pi*t)", "c": "x*cos(pi*t)"},
    {"kind": "separable_sigma", "c0": "x", "sigma": {"family": "cosine", "amplitude": 1.0,
                                                     "period": 1.0}},
    {"kind": "quasi_periodic", "terms": [[1, 1], [1, math.sqrt(2)]]},
    {"kind": "log_oscillatory", "amplitude": 1.0, "c0": 2.0},
    {"kind": "random_stationary", "seed": 5, "distribution": "bernoulli"},
    {"kind": "converging", "a": 1.0, "c": "sin(pi*x)", "a_transient": 0.5, "rate": 0.4},
]


@pytest.mark.parametrize("spec", FIELDS, ids=lambda s: s["kind"])
def test_ellipticity_on_random_samples(spec):
    fld = make_field(spec)
    rng = np.random.default_rng(0)
    t = rng.uniform(-500, 500, 10_000)
    x = rng.uniform(0, 1, 10_000)
    assert np.all(fld.a(t, x) >= fld.alpha)


@pytest.mark.parametrize("spec", FIELDS, ids=lambda s: s["kind"])
@settings(max_examples=30, deadline=None)
@given(t=st.floats(-1e4, 1e4), x=st.floats(0, 1))
def test_even_reflection_is_exact(spec, t, x):
    fld = make_field({**spec, "even_reflected": True})
    assert field_eval(fld, -t, x) == field_eval(fld, t, x)


def test_reflected_matches_even_flag():
    spec = FIELDS[5]
    a = make_field(spec).reflected()
    b = make_field({**spec, "even_reflected": True})
    ts = np.linspace(-30, 30, 41)
    assert np.array_equal(a.c(ts, 0.3), b.c(ts, 0.3))


def test_periodic_field_is_periodic():
    fld = make_field(FIELDS[2])
    t = np.linspace(-3, 3, 31)
    assert np.allclose(fld.c(t, 0.4), fld.c(t + 2.0, 0.4), atol=1e-12)


def test_random_draws_are_order_independent():
    fld = make_field({"kind": "random_stationary", "seed": 11})
    ts = np.array([1e5 + 0.3, -7.25, 0.5, 3e4])
    together = fld.c(ts, 0.5)
    alone = [float(fld.c(t, 0.5)) for t in ts]
    assert np.array_equal(together, alone)
    again = make_field({"kind": "random_stationary", "seed": 11}).c(ts[::-1], 0.5)[::-1]
    assert np.array_equal(together, again)


def test_separable_antiderivative_through_translation():
    fld = make_field({"kind": "log_oscillatory", "amplitude": 1.0}).translated(5.0)
    num, _ = quad(lambda s: float(fld.sigma.value(s + 5.0)), -3.0, 12.0, epsabs=1e-13)
    diff = sigma_antiderivative(fld, 12.0) - sigma_antiderivative(fld, -3.0)
    assert float(diff) == pytest.approx(num, rel=1e-10)


@pytest.mark.parametrize("bad, match", [
    ({"kind": "nope"}, "kind"),
    ({"kind": "constant", "d": 1}, "unknown keys"),
    ({"kind": "constant", "a": -1.0}, "ellipticity|alpha|positive"),
    ({"kind": "quasi_periodic", "terms": [[1, 1], [1, 2]]}, "rational"),
    ({"kind": "periodic", "period": 1.0, "c": "cos(t)"}, "period"),
])
def test_invalid_specs_rejected(bad, match):
    with pytest.raises(FieldError, match=match):
        make_field(bad)


def test_domain_checked():
    fld = make_field({"kind": "constant"}, Domain1D(0.0, 2.0))
    with pytest.raises(FieldError):
        fld.c(0.0, 2.5)


def test_perturbation_shifts_coefficients():
    fld = make_field(FIELDS[3])
    p = perturbed(fld, da=0.01, dc=0.02)
    assert p.separable
    assert float(p.a(1.0, 0.5)) == pytest.approx(float(fld.a(1.0, 0.5)) + 0.01)
    assert float(p.c(1.3, 0.5)) == pytest.approx(float(fld.c(1.3, 0.5)) + 0.02)
    q = perturbed(fld, dc=lambda t, x: 0.01 * np.cos(t) * x)
    assert not q.separable
