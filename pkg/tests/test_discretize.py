import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pareig.coeffield import Domain1D, FieldError, make_field
from pareig.discretize import apply, assemble, build_mesh, stencil


def test_laplacian_spectrum_matches_closed_form():
    mesh = build_mesh(Domain1D(0.0, 1.0), 30)
    op = assemble(make_field({"kind": "constant"}), mesh, 0.0)
    dx = mesh.dx
    k = np.arange(1, 31)
    expected = (2.0 / dx ** 2) * (1.0 - np.cos(k * np.pi * dx))
    got = np.sort(np.linalg.eigvals(op.dense()).real)
    assert got == pytest.approx(expected, rel=1e-10)


def test_sine_mode_is_eigenvector():
    mesh = build_mesh(Domain1D(0.0, 1.0), 50)
    op = assemble(make_field({"kind": "constant", "c": 2.0}), mesh, 0.0)
    u = mesh.sine_profile()
    lam = (2.0 / mesh.dx ** 2) * (1.0 - np.cos(np.pi * mesh.dx)) - 2.0
    assert apply(op, u) == pytest.approx(lam * u, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(a=st.floats(0.1, 5.0), b=st.floats(-20.0, 20.0), c=st.floats(-10.0, 10.0),
       dt=st.floats(1e-5, 1e-2), n=st.integers(3, 40))
def test_implicit_matrix_is_m_matrix(a, b, c, dt, n):
    mesh = build_mesh(Domain1D(0.0, 1.0), n)
    op = assemble(make_field({"kind": "constant", "a": a, "b": b, "c": c}), mesh, 0.0)
    A = np.eye(n) + dt * op.dense()
    off = A - np.diag(np.diag(A))
    assert np.all(off <= 0.0)
    if dt * max(c, 0.0) < 1.0:
        # nonnegative inverse for a Z-matrix with positive diagonal dominance shift
        assert np.all(np.linalg.inv(A) >= -1e-12)


@settings(max_examples=40, deadline=None)
@given(a=st.floats(0.1, 5.0), b=st.floats(-20.0, 20.0), c=st.floats(-10.0, 10.0))
def test_row_sums_equal_minus_c_in_the_interior(a, b, c):
    lower, diag, upper = stencil(np.full(10, a), np.full(10, b), np.full(10, c), 0.1)
    rows = lower + diag + upper
    assert rows[1:-1] == pytest.approx(np.full(8, -c), abs=1e-9 * (1 + a * 100 + abs(b) * 10))


def test_upwind_direction():
    lower, diag, upper = stencil(np.ones(5), np.full(5, 3.0), np.zeros(5), 0.1)
    assert upper[0] == pytest.approx(-100.0 - 30.0)
    assert lower[1] == pytest.approx(-100.0)
    lower, diag, upper = stencil(np.ones(5), np.full(5, -3.0), np.zeros(5), 0.1)
    assert lower[1] == pytest.approx(-130.0)


def test_dense_and_banded_agree():
    fld = make_field({"kind": "time_independent", "a": "1 + x", "b": "sin(3*x)", "c": "x**2"})
    mesh = build_mesh(Domain1D(0.0, 1.0), 12)
    op = assemble(fld, mesh, 0.0)
    u = np.random.default_rng(1).uniform(size=12)
    assert apply(op, u) == pytest.approx(op.dense() @ u, abs=1e-10)
    ab = op.banded()
    assert np.array_equal(ab[1], op.diag)
    assert np.array_equal(ab[0, 1:], op.upper[:-1])


def test_mesh_validation():
    with pytest.raises(ValueError):
        build_mesh(Domain1D(0.0, 1.0), 2)
    mesh = build_mesh(Domain1D(-1.0, 3.0), 3)
    assert mesh.dx == pytest.approx(1.0)
    assert mesh.nodes == pytest.approx([0.0, 1.0, 2.0])


def test_apply_length_mismatch():
    op = assemble(make_field({"kind": "constant"}), build_mesh(Domain1D(0.0, 1.0), 5), 0.0)
    with pytest.raises(ValueError, match="length"):
        apply(op, np.ones(4))


def test_ellipticity_checked_on_assembly():
    fld = make_field({"kind": "time_independent", "a": "1 + x", "alpha": 1.0})
    mesh = build_mesh(Domain1D(-0.5, 1.0), 5)
    with pytest.raises(FieldError, match="ellipticity"):
        assemble(fld.with_domain(mesh.domain), mesh, 0.0)
