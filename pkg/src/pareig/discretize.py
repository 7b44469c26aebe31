"""Monotone finite-difference discretization of -a u'' - b u' - c u.

Central differences for diffusion, upwind differences for advection, and
homogeneous Dirichlet values eliminated from the system.  Off-diagonals are
nonpositive for any drift, so I + dt*L is an M-matrix whenever dt*max(c+) < 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coeffield import CoefficientField, Domain1D, FieldError


@dataclass(frozen=True)
class Mesh:
    domain: Domain1D
    n_interior: int

    @property
    def dx(self) -> float:
        return self.domain.length / (self.n_interior + 1)

    @property
    def nodes(self) -> np.ndarray:
        i = np.arange(1, self.n_interior + 1)
        return self.domain.x_lo + i * self.dx

    def sine_profile(self) -> np.ndarray:
        """Discrete principal Dirichlet mode of the Laplacian, max-normalized."""
        i = np.arange(1, self.n_interior + 1)
        u = np.sin(np.pi * i / (self.n_interior + 1))
        return u / u.max()


@dataclass(frozen=True)
class TridiagonalOperator:
    """Rows i: lower[i]*u[i-1] + diag[i]*u[i] + upper[i]*u[i+1].

    lower[0] and upper[-1] multiply the eliminated boundary values and are
    stored as zero.
    """

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    timestamp: float = 0.0

    @property
    def n(self) -> int:
        return self.diag.shape[-1]

    def dense(self) -> np.ndarray:
        return (np.diag(self.diag) + np.diag(self.lower[1:], -1)
                + np.diag(self.upper[:-1], 1))

    def banded(self) -> np.ndarray:
        """(3, n) layout for scipy.linalg.solve_banded with (l, u) = (1, 1)."""
        ab = np.zeros((3, self.n))
        ab[0, 1:] = self.upper[:-1]
        ab[1] = self.diag
        ab[2, :-1] = self.lower[1:]
        return ab


def build_mesh(domain: Domain1D, n_interior: int) -> Mesh:
    if not isinstance(n_interior, (int, np.integer)) or n_interior < 3:
        raise ValueError(f"n_interior must be an integer >= 3, got {n_interior!r}")
    if not domain.x_hi > domain.x_lo:
        raise ValueError("degenerate domain")
    return Mesh(domain, int(n_interior))


def stencil(a, b, c, dx: float):
    """Upwind rows from coefficient arrays (broadcast over leading axes).

    Returns (lower, diag, upper) with the boundary-coupling entries zeroed.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    inv2 = 1.0 / (dx * dx)
    bp = np.maximum(b, 0.0) / dx
    bm = np.maximum(-b, 0.0) / dx
    lower = -a * inv2 - bm
    upper = -a * inv2 - bp
    diag = 2.0 * a * inv2 + bp + bm - c
    lower = np.array(lower, dtype=float, copy=True)
    upper = np.array(upper, dtype=float, copy=True)
    lower[..., 0] = 0.0
    upper[..., -1] = 0.0
    return lower, diag, upper


def _check_ellipticity(a: np.ndarray, alpha: float, t) -> None:
    bad = a < alpha * (1.0 - 1e-12)
    if np.any(bad):
        raise FieldError(
            f"ellipticity violated at t={t}: min a = {float(np.min(a))} < alpha = {alpha}")


def coefficient_rows(field: CoefficientField, mesh: Mesh, times):
    """a, b, c at the mesh nodes for an array of times, shape (len(times), n)."""
    t = np.asarray(times, dtype=float)[:, None]
    x = mesh.nodes[None, :]
    a = field.a(t, x)
    b = field.b(t, x)
    c = field.c(t, x)
    _check_ellipticity(a, field.alpha, "batch")
    return a, b, c


def assemble(field: CoefficientField, mesh: Mesh, t: float) -> TridiagonalOperator:
    x = mesh.nodes
    a = np.broadcast_to(field.a(t, x), x.shape)
    b = np.broadcast_to(field.b(t, x), x.shape)
    c = np.broadcast_to(field.c(t, x), x.shape)
    _check_ellipticity(a, field.alpha, t)
    lower, diag, upper = stencil(a, b, c, mesh.dx)
    return TridiagonalOperator(lower, diag, upper, float(t))


def apply(op: TridiagonalOperator, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != op.diag.shape:
        raise ValueError(f"length mismatch: operator {op.diag.shape}, vector {u.shape}")
    out = op.diag * u
    out[1:] += op.lower[1:] * u[:-1]
    out[:-1] += op.upper[:-1] * u[1:]
    return out
