"""Renormalized implicit time stepping for the linear problem u_t + L_h(t) u = 0.

Every step strips the sup-norm and records its logarithm, so log-norms over
horizons of 10^6 time units never overflow and are never re-exponentiated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .coeffield import CoefficientField
from .discretize import Mesh, coefficient_rows, stencil
from .trace import BetaTrace, infer_tag

_CHUNK = 4096


class PositivityLost(RuntimeError):
    """A step produced a negative entry (Crank-Nicolson) or a nonpositive pivot."""


@dataclass(frozen=True)
class StepScheme:
    dt: float = 1e-3
    theta: float = 1.0
    positivity_guard: bool = True

    def __post_init__(self):
        if self.theta not in (1.0, 0.5):
            raise ValueError("theta must be 1 (backward Euler) or 0.5 (Crank-Nicolson)")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.theta == 0.5 and not self.positivity_guard:
            raise ValueError("Crank-Nicolson requires positivity_guard=True")


@dataclass(frozen=True)
class NormalizedState:
    profile: np.ndarray
    log_mass: float
    t: float


def check_monotone(field: CoefficientField, scheme: StepScheme) -> None:
    """Backward Euler is monotone iff dt * max(c+) < 1."""
    if scheme.theta == 1.0 and scheme.dt * field.c_plus >= 1.0:
        raise ValueError(
            f"monotonicity condition dt*max(c+) < 1 violated: "
            f"dt={scheme.dt}, max(c+)={field.c_plus}")


class RowSource:
    """Produces operator rows and diagonal shifts for consecutive steps.

    Separable fields with time-independent a, b assemble one base row set and
    feed -sigma(t) as a per-step diagonal shift; frozen fields assemble once;
    everything else is assembled per step.
    """

    def __init__(self, field: CoefficientField, mesh: Mesh):
        self.field = field
        self.mesh = mesh
        x = mesh.nodes
        self.mode = "full"
        if not field.time_dependent:
            self.mode = "frozen"
            a, b, c = coefficient_rows(field, mesh, [0.0])
        elif field.separable and field.ab_static:
            self.mode = "separable"
            a = field.a(0.0, x)[None, :]
            b = field.b(0.0, x)[None, :]
            c = field.c0(x)[None, :]
            if np.any(a < field.alpha * (1 - 1e-12)):
                raise ValueError("ellipticity violated at the mesh nodes")
        if self.mode != "full":
            self.rows = stencil(np.broadcast_to(a, (1, len(x))), np.broadcast_to(b, (1, len(x))),
                                np.broadcast_to(c, (1, len(x))), mesh.dx)

    def __call__(self, times: np.ndarray):
        if self.mode == "frozen":
            return self.rows, np.zeros(len(times))
        if self.mode == "separable":
            return self.rows, -self.field.sigma_at(times)
        a, b, c = coefficient_rows(self.field, self.mesh, times)
        return stencil(a, b, c, self.mesh.dx), np.zeros(len(times))


def _validate_profile(u0) -> np.ndarray:
    u = np.array(u0, dtype=float, copy=True)
    if u.ndim != 1:
        raise ValueError("initial profile must be 1-D")
    if not np.all(np.isfinite(u)) or np.any(u < 0):
        raise ValueError("initial profile must be finite and nonnegative")
    if not np.any(u > 0):
        raise ValueError("initial profile is identically zero")
    return u


def propagate(field: CoefficientField, mesh: Mesh, scheme: StepScheme, profile, t0: float,
              n_steps: int, record_stride: int = 1, profile_every: int = 0,
              rows: RowSource | None = None):
    """Advance a max-normalized profile n_steps steps from t0.

    Returns (final_profile, cumulative_logs, snapshots) where
    cumulative_logs[j] = sum of per-step logs over the first (j+1)*record_stride
    steps and snapshots maps record times to profiles (every profile_every
    records).
    """
    check_monotone(field, scheme)
    u = _validate_profile(profile)
    if u.shape != (mesh.n_interior,):
        raise ValueError("profile length does not match the mesh")
    u /= u.max()
    if record_stride < 1 or n_steps % record_stride:
        raise ValueError("n_steps must be a positive multiple of record_stride")
    rows = rows or RowSource(field, mesh)
    n_rec = n_steps // record_stride
    cum = np.empty(n_rec)
    snapshots = {}
    snap_stride = record_stride * profile_every if profile_every > 0 else 0
    unit = snap_stride or record_stride
    chunk = unit * max(1, _CHUNK // unit)
    status = np.zeros(2, dtype=np.int64)
    total = 0.0
    done = 0
    while done < n_steps:
        k = min(chunk, n_steps - done)
        times = t0 + (done + np.arange(k) + scheme.theta) * scheme.dt
        (lower, diag, upper), shift = rows(times)
        logs = np.empty(k)
        snaps = np.empty((k // snap_stride if snap_stride else 0, mesh.n_interior))
        _kernels.advance_linear(lower, diag, upper, np.ascontiguousarray(shift, dtype=float), u,
                                scheme.dt, scheme.theta, logs, snap_stride, snaps, status)
        if status[0] != _kernels.OK:
            step_t = t0 + (done + status[1] + 1) * scheme.dt
            if status[0] == _kernels.NEGATIVE:
                raise PositivityLost(f"negative entry produced at t={step_t:.6g}; "
                                     f"fall back to theta=1 or reduce dt")
            raise PositivityLost(f"nonpositive pivot at t={step_t:.6g}: dt too large versus c")
        cs = total + np.cumsum(logs)
        total = float(cs[-1])
        idx = np.arange(record_stride - 1, k, record_stride)
        cum[done // record_stride: done // record_stride + len(idx)] = cs[idx]
        for j in range(snaps.shape[0]):
            snapshots[t0 + (done + (j + 1) * snap_stride) * scheme.dt] = snaps[j].copy()
        done += k
    return u, cum, snapshots


def step(field: CoefficientField, mesh: Mesh, scheme: StepScheme,
         state: NormalizedState) -> NormalizedState:
    """One renormalized theta-scheme step."""
    u = np.asarray(state.profile, dtype=float)
    if not np.any(u > 0) or np.any(u < 0):
        raise ValueError("invalid state: profile must be nonnegative and nonzero")
    new, cum, _ = propagate(field, mesh, scheme, u, state.t, 1)
    return NormalizedState(new, state.log_mass + float(cum[0]), state.t + scheme.dt)


def steps_between(t0: float, t1: float, dt: float) -> int:
    n = (t1 - t0) / dt
    k = int(round(n))
    if k < 1 or abs(n - k) > 1e-6 * max(1.0, n):
        raise ValueError(f"(t1 - t0) = {t1 - t0} is not a positive multiple of dt = {dt}")
    return k


def trace_meta(field: CoefficientField, mesh: Mesh, scheme: StepScheme) -> dict:
    return {
        "dt": scheme.dt,
        "theta": scheme.theta,
        "c_sup": field.c_sup,
        "c_plus": field.c_plus,
        "n_interior": mesh.n_interior,
        "dx": mesh.dx,
        "domain": [mesh.domain.x_lo, mesh.domain.x_hi],
        "field_kind": field.kind,
        "shift": field.shift,
    }


def evolve_normalized(field: CoefficientField, mesh: Mesh, scheme: StepScheme, u0,
                      t0: float, t1: float, record_stride: int = 1, profile_every: int = 0,
                      tag: str | None = None) -> tuple[BetaTrace, NormalizedState]:
    """Evolve u0 from t0 to t1 and record beta = ln||u||_inf.

    beta(t0) = ln||u0||_inf; samples every record_stride steps.  Returns the
    trace and the final normalized state.
    """
    if not t1 > t0:
        raise ValueError("need t1 > t0")
    u0 = _validate_profile(u0)
    n_steps = steps_between(t0, t1, scheme.dt)
    if n_steps % record_stride:
        raise ValueError("record_stride must divide the number of steps")
    norm0 = float(u0.max())
    final, cum, snaps = propagate(field, mesh, scheme, u0 / norm0, t0, n_steps,
                                  record_stride, profile_every)
    beta = math.log(norm0) + np.concatenate([[0.0], cum])
    if profile_every:
        snaps = {t0: u0 / norm0, **snaps}
    trace = BetaTrace(tag or infer_tag(t0, t1), t0, record_stride * scheme.dt, beta,
                      profiles=snaps, meta=trace_meta(field, mesh, scheme))
    return trace, NormalizedState(final, float(beta[-1]), t0 + n_steps * scheme.dt)
