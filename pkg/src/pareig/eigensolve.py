"""Independent spectral oracles.

dirichlet_eigen uses scipy's banded solver rather than the compiled stepping
kernel, so agreement between the two routes is a genuine cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import solve_banded

from .coeffield import CoefficientField
from .discretize import Mesh, apply, assemble
from .stepper import StepScheme, propagate, steps_between


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class EigenvalueEstimate:
    value: float
    eigenvector: np.ndarray
    iterations: int
    residual: float
    detail: dict | None = None


def dirichlet_eigen(field: CoefficientField, mesh: Mesh, t_star: float = 0.0,
                    tol: float = 1e-10, max_iter: int = 10_000) -> EigenvalueEstimate:
    """Principal eigenpair of the operator frozen at t_star.

    Shifted inverse iteration: (L + s I) is an M-matrix for s = ||c||_inf + 1,
    its inverse is positive, and the iteration converges to the
    Perron eigenvector.  The eigenvalue is a Rayleigh-type quotient
    read at the maximum of the current vector.
    """
    op = assemble(field, mesh, t_star)
    x = mesh.nodes
    c_sup = float(np.max(np.abs(field.c(t_star, x))))
    shift = c_sup + 1.0
    ab = op.banded()
    ab[1] += shift
    v = mesh.sine_profile()
    value = math.nan
    resid = math.inf
    for it in range(1, max_iter + 1):
        w = solve_banded((1, 1), ab, v)
        w /= np.max(np.abs(w))
        lv = apply(op, w)
        value = float(np.dot(w, lv) / np.dot(w, w))
        resid = float(np.max(np.abs(lv - value * w)))
        v = w
        if resid <= tol * max(1.0, abs(value)):
            break
    else:
        raise ConvergenceError(f"inverse iteration did not converge in {max_iter} steps "
                               f"(residual {resid:.3g})")
    if np.any(v <= 0):
        v = np.abs(v)
    return EigenvalueEstimate(value, v / v.max(), it, resid)


def periodic_eigen(field: CoefficientField, mesh: Mesh, scheme: StepScheme,
                   period: float | None = None, max_periods: int = 500,
                   dts=None, t0: float = 0.0) -> EigenvalueEstimate:
    """Principal eigenvalue of a time-periodic problem via the period map.

    Power iteration on the normalized one-period propagator; the converged
    log-multiplier l gives value = -l / period.  With ``dts`` (two step sizes,
    the larger first) the first-order dt bias is Richardson-extrapolated.
    """
    period = field.period if period is None else period
    if period is None or not period > 0:
        raise ValueError("periodic_eigen needs a periodic field")
    if field.period is not None and abs(field.period - period) > 1e-12 * period:
        raise ValueError(f"field period {field.period} differs from {period}")
    if field.time_dependent and field.period is None:
        raise ValueError("field is not periodic")
    if dts is not None:
        dts = sorted((float(d) for d in dts), reverse=True)
        if len(dts) != 2:
            raise ValueError("dts must hold two step sizes")
        coarse = periodic_eigen(field, mesh, replace(scheme, dt=dts[0]), period, max_periods,
                                t0=t0)
        fine = periodic_eigen(field, mesh, replace(scheme, dt=dts[1]), period, max_periods,
                              t0=t0)
        r = dts[0] / dts[1]
        value = fine.value + (fine.value - coarse.value) / (r - 1.0)
        return EigenvalueEstimate(value, fine.eigenvector, fine.iterations + coarse.iterations,
                                  max(fine.residual, coarse.residual),
                                  {"fine": fine.value, "coarse": coarse.value, "dts": dts})
    n = steps_between(t0, t0 + period, scheme.dt)
    u = mesh.sine_profile()
    prev = None
    for it in range(1, max_periods + 1):
        new, cum, _ = propagate(field, mesh, scheme, u, t0, n, record_stride=n)
        ell = float(cum[-1])
        change = float(np.max(np.abs(new - u)))
        u = new
        if prev is not None and abs(ell - prev) < 1e-12 and change < 1e-10:
            return EigenvalueEstimate(-ell / period, u.copy(), it, change,
                                      {"log_multiplier": ell})
        prev = ell
    raise ConvergenceError(f"period map did not converge in {max_periods} periods")


def averaged_lower_bound(field: CoefficientField, mesh: Mesh, t_grid,
                         T_list=None) -> float:
    """Least mean of t -> lambda_D(frozen operator at t) over a uniform grid.

    For u_t - u_xx - c(t, x) u this bounds lambda_bp(R) from below.
    """
    from .growthrate import least_mean

    t_grid = np.asarray(t_grid, dtype=float)
    x = mesh.nodes
    probe_t = t_grid[:: max(1, len(t_grid) // 50)][:, None]
    a = field.a(probe_t, x[None, :])
    b = field.b(probe_t, x[None, :])
    if np.max(np.abs(a - 1.0)) > 1e-12 or np.max(np.abs(b)) > 1e-12:
        raise ValueError("averaged_lower_bound supports a == 1, b == 0 only")
    dts = np.diff(t_grid)
    if len(t_grid) < 3 or np.ptp(dts) > 1e-9 * max(1.0, float(np.mean(dts))):
        raise ValueError("t_grid must be uniform with at least three points")
    lam = np.array([dirichlet_eigen(field, mesh, t).value for t in t_grid])
    return float(least_mean(lam, float(dts[0]), T_list))
