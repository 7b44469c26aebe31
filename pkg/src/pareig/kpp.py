"""Semilinear logistic problems u_t - a u_xx - b u_x = c u - n u^p u.

Time stepping is backward Euler for the linear part with the absorption
-n u^p u weighted implicitly at the old state (Patankar form), which keeps the
update an M-matrix and preserves 0 <= u <= max(M, ||u0||).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np
import sympy

from . import _kernels
from .coeffield import CoefficientField, FieldError, _function
from .discretize import Mesh
from .floquet import compute_bundle
from .growthrate import base_eigenvalue, global_growth_rates, synthetic_trace
from .stepper import PositivityLost, RowSource, StepScheme, check_monotone, steps_between

FORMS = {"logistic_quadratic": 1, "logistic_cubic": 2}


@dataclass(frozen=True)
class NonlinearitySpec:
    """f(t, x, s) = c(t, x) s - n(t, x) s^(p+1), p = 1 (quadratic) or 2 (cubic)."""

    form: str
    n_fn: object
    n_min: float
    M: float
    n_desc: object = 1.0

    @property
    def power(self) -> int:
        return FORMS[self.form]

    def f(self, c, n, s):
        s = np.asarray(s, dtype=float)
        return c * s - n * s ** (self.power + 1)

    def n_at(self, t, x):
        return self.n_fn(t, x)


def make_nonlinearity(form: str, field: CoefficientField, n=1.0, M: float | None = None,
                      strict: bool = True) -> NonlinearitySpec:
    """Logistic nonlinearity with saturation bound M.

    M = sup c / n_min (quadratic) or its square root (cubic).  strict=False
    admits n = 0 (a linear control case) and then needs an explicit M.
    """
    if form not in FORMS:
        raise ValueError(f"unknown nonlinearity form {form!r}")
    n_fn, const = _function(n, ("t", "x"), "nonlinearity.n")
    if const:
        n_min = float(n_fn(0.0, 0.0))
    else:
        ts = np.linspace(-50, 50, 401)[:, None]
        xs = np.linspace(field.domain.x_lo, field.domain.x_hi, 101)[None, :]
        n_min = float(np.min(n_fn(ts, xs)))
    if n_min <= 0 and strict:
        raise ValueError("n must be bounded below by a positive constant")
    if n_min < 0:
        raise ValueError("n must be nonnegative")
    if M is None:
        if n_min <= 0:
            raise ValueError("n = 0 needs an explicit saturation bound M")
        ratio = field.c_plus / n_min
        M = ratio if form == "logistic_quadratic" else math.sqrt(ratio)
        if M <= 0:
            M = 1.0
    return NonlinearitySpec(form, n_fn, n_min, float(M), n)


def symbolic_kpp_identities(form: str) -> dict:
    """Check the structural identities of f symbolically.

    Returns a dict of booleans: f(0) = 0, f_s(0) = c, the concavity identity
    f(s)/s - f(s')/s' = n (s'^p - s^p), and f(M) <= 0 at the saturation bound.
    """
    c, n, s, s2 = sympy.symbols("c n s s2", positive=True)
    p = FORMS[form]
    f = c * s - n * s ** (p + 1)
    f2 = f.subs(s, s2)
    M = (c / n) ** sympy.Rational(1, p)
    return {
        "f_zero": sympy.simplify(f.subs(s, 0)) == 0,
        "linearization": sympy.simplify(sympy.diff(f, s).subs(s, 0) - c) == 0,
        "concavity": sympy.simplify(f / s - f2 / s2 - n * (s2 ** p - s ** p)) == 0,
        "saturation": sympy.simplify(f.subs(s, M)) == 0,
    }


@dataclass
class KPPTrajectory:
    times: np.ndarray
    sup: np.ndarray
    probe_inf: np.ndarray
    profiles: np.ndarray
    final: np.ndarray
    probe: tuple


def probe_indices(mesh: Mesh, fraction: float = 0.6) -> tuple[int, int]:
    """Index range of nodes in the middle `fraction` of the interval."""
    x = (mesh.nodes - mesh.domain.x_lo) / mesh.domain.length
    lo = 0.5 - fraction / 2
    idx = np.nonzero((x >= lo - 1e-12) & (x <= 1 - lo + 1e-12))[0]
    return int(idx[0]), int(idx[-1]) + 1


def evolve_kpp(field: CoefficientField, fspec: NonlinearitySpec, u0, t0: float, t1: float,
               mesh: Mesh, scheme: StepScheme, record_stride: int = 1,
               keep_profiles: bool = False, probe: tuple | None = None) -> KPPTrajectory:
    """Semilinear trajectory with sup and probe-set inf recorded per stride."""
    if scheme.theta != 1.0:
        raise ValueError("semilinear stepping uses backward Euler (theta = 1)")
    check_monotone(field, scheme)
    u = np.array(u0, dtype=float, copy=True)
    if u.shape != (mesh.n_interior,) or np.any(u < 0) or not np.all(np.isfinite(u)):
        raise ValueError("u0 must be finite, nonnegative and match the mesh")
    n_steps = steps_between(t0, t1, scheme.dt)
    if n_steps % record_stride:
        raise ValueError("record_stride must divide the number of steps")
    probe = probe or probe_indices(mesh)
    rows = RowSource(field, mesh)
    x = mesh.nodes
    n_rec = n_steps // record_stride
    sups = np.empty(n_rec)
    infs = np.empty(n_rec)
    profiles = np.empty((n_rec if keep_profiles else 0, mesh.n_interior))
    chunk = record_stride * max(1, 4096 // record_stride)
    static_n = isinstance(fspec.n_desc, (int, float))
    absorb_static = np.full((1, mesh.n_interior), float(fspec.n_desc)) if static_n else None
    status = np.zeros(2, dtype=np.int64)
    done = 0
    while done < n_steps:
        k = min(chunk, n_steps - done)
        times = t0 + (done + np.arange(k) + 1) * scheme.dt
        (lower, diag, upper), shift = rows(times)
        if static_n:
            absorb = absorb_static
        else:
            absorb = np.broadcast_to(fspec.n_at(field.effective_time(times)[:, None],
                                                x[None, :]), (k, mesh.n_interior)).copy()
        j0 = done // record_stride
        nr = k // record_stride
        snaps = profiles[j0:j0 + nr] if keep_profiles else profiles
        s_out = np.empty(nr)
        i_out = np.empty(nr)
        snap_buf = np.empty((nr if keep_profiles else 0, mesh.n_interior))
        _kernels.advance_kpp(lower, diag, upper, np.ascontiguousarray(shift, dtype=float),
                             absorb, fspec.power, u, scheme.dt, record_stride, s_out, i_out,
                             probe[0], probe[1], snap_buf, status)
        if status[0] != _kernels.OK:
            raise PositivityLost(f"semilinear step failed at t={times[status[1]]:.6g}")
        sups[j0:j0 + nr] = s_out
        infs[j0:j0 + nr] = i_out
        if keep_profiles:
            snaps[:] = snap_buf
        done += k
    times = t0 + record_stride * scheme.dt * np.arange(1, n_rec + 1)
    return KPPTrajectory(times, sups, infs, profiles, u.copy(), probe)


# ---------------------------------------------------------------------------
# persistence


@dataclass
class PersistenceVerdict:
    verdict: str
    floor: float
    mu_bp_plus: float
    consistency: bool
    margin: float
    fitted_rate: float | None = None
    final_sup: float = math.nan
    detail: dict = dc_field(default_factory=dict)


def linearized_mu_bp_plus(field: CoefficientField, mesh: Mesh, scheme: StepScheme,
                          horizon: float = 40.0, synthetic_span: float = 1e6):
    """mu_bp(R+) of the linearization and its trust radius.

    Separable fields use the exact synthetic trace; others the PDE trace.
    """
    if field.separable and field.ab_static and field.sigma.exact:
        lam = base_eigenvalue(field, mesh)
        trace = synthetic_trace(lam, field.reflected(), 0.0, synthetic_span, 1.0)
        T_list = [10.0, 100.0, 1e3, 1e4] if synthetic_span >= 1e5 else None
    else:
        trace = compute_bundle(field.reflected(), mesh, scheme, 0.0, horizon, 3.0, 10)
        T_list = [horizon / 16, horizon / 8, horizon / 4]
    lgr, _ = global_growth_rates(trace, T_list)
    return -lgr.value, lgr.trust_radius


def persistence_verdict(field: CoefficientField, fspec: NonlinearitySpec, u0, horizon: float,
                        mesh: Mesh, scheme: StepScheme, probe: tuple | None = None,
                        mu_bp_plus: float | None = None, margin: float | None = None,
                        floor_tol: float = 1e-3, ext_tol: float = 1e-6,
                        margin_floor: float = 1e-2, record_stride: int = 10
                        ) -> PersistenceVerdict:
    """Classify the long-run behaviour of the semilinear solution from u0."""
    u0 = np.asarray(u0, dtype=float)
    if np.any(u0 < 0) or not np.any(u0 > 0):
        raise ValueError("u0 must be nonnegative and nonzero")
    traj = evolve_kpp(field, fspec, u0, 0.0, horizon, mesh, scheme, record_stride, probe=probe)
    tail = traj.times >= 0.8 * horizon
    if tail.sum() < 3:
        raise ValueError("horizon too short for the tail statistics")
    floor = float(traj.probe_inf[tail].min())
    final_sup = float(traj.sup[-1])
    rate = None
    logs = np.log(np.maximum(traj.sup[tail], 1e-300))
    if np.all(traj.sup[tail] > 0):
        rate = float(np.polyfit(traj.times[tail], logs, 1)[0])
    trust = 0.0
    if mu_bp_plus is None:
        mu_bp_plus, trust = linearized_mu_bp_plus(field, mesh, scheme)
    margin = max(trust, margin_floor) if margin is None else margin
    if floor > floor_tol:
        verdict = "persistent"
    elif final_sup < ext_tol and rate is not None and rate < 0:
        verdict = "extinct"
    else:
        verdict = "inconclusive"
    if abs(mu_bp_plus) <= margin:
        consistency = True
    elif verdict == "inconclusive":
        consistency = False
    else:
        consistency = (verdict == "persistent") == (mu_bp_plus < -margin)
    return PersistenceVerdict(verdict, floor, float(mu_bp_plus), bool(consistency), margin,
                              rate, final_sup, {"horizon": horizon})


# ---------------------------------------------------------------------------
# pullback constructions


@dataclass
class PullbackResult:
    n_list: list
    window_times: np.ndarray
    profiles: list          # one (n_window, n_nodes) array per start
    gaps: list              # sup |u_{n+1} - u_n| over the window
    monotone: list          # u_{n+1} <= u_n + tol on the window
    floors: list            # probe-set inf over the window
    sups: list

    @property
    def limit(self) -> np.ndarray:
        return self.profiles[-1]


def _window_run(field, fspec, datum, start, window, mesh, scheme, record_stride):
    t_a, t_b = window
    n_pre = steps_between(start, t_a, scheme.dt) if t_a > start else 0
    u = np.asarray(datum, dtype=float)
    if n_pre:
        pre = evolve_kpp(field, fspec, u, start, t_a, mesh, scheme, n_pre)
        u = pre.final
    traj = evolve_kpp(field, fspec, u, t_a, t_b, mesh, scheme, record_stride, keep_profiles=True)
    profiles = np.vstack([u[None, :], traj.profiles])
    times = np.concatenate([[t_a], traj.times])
    return times, profiles


def entire_solution_pullback(field: CoefficientField, fspec: NonlinearitySpec, n_list,
                             window=(0.0, 1.0), mesh: Mesh | None = None,
                             scheme: StepScheme | None = None, datum=None,
                             record_stride: int = 10, mono_tol: float = 1e-12
                             ) -> PullbackResult:
    """Solutions started at t = -n from datum (default: constant M), on a window."""
    n_list = sorted(float(n) for n in n_list)
    if len(n_list) < 2:
        raise ValueError("n_list too short to measure gaps")
    if -n_list[-1] > window[0] or window[1] <= window[0]:
        raise ValueError("window must lie after every start time")
    if datum is None:
        datum = np.full(mesh.n_interior, fspec.M)
    datum = np.asarray(datum, dtype=float)
    profiles, floors, sups = [], [], []
    lo, hi = probe_indices(mesh)
    times = None
    for n in n_list:
        times, prof = _window_run(field, fspec, datum, -n, window, mesh, scheme, record_stride)
        profiles.append(prof)
        floors.append(float(prof[:, lo:hi].min()))
        sups.append(float(prof.max()))
    gaps, mono = [], []
    for p, q in zip(profiles[:-1], profiles[1:]):
        gaps.append(float(np.max(np.abs(q - p))))
        mono.append(bool(np.all(q <= p + mono_tol)))
    return PullbackResult(n_list, times, profiles, gaps, mono, floors, sups)


def ancient_uniqueness_gap(field: CoefficientField, fspec: NonlinearitySpec, n_list,
                           second_datum, window=(0.0, 1.0), mesh: Mesh | None = None,
                           scheme: StepScheme | None = None, record_stride: int = 10,
                           check_concave: bool = True) -> list[float]:
    """sup over the window of |pullback from M - pullback from second_datum| per n."""
    if check_concave and fspec.n_min <= 0:
        raise ValueError("uniqueness needs a strictly concave nonlinearity (n_min > 0)")
    second = np.asarray(second_datum, dtype=float)
    if second.shape != (mesh.n_interior,):
        raise ValueError("second_datum does not match the mesh")
    if not np.all(np.isfinite(second)) or np.any(second <= 0):
        raise ValueError("second_datum must be strictly positive at interior nodes")
    if check_concave and np.any(second > fspec.M * (1 + 1e-12)):
        raise ValueError("second_datum exceeds the saturation bound M")
    a = entire_solution_pullback(field, fspec, n_list, window, mesh, scheme, None, record_stride)
    b = entire_solution_pullback(field, fspec, n_list, window, mesh, scheme, second,
                                 record_stride)
    return [float(np.max(np.abs(p - q))) for p, q in zip(a.profiles, b.profiles)]


# ---------------------------------------------------------------------------
# maximum principle decay


@dataclass
class MPDecayResult:
    T_list: list
    sup_at_zero: list
    fitted_rate: float
    classification: str
    margin: float


def mp_decay_test(field: CoefficientField, mesh: Mesh, scheme: StepScheme, u0, T_list,
                  margin: float = 0.05) -> MPDecayResult:
    """Linear problem from t = -T with datum u0; sup_x u(0, x) for each T.

    The slope of ln sup u(0) against T is compared with the margin: below
    -margin the sequence decays, above +margin it grows, otherwise the test
    is inconclusive.
    """
    from .stepper import evolve_normalized

    T_list = sorted(float(T) for T in T_list)
    if len(T_list) < 2:
        raise ValueError("need at least two horizons")
    u0 = np.asarray(u0, dtype=float)
    if np.any(u0 < 0) or not np.any(u0 > 0):
        raise ValueError("u0 must be bounded, nonnegative and nonzero")
    sups = []
    for T in T_list:
        trace, state = evolve_normalized(field, mesh, scheme, u0, -T, 0.0,
                                         steps_between(-T, 0.0, scheme.dt))
        sups.append(float(state.log_mass))
    rate = float(np.polyfit(T_list, sups, 1)[0])
    if rate < -margin:
        cls = "decay"
    elif rate > margin:
        cls = "growth"
    else:
        cls = "inconclusive"
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sup_vals = [math.exp(v) if v < 700 else math.inf for v in sups]
    return MPDecayResult(T_list, sup_vals, rate, cls, margin)


def steady_state_residual(field: CoefficientField, fspec: NonlinearitySpec, u, mesh: Mesh,
                          t: float = 0.0) -> float:
    """max |L_h u - f(u)| for a candidate steady profile."""
    from .discretize import apply, assemble

    op = assemble(field, mesh, t)
    x = mesh.nodes
    n = np.broadcast_to(fspec.n_at(field.effective_time(t), x), x.shape)
    return float(np.max(np.abs(apply(op, u) + n * u ** (fspec.power + 1))))


__all__ = [
    "NonlinearitySpec",
    "make_nonlinearity",
    "symbolic_kpp_identities",
    "evolve_kpp",
    "persistence_verdict",
    "entire_solution_pullback",
    "ancient_uniqueness_gap",
    "mp_decay_test",
    "steady_state_residual",
    "FieldError",
]
