"""Discrete principal Floquet bundle and its diagnostics.

The bundle is approximated by forward evolution from a positive datum started
``burn_in`` time units before the recording window; exponential separation
aligns any positive solution with the bundle at rate gamma.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .coeffield import CoefficientField
from .discretize import Mesh, build_mesh
from .stepper import StepScheme, evolve_normalized, propagate, steps_between
from .trace import BetaTrace, infer_tag

__all__ = [
    "BetaTrace",
    "compute_bundle",
    "bundle_traces",
    "separation_rate",
    "harnack_constant",
    "holder_fit",
    "holder_details",
    "unit_window_bound",
    "auto_burn_in",
]


class HolderBoundViolation(AssertionError):
    pass


def _spin_up(field, mesh, scheme, u0, t_from, t_to):
    n = steps_between(t_from, t_to, scheme.dt)
    u, _, _ = propagate(field, mesh, scheme, u0, t_from, n, record_stride=n)
    return u


def _check_defined(field: CoefficientField, t_from: float) -> None:
    if field.t_range is not None and not field.even_reflected and t_from < field.t_range[0]:
        raise ValueError(
            f"field is tabulated from t={field.t_range[0]}; spin-up starts at {t_from}")


def compute_bundle(field: CoefficientField, mesh: Mesh, scheme: StepScheme, t_lo: float,
                   t_hi: float, burn_in: float, record_stride: int = 1, u0=None,
                   profile_every: int = 0, gamma: float | None = None,
                   anchor: float | None = None, tag: str | None = None) -> BetaTrace:
    """Record the bundle's log-norm on [t_lo, t_hi] after a spin-up of burn_in.

    beta is anchored to 0 at t = 0 when 0 lies in the window, otherwise at the
    window edge closest to 0.
    """
    if not burn_in > 0:
        raise ValueError("burn_in must be positive")
    if gamma is not None and burn_in < 5.0 / gamma:
        warnings.warn(f"burn_in={burn_in} is shorter than 5/gamma={5.0 / gamma:.3g}",
                      RuntimeWarning, stacklevel=2)
    _check_defined(field, t_lo - burn_in)
    u = mesh.sine_profile() if u0 is None else np.asarray(u0, dtype=float)
    u = _spin_up(field, mesh, scheme, u, t_lo - burn_in, t_lo)
    trace, _ = evolve_normalized(field, mesh, scheme, u, t_lo, t_hi, record_stride,
                                 profile_every, tag=tag or infer_tag(t_lo, t_hi))
    if anchor is None:
        anchor = 0.0 if t_lo <= 0.0 <= t_hi else (t_lo if t_lo > 0 else t_hi)
    trace = trace.anchored(anchor)
    meta = dict(trace.meta, anchor=anchor, gamma=gamma)
    return replace(trace, burn_in_used=float(burn_in), meta=meta)


def bundle_traces(field: CoefficientField, mesh: Mesh, scheme: StepScheme, t_minus: float,
                  t_plus: float, burn_in: float, record_stride: int = 1,
                  profile_every: int = 0, gamma: float | None = None):
    """Traces for R, R+ and R- from the same field.

    The R- trace is the restriction of the R trace (both see the same past).
    The R+ trace uses the even reflection of the field about t = 0, as the
    half-line eigenvalues are defined through the reflected operator.
    """
    tr = compute_bundle(field, mesh, scheme, -t_minus, t_plus, burn_in, record_stride,
                        profile_every=profile_every, gamma=gamma, tag="R")
    minus = tr.slice(-t_minus, 0.0, tag="R_minus")
    plus = compute_bundle(field.reflected(), mesh, scheme, 0.0, t_plus, burn_in, record_stride,
                          profile_every=profile_every, gamma=gamma, tag="R_plus")
    return tr, plus, minus


# ---------------------------------------------------------------------------
# separation, Harnack, unit windows, Hoelder


def _profiles_on(field, mesh, scheme, u0, t0, horizon, record_stride):
    trace, _ = evolve_normalized(field, mesh, scheme, u0, t0, t0 + horizon, record_stride,
                                 profile_every=1)
    times = np.array(sorted(trace.profiles))
    return times, np.array([trace.profiles[t] for t in times])


@dataclass(frozen=True)
class SeparationFit:
    gamma: float
    lower_bound_only: bool
    times: np.ndarray
    spread: np.ndarray


def separation_rate(field: CoefficientField, mesh: Mesh, scheme: StepScheme, u0_a, u0_b,
                    horizon: float, t0: float = 0.0, record_stride: int = 1,
                    full: bool = False):
    """Exponential decay rate of the projective spread between two solutions.

    spread(t) = sup(u_a/u_b) / inf(u_a/u_b) - 1.  The rate is a least-squares
    fit of ln spread over the second half of the horizon, restricted to
    samples above 1e-13 (roundoff floor).
    """
    ua = np.asarray(u0_a, dtype=float)
    ub = np.asarray(u0_b, dtype=float)
    if np.any(ua < 0) or np.any(ub < 0) or not np.any(ua > 0) or not np.any(ub > 0):
        raise ValueError("initial data must be nonnegative and nonzero")
    pos = (ua > 0) & (ub > 0)
    if np.all(pos) and np.ptp(ua / ub) <= 1e-12 * np.max(ua / ub):
        raise ValueError("initial data are proportional; spread is identically zero")
    times, pa = _profiles_on(field, mesh, scheme, ua, t0, horizon, record_stride)
    _, pb = _profiles_on(field, mesh, scheme, ub, t0, horizon, record_stride)
    ratio = pa / pb
    spread = ratio.max(axis=1) / ratio.min(axis=1) - 1.0
    valid = spread > 1e-13
    last_valid = np.argmin(valid) if not np.all(valid) else len(valid)
    second_half = times >= t0 + 0.5 * horizon
    use = second_half & (np.arange(len(times)) < last_valid)
    lower_only = False
    if use.sum() < 3:
        lower_only = True
        idx = np.arange(last_valid)
        use = np.zeros(len(times), dtype=bool)
        use[idx[len(idx) // 2:]] = True
        if use.sum() < 3:
            raise ValueError("spread collapsed to roundoff immediately; shorten record_stride")
        warnings.warn("spread reached the roundoff floor before the fit window; "
                      "the rate is a lower-bound estimate", RuntimeWarning, stacklevel=2)
    slope = np.polyfit(times[use], np.log(spread[use]), 1)[0]
    gamma = float(-slope)
    if full:
        return SeparationFit(gamma, lower_only, times, spread)
    return gamma


def harnack_constant(field: CoefficientField, mesh: Mesh, scheme: StepScheme, trials: int = 4,
                     s0: float = 1.0, horizon: float | None = None, seed: int = 0,
                     t0: float = 0.0, data=None, record_stride: int = 10) -> float:
    """Empirical same-time Harnack ratio over s >= t0 + s0.

    max over pairs of trials and recorded times of sup(u2/u1) / inf(u2/u1).
    """
    if not s0 > 0:
        raise ValueError("s0 must be positive")
    if data is None:
        if trials < 2:
            raise ValueError("need at least two trials")
        rng = np.random.default_rng(seed)
        data = [rng.uniform(0.05, 1.0, mesh.n_interior) for _ in range(trials)]
    if len(data) < 2:
        raise ValueError("need at least two trials")
    horizon = s0 + 4.0 if horizon is None else horizon
    if horizon < s0:
        raise ValueError("horizon must exceed s0")
    runs = []
    for u in data:
        times, prof = _profiles_on(field, mesh, scheme, u, t0, horizon, record_stride)
        keep = times >= t0 + s0 - 1e-12
        runs.append(prof[keep])
    best = 1.0
    for p, q in itertools.combinations(runs, 2):
        r = q / p
        best = max(best, float(np.max(r.max(axis=1) / r.min(axis=1))))
    return best


def _lag_maxima(trace: BetaTrace, max_lag: int) -> np.ndarray:
    b = trace.beta
    return np.array([np.max(np.abs(b[k:] - b[:-k])) for k in range(1, max_lag + 1)])


@dataclass(frozen=True)
class UnitWindow:
    ln_c_prime: float
    increment_cap: float | None
    max_increment: float
    holds: bool


def unit_window_bound(trace: BetaTrace, tol: float = 1e-9) -> UnitWindow:
    """ln C' = max |beta(s+t) - beta(s)| over t in (0, 1].

    For backward Euler the upward increment over time t is also capped by
    -(t/dt) ln(1 - dt c+) (comparison with spatial constants); that cap is
    checked when the trace carries scheme metadata.
    """
    k1 = max(1, int(round(1.0 / trace.dt_record)))
    if trace.n_samples <= k1:
        raise ValueError("trace shorter than one unit window")
    d = _lag_maxima(trace, k1)
    b = trace.beta
    up = np.array([np.max(b[k:] - b[:-k]) for k in range(1, k1 + 1)])
    dt = trace.meta.get("dt")
    c_plus = trace.meta.get("c_plus")
    cap = None
    holds = bool(np.isfinite(d).all())
    if dt and c_plus is not None and trace.meta.get("theta", 1.0) == 1.0:
        per_step = -math.log1p(-dt * c_plus)
        lags = np.arange(1, k1 + 1) * trace.dt_record
        caps = lags / dt * per_step
        holds = holds and bool(np.all(up <= caps + tol))
        cap = float(caps[-1])
    return UnitWindow(float(d.max()), cap, float(up.max()), holds)


@dataclass(frozen=True)
class HolderDetails:
    alpha: float
    H: float
    alpha_lsq: float
    lags: np.ndarray
    envelope: np.ndarray
    holds: bool


def holder_details(trace: BetaTrace, slack: float = 0.05) -> HolderDetails:
    """Fit max_s |beta(s+t) - beta(s)| <= H t^alpha on t in (0, 1].

    H is the envelope maximum over the unit window (so H <= ln C'), alpha the
    largest exponent keeping every sampled lag under H t^alpha.
    """
    if trace.span < 100.0:
        raise ValueError(f"Hoelder fit needs >= 100 unit windows, trace spans {trace.span}")
    k1 = max(1, int(round(1.0 / trace.dt_record)))
    if k1 < 2:
        raise ValueError("Hoelder fit needs at least two lags per unit window")
    env = _lag_maxima(trace, k1)
    lags = np.arange(1, k1 + 1) * trace.dt_record
    H = float(env.max())
    if H == 0.0:
        return HolderDetails(1.0, 0.0, 1.0, lags, env, True)
    inner = lags < 1.0
    with np.errstate(divide="ignore"):
        ratios = np.log(env[inner] / H) / np.log(lags[inner])
    alpha = float(min(1.0, ratios.min())) if inner.any() else 1.0
    alpha = max(alpha, 0.0)
    pos = env > 0
    alpha_lsq = float(np.polyfit(np.log(lags[pos]), np.log(env[pos]), 1)[0]) if pos.sum() > 1 \
        else alpha
    holds = bool(np.all(env <= (1.0 + slack) * H * lags ** alpha + 1e-12))
    return HolderDetails(alpha, H, alpha_lsq, lags, env, holds)


def holder_fit(trace: BetaTrace, slack: float = 0.05) -> tuple[float, float]:
    det = holder_details(trace, slack)
    if not det.holds or det.alpha <= 0:
        raise HolderBoundViolation(
            f"Hoelder bound fails: alpha={det.alpha:.3g}, H={det.H:.3g}")
    return det.alpha, det.H


def auto_burn_in(field: CoefficientField, mesh: Mesh, scheme: StepScheme, t0: float = 0.0,
                 multiple: float = 8.0, horizon: float = 2.0) -> tuple[float, float]:
    """(burn_in, gamma) with burn_in = multiple / gamma from a coarse pre-run."""
    n_coarse = max(9, mesh.n_interior // 4)
    coarse = build_mesh(mesh.domain, n_coarse)
    x = (coarse.nodes - coarse.domain.x_lo) / coarse.domain.length
    ua = coarse.sine_profile()
    ub = ua * (1.0 + 0.5 * x)
    horizon = math.ceil(horizon / scheme.dt - 1e-9) * scheme.dt
    stride = max(1, int(round(0.01 / scheme.dt)))
    while steps_between(0.0, horizon, scheme.dt) % stride:
        stride -= 1
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        gamma = separation_rate(field, coarse, scheme, ua, ub, horizon, t0=t0,
                                record_stride=stride)
    if not gamma > 0:
        raise ValueError("coarse pre-run found no exponential separation")
    burn = min(max(multiple / gamma, 0.25), 200.0)
    # whole number of steps so the spin-up lands on the recording grid
    return float(math.ceil(burn / scheme.dt - 1e-9) * scheme.dt), gamma
