"""Averaging functionals of beta and the six-eigenvalue report.

Window-extremal growth rates give mu_bp = -lgr and lambda_bp = -ggr; the
Cesaro rates of beta(t)/t at +infinity give mu_p, lambda_b and at -infinity
give mu_b, lambda_p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .coeffield import CoefficientField, SigmaSignal, sigma_antiderivative
from .discretize import Mesh
from .floquet import bundle_traces, compute_bundle
from .stepper import StepScheme
from .trace import BetaTrace, infer_tag

NAMES = ("mu_bp", "lambda_bp", "mu_p", "lambda_b", "mu_b", "lambda_p")
INTERVALS = ("R", "R_plus", "R_minus")
# members fixed by convention on half-lines
IMPROPER = {
    "R_plus": {"lambda_p": math.inf, "mu_b": -math.inf},
    "R_minus": {"lambda_b": math.inf, "mu_p": -math.inf},
}


class TrustCollapse(ValueError):
    """Requested window or tail is too long for the available trace."""


@dataclass(frozen=True)
class Estimate:
    value: float
    finite_T_values: dict = field(default_factory=dict)
    extrapolation_residual: float = 0.0
    trust_radius: float = 0.0
    converged: bool = True
    detail: dict = field(default_factory=dict)

    @property
    def defined(self) -> bool:
        return math.isfinite(self.value)

    def negated(self) -> "Estimate":
        return replace(self, value=-self.value,
                       finite_T_values={k: -v for k, v in self.finite_T_values.items()})

    def to_dict(self) -> dict:
        return {
            "value": _num(self.value),
            "trust_radius": self.trust_radius,
            "extrapolation_residual": self.extrapolation_residual,
            "converged": self.converged,
            "finite_T_values": {f"{k:.17g}": v for k, v in self.finite_T_values.items()},
            **({"detail": self.detail} if self.detail else {}),
        }


def _num(v: float):
    if math.isfinite(v):
        return v
    return "inf" if v > 0 else "-inf"


def _floor(v: float) -> float:
    return 1e-9 * (1.0 + abs(v))


# ---------------------------------------------------------------------------
# window-extremal rates


def window_extremal_rate(trace: BetaTrace, T: float, which: str = "inf", stride: int = 1,
                         refine: bool = True) -> float:
    """Extremum over window starts s of (beta(s+T) - beta(s)) / T.

    T is rounded to a whole number of samples.  With stride > 1 only every
    stride-th start is scanned; refine then rescans the neighbourhood of the
    coarse optimum, which can only move the result further out.
    """
    if which not in ("inf", "sup"):
        raise ValueError("which must be 'inf' or 'sup'")
    k = int(round(T / trace.dt_record))
    if k < 1:
        raise ValueError(f"T={T} is shorter than the record step {trace.dt_record}")
    if 2 * k > trace.n_samples - 1:
        raise TrustCollapse(f"window T={T} exceeds half the trace span {trace.span}")
    b = trace.beta
    d = b[k:] - b[:-k]
    sign = 1.0 if which == "inf" else -1.0
    if stride <= 1:
        ext = float(np.min(sign * d))
    else:
        coarse = sign * d[::stride]
        i = int(np.argmin(coarse)) * stride
        ext = float(coarse.min())
        if refine:
            lo, hi = max(0, i - stride), min(len(d), i + stride + 1)
            ext = min(ext, float(np.min(sign * d[lo:hi])))
    return sign * ext / (k * trace.dt_record)


def default_T_list(span: float, dt_record: float, count: int = 5) -> list[float]:
    t_max = span / 4.0
    out = [t_max / 2 ** j for j in range(count)][::-1]
    return [t for t in out if t >= 2 * dt_record]


def _extrapolate(Ts, vals, span: float):
    """Weighted fit v(T) = v_inf + kappa/T.

    The weight 1/((1/T)^2 + (T/span)^2) balances the O(1/T) transient error
    against the loss of independent windows as T approaches the span.
    """
    Ts = np.asarray(Ts, dtype=float)
    vals = np.asarray(vals, dtype=float)
    if len(Ts) == 1:
        return float(vals[0]), 0.0, 0.0, float(Ts[0])
    w = 1.0 / ((1.0 / Ts) ** 2 + (Ts / span) ** 2)
    A = np.column_stack([np.ones_like(Ts), 1.0 / Ts])
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(A * sw[:, None], vals * sw, rcond=None)
    resid = vals - A @ coef
    rms = float(np.sqrt(np.sum(w * resid ** 2) / np.sum(w)))
    t_best = float(Ts[np.argmax(w)])
    return float(coef[0]), float(coef[1]), rms, t_best


def global_growth_rates(trace: BetaTrace, T_list=None, stride: int = 1,
                        resid_tol: float = 1e-2) -> tuple[Estimate, Estimate]:
    """(least, greatest) global growth rate with 1/T extrapolation.

    Window sums are superadditive (inf) and subadditive (sup), so on an
    unbounded trace every finite-T value brackets the limits:
    lgr_T <= lgr <= ggr <= ggr_T.  On a finite trace long windows lose
    coverage, so the bracket is taken at the best-weighted T only;
    extrapolated values are clamped into it and the trust radius never
    exceeds its width.
    """
    if T_list is None:
        T_list = default_T_list(trace.span, trace.dt_record)
    T_list = sorted(float(t) for t in T_list)
    if not T_list:
        raise TrustCollapse("empty T_list")
    table = {}
    for which in ("inf", "sup"):
        vals = {}
        for T in T_list:
            k = int(round(T / trace.dt_record))
            vals[k * trace.dt_record] = window_extremal_rate(trace, T, which, stride)
        table[which] = vals
    Ts = np.array(list(table["inf"]))
    t_ref = float(Ts[np.argmax(1.0 / ((1.0 / Ts) ** 2 + (Ts / trace.span) ** 2))])
    lower = table["inf"][t_ref]
    upper = table["sup"][t_ref]
    out = []
    for which in ("inf", "sup"):
        vals = table[which]
        Ts = np.array(list(vals))
        vs = np.array(list(vals.values()))
        v_inf, kappa, rms, t_best = _extrapolate(Ts, vs, trace.span)
        trust = max(rms, abs(v_inf - vals[t_best]))
        value = min(max(v_inf, lower), upper) if lower <= upper else v_inf
        if lower <= upper:
            trust = min(trust, upper - lower)
        trust = max(trust, _floor(value))
        converged = rms <= resid_tol * (1.0 + abs(v_inf))
        out.append(Estimate(value, vals, rms, trust, converged,
                            {"kappa": kappa, "unclamped": v_inf, "bracket": [lower, upper]}))
    lgr, ggr = out
    gap = lgr.value - ggr.value
    if gap > _floor(lgr.value):
        # extrapolations crossed: the trace is not yet asymptotic, keep the order
        lgr, ggr = (replace(e, value=v, trust_radius=max(e.trust_radius, gap), converged=False,
                            detail=dict(e.detail, crossed=True))
                    for e, v in ((lgr, ggr.value), (ggr, lgr.value)))
    return lgr, ggr


# ---------------------------------------------------------------------------
# Cesaro rates


def _running_average(trace: BetaTrace, direction: str, tail_fraction: float,
                     tail_start: float | None):
    """Distances |t - anchor| and (beta(t) - beta(anchor)) / (t - anchor) on one side."""
    t = trace.times
    if direction == "plus":
        anchor = 0.0 if trace.t_start <= 0.0 else trace.t_start
        reach = trace.t_end - anchor
    elif direction == "minus":
        anchor = 0.0 if trace.t_end >= 0.0 else trace.t_end
        reach = anchor - trace.t_start
    else:
        raise ValueError("direction must be 'plus' or 'minus'")
    if reach <= 0:
        raise TrustCollapse(f"trace does not extend in the {direction} direction")
    start = tail_start if tail_start is not None else (1.0 - tail_fraction) * reach
    start = abs(start)
    if not 0 < start < reach:
        raise TrustCollapse(f"tail start {start} outside (0, {reach})")
    side = 1.0 if direction == "plus" else -1.0
    dist = side * (t - anchor)
    sel = dist >= 10.0 * trace.dt_record
    ia = trace.index_of(anchor)
    r = (trace.beta[sel] - trace.beta[ia]) / (t[sel] - anchor)
    d = dist[sel]
    order = np.argsort(d)
    d, r = d[order], r[order]
    if np.sum(d >= start) < 4:
        raise TrustCollapse("tail contains too few samples")
    return d, r, start, reach


def _local_extrema(r: np.ndarray, which: str) -> np.ndarray:
    s = r if which == "min" else -r
    inner = (s[1:-1] <= s[:-2]) & (s[1:-1] < s[2:])
    return np.nonzero(inner)[0] + 1


def cesaro_rates(trace: BetaTrace, direction: str = "plus", tail_fraction: float = 0.5,
                 tail_start: float | None = None) -> tuple[Estimate, Estimate]:
    """(liminf, limsup) of beta(t)/t as t -> +inf (plus) or -inf (minus).

    beta is measured from the anchor (t = 0, or the trace edge nearest 0).
    Values are running extrema over the tail |t| >= tail_start.  The trust
    radius is the larger of the spread of the three most distant local
    extrema of the running average and the envelope decay across the tail,
    measured against a v + k/t extrapolation through the extrema of the two
    tail halves.  With fewer than two extrema it falls back to the distance
    between the tail extremum and the final running average.
    """
    d, r, start, reach = _running_average(trace, direction, tail_fraction, tail_start)
    tail = d >= start
    out = []
    for which in ("min", "max"):
        rt = r[tail]
        value = float(rt.min() if which == "min" else rt.max())
        idx = _local_extrema(r, which)
        last = r[idx[-3:]]
        trust = float(np.ptp(last)) if len(last) >= 2 else abs(value - float(r[-1]))
        limit = None
        mid = 0.5 * (start + reach)
        halves = [np.nonzero(tail & (d < mid))[0], np.nonzero(d >= mid)[0]]
        if len(idx[d[idx] >= start]) >= 2 and min(len(h) for h in halves) >= 2:
            # extremal values decaying like v + k/t: extrapolate through the half-tail extrema
            pick = [h[np.argmin(r[h]) if which == "min" else np.argmax(r[h])] for h in halves]
            (t1, t2), (m1, m2) = d[pick], r[pick]
            if t2 > 1.05 * t1:
                limit = float((t2 * m2 - t1 * m1) / (t2 - t1))
                trust = max(trust, abs(value - limit) + abs(m2 - limit))
        sens = {}
        for f in (0.5, 0.25):
            sub = d >= start + (1 - f) * (reach - start)
            if sub.sum() >= 4:
                sens[f"{f:g}"] = float(r[sub].min() if which == "min" else r[sub].max())
        at_edge = bool(np.argmin(rt if which == "min" else -rt) == 0)
        out.append(Estimate(value, {}, 0.0, max(trust, _floor(value)), not at_edge,
                            {"tail_start": start, "tail_end": reach,
                             "last_extrema": [float(v) for v in last],
                             "last_extrema_at": [float(v) for v in d[idx[-3:]]],
                             "extrapolated_limit": limit,
                             "tail_sensitivity": sens}))
    return out[0], out[1]


# ---------------------------------------------------------------------------
# least mean and interpolation witness


def cumulative_trace(samples, dt: float, t_start: float = 0.0) -> BetaTrace:
    g = np.asarray(samples, dtype=float)
    if g.size < 2:
        raise ValueError("need at least two samples")
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (g[1:] + g[:-1]) * dt)])
    t_end = t_start + dt * (len(g) - 1)
    return BetaTrace(infer_tag(t_start, t_end), t_start, dt, cum)


def least_mean(samples, dt: float, T_list=None, full: bool = False):
    """Least mean of a uniformly sampled signal (lgr of its running integral)."""
    g = np.asarray(samples, dtype=float)
    if g.size == 0:
        raise ValueError("empty input")
    trace = cumulative_trace(g, dt)
    lgr, _ = global_growth_rates(trace, T_list)
    return lgr if full else lgr.value


@dataclass(frozen=True)
class WitnessA:
    knot_times: np.ndarray
    knot_values: np.ndarray
    slope_essinf: float
    slope_esssup: float
    sup_dev: float
    sublinearity_constant: float
    bound_holds: bool

    def __call__(self, t):
        return np.interp(t, self.knot_times, self.knot_values)


def sublinearity_constant(trace: BetaTrace, max_lag: float | None = None) -> float:
    """Smallest C with |beta(t1) - beta(t2)| <= C (1 + |t1 - t2|) over sampled lags.

    Lags are all samples up to 1 time unit plus a geometric set up to max_lag.
    """
    n = trace.n_samples
    top = n - 1 if max_lag is None else min(n - 1, int(round(max_lag / trace.dt_record)))
    short = min(top, max(1, int(round(1.0 / trace.dt_record))))
    lags = set(range(1, short + 1))
    lags.update(int(v) for v in np.unique(np.geomspace(max(short, 1), max(top, 1), 80).round()))
    b = trace.beta
    best = 0.0
    for k in sorted(lags):
        if 0 < k <= n - 1:
            best = max(best, float(np.max(np.abs(b[k:] - b[:-k]))) / (1.0 + k * trace.dt_record))
    return best


def interpolation_witness(trace: BetaTrace, T: float) -> WitnessA:
    """Piecewise-linear interpolant of beta with knots t_start + k T."""
    k = int(round(T / trace.dt_record))
    if k < 1:
        raise ValueError("T shorter than the record step")
    idx = np.arange(0, trace.n_samples, k)
    if len(idx) < 2:
        raise ValueError("trace shorter than two knots")
    t = trace.times
    kt, kv = t[idx], trace.beta[idx]
    slopes = np.diff(kv) / np.diff(kt)
    covered = slice(0, idx[-1] + 1)
    sup_dev = float(np.max(np.abs(np.interp(t[covered], kt, kv) - trace.beta[covered])))
    C = sublinearity_constant(trace, max_lag=k * trace.dt_record)
    holds = sup_dev <= 2.0 * C * (k * trace.dt_record + 1.0) + 1e-12
    return WitnessA(kt, kv, float(slopes.min()), float(slopes.max()), sup_dev, C, bool(holds))


# ---------------------------------------------------------------------------
# synthetic traces


def synthetic_trace(lambda_d: float, source: CoefficientField | SigmaSignal, t_lo: float,
                    t_hi: float, dt_record: float, tag: str | None = None) -> BetaTrace:
    """beta(t) = -lambda_d t + int_0^t sigma, exact for separable operators."""
    n = int(math.floor((t_hi - t_lo) / dt_record + 1e-9)) + 1
    t = t_lo + dt_record * np.arange(n)
    if isinstance(source, SigmaSignal):
        g = source.antiderivative(t)
        g0 = 0.0
    else:
        g = sigma_antiderivative(source, t)
        g0 = float(sigma_antiderivative(source, np.array([0.0]))[0])
    beta = -lambda_d * t + (g - g0)
    meta = {"synthetic": True, "lambda_d": lambda_d, "dt": None}
    if isinstance(source, CoefficientField):
        meta["c_sup"] = source.c_sup
    return BetaTrace(tag or infer_tag(t_lo, t[-1]), t_lo, dt_record, beta, meta=meta)


# ---------------------------------------------------------------------------
# six-eigenvalue report


@dataclass
class GrowthRateReport:
    values: dict  # interval -> name -> Estimate
    checks: list
    meta: dict = field(default_factory=dict)

    def get(self, interval: str, name: str) -> Estimate:
        return self.values[interval][name]

    def value(self, interval: str, name: str) -> float:
        return self.values[interval][name].value

    def defined_entries(self):
        for iv in INTERVALS:
            for name in NAMES:
                est = self.values[iv][name]
                if est.defined:
                    yield iv, name, est

    @property
    def all_checks_pass(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "values": {iv: {n: self.values[iv][n].to_dict() for n in NAMES} for iv in INTERVALS},
            "checks": self.checks,
            "meta": self.meta,
        }


def _check(name, lhs, rhs, tol, kind="le"):
    if kind == "le":
        ok = lhs <= rhs + tol
    else:
        ok = abs(lhs - rhs) <= tol
    if not (math.isfinite(lhs) and math.isfinite(rhs)) and kind == "le":
        ok = lhs <= rhs
    return {"name": name, "passed": bool(ok), "lhs": _num(lhs), "rhs": _num(rhs),
            "tolerance": tol}


def report_checks(values: dict, c_sup: float | None, base_tol: float = 1e-6) -> list:
    checks = []

    def tr(*ests):
        return base_tol + sum(e.trust_radius for e in ests if e.defined)

    for iv in INTERVALS:
        v = values[iv]
        lo = min(v["lambda_b"], v["lambda_p"], key=lambda e: e.value)
        hi = max(v["mu_b"], v["mu_p"], key=lambda e: e.value)
        if c_sup is not None:
            checks.append(_check(f"{iv}: -sup c <= lambda_bp", -c_sup, v["lambda_bp"].value,
                                 tr(v["lambda_bp"])))
        checks.append(_check(f"{iv}: lambda_bp <= min(lambda_b, lambda_p)",
                             v["lambda_bp"].value, lo.value, tr(v["lambda_bp"], lo)))
        checks.append(_check(f"{iv}: min(lambda_b, lambda_p) <= max(mu_b, mu_p)",
                             lo.value, hi.value, tr(lo, hi)))
        checks.append(_check(f"{iv}: max(mu_b, mu_p) <= mu_bp", hi.value, v["mu_bp"].value,
                             tr(hi, v["mu_bp"])))
    p, m, r = values["R_plus"], values["R_minus"], values["R"]
    checks.append(_check("R+: lambda_b <= mu_p", p["lambda_b"].value, p["mu_p"].value,
                         tr(p["lambda_b"], p["mu_p"])))
    checks.append(_check("R-: lambda_p <= mu_b", m["lambda_p"].value, m["mu_b"].value,
                         tr(m["lambda_p"], m["mu_b"])))
    hi = max(p["mu_bp"], m["mu_bp"], key=lambda e: e.value)
    checks.append(_check("split: mu_bp(R) = max(mu_bp(R-), mu_bp(R+))", r["mu_bp"].value,
                         hi.value, tr(r["mu_bp"], hi), kind="eq"))
    lo = min(p["lambda_bp"], m["lambda_bp"], key=lambda e: e.value)
    checks.append(_check("split: lambda_bp(R) = min(lambda_bp(R-), lambda_bp(R+))",
                         r["lambda_bp"].value, lo.value, tr(r["lambda_bp"], lo), kind="eq"))
    return checks


def _interval_values(trace: BetaTrace, interval: str, T_list, tail_fraction, tail_start,
                     stride) -> dict:
    lgr, ggr = global_growth_rates(trace, T_list, stride)
    vals = {"mu_bp": lgr.negated(), "lambda_bp": ggr.negated()}
    if interval in ("R", "R_plus"):
        lo, hi = cesaro_rates(trace, "plus", tail_fraction, tail_start)
        vals["mu_p"], vals["lambda_b"] = lo.negated(), hi.negated()
    if interval in ("R", "R_minus"):
        lo, hi = cesaro_rates(trace, "minus", tail_fraction, tail_start)
        vals["mu_b"], vals["lambda_p"] = lo.negated(), hi.negated()
    for name, v in IMPROPER.get(interval, {}).items():
        vals[name] = Estimate(v, detail={"convention": True})
    return vals


def _provenance(trace: BetaTrace) -> tuple:
    m = trace.meta
    return tuple(m.get(k) if not isinstance(m.get(k), list) else tuple(m.get(k))
                 for k in ("n_interior", "theta", "dt", "field_kind", "synthetic", "lambda_d"))


def _richardson(fine: Estimate, coarse: Estimate, ratio: float) -> Estimate:
    if not fine.defined:
        return fine
    w = 1.0 / (ratio - 1.0)
    value = fine.value + w * (fine.value - coarse.value)
    tvals = {T: fine.finite_T_values[T] + w * (fine.finite_T_values[T] - coarse.finite_T_values[T])
             for T in fine.finite_T_values if T in coarse.finite_T_values}
    trust = max(fine.trust_radius, coarse.trust_radius)
    detail = dict(fine.detail, fine=fine.value, coarse=coarse.value, dt_ratio=ratio)
    return Estimate(value, tvals, max(fine.extrapolation_residual, coarse.extrapolation_residual),
                    trust, fine.converged and coarse.converged, detail)


def eigen_report(trace_R: BetaTrace, trace_plus: BetaTrace, trace_minus: BetaTrace,
                 T_list=None, tail_fraction: float = 0.5, tail_start: float | None = None,
                 coarse: tuple | None = None, stride: int = 1,
                 c_sup: float | None = None, base_tol: float = 1e-6) -> GrowthRateReport:
    """Assemble the six eigenvalues on R, R+ and R- from three traces.

    ``coarse`` optionally supplies the same three traces at a larger dt; the
    values are then Richardson-extrapolated assuming first-order dt bias.
    """
    traces = {"R": trace_R, "R_plus": trace_plus, "R_minus": trace_minus}
    prov = {_provenance(t) for t in traces.values()}
    if len(prov) != 1:
        raise ValueError(f"traces have inconsistent provenance: {sorted(map(str, prov))}")
    for iv, t in traces.items():
        if t.interval_tag != iv:
            raise ValueError(f"trace for {iv} is tagged {t.interval_tag}")
    values = {iv: _interval_values(t, iv, T_list, tail_fraction, tail_start, stride)
              for iv, t in traces.items()}
    meta = {"T_list": None if T_list is None else list(T_list), "tail_fraction": tail_fraction,
            "tail_start": tail_start, "richardson": coarse is not None,
            "dt": trace_R.meta.get("dt"), "burn_in": trace_R.burn_in_used}
    if coarse is not None:
        c_R, c_plus, c_minus = coarse
        c_traces = {"R": c_R, "R_plus": c_plus, "R_minus": c_minus}
        ratio = c_R.meta["dt"] / trace_R.meta["dt"]
        if not ratio > 1:
            raise ValueError("coarse traces must use a larger dt")
        c_vals = {iv: _interval_values(t, iv, T_list, tail_fraction, tail_start, stride)
                  for iv, t in c_traces.items()}
        values = {iv: {n: _richardson(values[iv][n], c_vals[iv][n], ratio) for n in NAMES}
                  for iv in INTERVALS}
        meta["dt_coarse"] = c_R.meta["dt"]
    if c_sup is None:
        c_sup = trace_R.meta.get("c_sup")
    checks = report_checks(values, c_sup, base_tol)
    return GrowthRateReport(values, checks, meta)


def pde_report(field: CoefficientField, mesh: Mesh, scheme: StepScheme, t_plus: float,
               t_minus: float, burn_in: float, record_stride: int = 10, T_list=None,
               tail_fraction: float = 0.5, tail_start: float | None = None,
               richardson: bool = False, stride: int = 1):
    """Bundle traces -> report.  With richardson, a second run at 2*dt is used."""
    traces = bundle_traces(field, mesh, scheme, t_minus, t_plus, burn_in, record_stride)
    coarse = None
    if richardson:
        cs = StepScheme(2 * scheme.dt, scheme.theta, scheme.positivity_guard)
        stride_c = record_stride // 2 if record_stride % 2 == 0 else None
        if stride_c is None:
            raise ValueError("richardson needs an even record_stride")
        coarse = bundle_traces(field, mesh, cs, t_minus, t_plus, burn_in, stride_c)
    report = eigen_report(*traces, T_list=T_list, tail_fraction=tail_fraction,
                          tail_start=tail_start, coarse=coarse, stride=stride)
    report.meta.update({"path": "pde", "n_interior": mesh.n_interior, "dt": scheme.dt,
                        "theta": scheme.theta, "t_plus": t_plus, "t_minus": t_minus,
                        "record_stride": record_stride})
    return report, traces


def base_eigenvalue(field: CoefficientField, mesh: Mesh) -> float:
    """lambda_D^h of the operator with sigma removed (separable fields)."""
    from .eigensolve import dirichlet_eigen

    if not field.separable or not field.ab_static:
        raise ValueError("synthetic path needs a separable field with static a, b")
    base = replace(field, sigma=None, c_fn=lambda t, x: field.c0_fn(t, x),
                   time_dependent=False, shift=0.0, outer_shift=0.0, even_reflected=False)
    return dirichlet_eigen(base, mesh).value


def synthetic_report(field: CoefficientField, t_plus: float, t_minus: float,
                     dt_record: float = 1.0, T_list=None, tail_fraction: float = 0.5,
                     tail_start: float | None = None, lambda_d: float | None = None,
                     mesh: Mesh | None = None, stride: int = 1):
    """Report built from exact synthetic traces of a separable field."""
    if lambda_d is None:
        if mesh is None:
            raise ValueError("need lambda_d or a mesh to compute it")
        lambda_d = base_eigenvalue(field, mesh)
    tr = synthetic_trace(lambda_d, field, -t_minus, t_plus, dt_record, tag="R")
    plus = synthetic_trace(lambda_d, field.reflected(), 0.0, t_plus, dt_record, tag="R_plus")
    minus = tr.slice(-t_minus, 0.0, tag="R_minus")
    report = eigen_report(tr, plus, minus, T_list=T_list, tail_fraction=tail_fraction,
                          tail_start=tail_start, stride=stride, c_sup=field.c_sup)
    report.meta.update({"path": "synthetic", "lambda_d": lambda_d, "dt_record": dt_record,
                        "t_plus": t_plus, "t_minus": t_minus})
    return report, (tr, plus, minus)


def translate_scan(field: CoefficientField, mesh: Mesh, scheme: StepScheme, shifts,
                   horizon: float, burn_in: float = 3.0, record_stride: int = 10,
                   tail_fraction: float = 0.5) -> dict:
    """R+ Cesaro rates (mu_p, lambda_b) of translated fields t -> P(t + s)."""
    out = {}
    for s in shifts:
        tr = compute_bundle(field.translated(s), mesh, scheme, 0.0, horizon, burn_in,
                            record_stride, tag="R_plus")
        lo, hi = cesaro_rates(tr, "plus", tail_fraction)
        out[float(s)] = (lo.negated(), hi.negated())
    return out
