"""Coefficient fields (a, b, c) for the operator u_t - a u_xx - b u_x - c u.

Fields are built from JSON-like dicts by :func:`make_field`.  Separable fields
``c(t, x) = c0(x) + sigma(t)`` carry a :class:`SigmaSignal` with an exact
antiderivative, which the stepper and the synthetic growth-rate path exploit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable

import numpy as np
import sympy
from scipy.interpolate import RegularGridInterpolator

KINDS = (
    "constant",
    "time_independent",
    "periodic",
    "quasi_periodic",
    "log_oscillatory",
    "converging",
    "separable_sigma",
    "random_stationary",
    "tabulated",
)

SIGMA_FAMILIES = (
    "constant",
    "cosine",
    "quasi_periodic",
    "log_oscillatory",
    "piecewise_linear_iid",
    "expression",
)

_T, _X = sympy.symbols("t x", real=True)
_BLOCK = 4096


class FieldError(ValueError):
    """Invalid coefficient description or evaluation request."""


@dataclass(frozen=True)
class Domain1D:
    x_lo: float = 0.0
    x_hi: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.x_lo) and math.isfinite(self.x_hi)):
            raise FieldError("domain endpoints must be finite")
        if not self.x_hi > self.x_lo:
            raise FieldError(f"degenerate domain ({self.x_lo}, {self.x_hi})")

    @property
    def length(self) -> float:
        return self.x_hi - self.x_lo

    def contains(self, other: "Domain1D") -> bool:
        return self.x_lo <= other.x_lo and other.x_hi <= self.x_hi


# ---------------------------------------------------------------------------
# expressions


def _to_float(value: Any, what: str) -> float:
    if isinstance(value, bool):
        raise FieldError(f"{what}: expected a number, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            expr = sympy.sympify(value, locals={"pi": sympy.pi, "e": sympy.E})
            return float(expr)
        except (sympy.SympifyError, TypeError) as exc:
            raise FieldError(f"{what}: cannot read {value!r} as a number") from exc
    raise FieldError(f"{what}: expected a number, got {type(value).__name__}")


@lru_cache(maxsize=256)
def _compile(text: str, variables: tuple[str, ...]) -> Callable:
    local = {"t": _T, "x": _X, "pi": sympy.pi, "e": sympy.E}
    try:
        expr = sympy.sympify(text, locals=local)
    except (sympy.SympifyError, TypeError, SyntaxError) as exc:
        raise FieldError(f"cannot parse expression {text!r}") from exc
    allowed = {local[v] for v in variables}
    extra = expr.free_symbols - allowed
    if extra:
        names = ", ".join(sorted(str(s) for s in extra))
        raise FieldError(f"expression {text!r} uses unsupported symbols: {names}")
    fn = sympy.lambdify((_T, _X), expr, modules="numpy")

    def evaluate(t, x):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        out = np.asarray(fn(t, x), dtype=float)
        shape = np.broadcast_shapes(t.shape, x.shape)
        return np.broadcast_to(out, shape).copy() if out.shape != shape else out

    return evaluate


def _uses_t(value: Any) -> bool:
    if not isinstance(value, str):
        return False
    try:
        _to_float(value, "")
        return False
    except FieldError:
        return _T in sympy.sympify(value, locals={"t": _T, "x": _X}).free_symbols


def _function(value: Any, variables: tuple[str, ...], what: str) -> tuple[Callable, bool]:
    """Return (callable(t, x), is_constant)."""
    if isinstance(value, str):
        try:
            const = _to_float(value, what)
        except FieldError:
            return _compile(value, variables), False
        value = const
    c = _to_float(value, what)

    def constant(t, x, _c=c):
        return np.full(np.broadcast_shapes(np.shape(t), np.shape(x)), _c)

    return constant, True


# ---------------------------------------------------------------------------
# scalar time signals


@dataclass(frozen=True)
class SigmaSignal:
    """Scalar time signal sigma(t) with an antiderivative G(t) = int_0^t sigma.

    ``exact`` is False only for the ``expression`` family, which falls back to
    composite trapezoidal quadrature (error O(step^2)).
    """

    family: str
    params: dict
    exact: bool = True
    dt_quad: float = 1e-3

    # evaluation -----------------------------------------------------------
    def value(self, t):
        t = np.asarray(t, dtype=float)
        p = self.params
        if self.family == "constant":
            return np.full(t.shape, p["value"])
        if self.family == "cosine":
            return p["mean"] + p["amplitude"] * np.cos(2.0 * np.pi * t / p["period"])
        if self.family == "quasi_periodic":
            out = np.full(t.shape, p["mean"])
            for amp, omega in p["terms"]:
                out = out + amp * np.cos(omega * t)
            return out
        if self.family == "log_oscillatory":
            return p["amplitude"] * np.cos(np.log1p(np.abs(t)))
        if self.family == "piecewise_linear_iid":
            cell = np.floor(t)
            r = t - cell
            icell = cell.astype(np.int64)
            if icell.size == 0:
                return np.empty(t.shape)
            base, draws, _ = self._tables(np.concatenate([icell.ravel(), icell.ravel() + 1]))
            return (1.0 - r) * draws[icell - base] + r * draws[icell + 1 - base]
        if self.family == "expression":
            return p["fn"](t, 0.0)
        raise FieldError(f"unknown sigma family {self.family!r}")

    def antiderivative(self, t):
        """G(t) = int_0^t sigma(s) ds, vectorized, valid for every real t."""
        t = np.asarray(t, dtype=float)
        p = self.params
        if self.family == "constant":
            return p["value"] * t
        if self.family == "cosine":
            w = 2.0 * np.pi / p["period"]
            return p["mean"] * t + p["amplitude"] * np.sin(w * t) / w
        if self.family == "quasi_periodic":
            out = p["mean"] * t
            for amp, omega in p["terms"]:
                out = out + amp * np.sin(omega * t) / omega
            return out
        if self.family == "log_oscillatory":
            s = np.abs(t)
            u = np.log1p(s)
            f = p["amplitude"] * (0.5 * (1.0 + s) * (np.cos(u) + np.sin(u)) - 0.5)
            return np.sign(t) * f
        if self.family == "piecewise_linear_iid":
            return self._pl_antiderivative(t)
        if self.family == "expression":
            return self._quadrature(t)
        raise FieldError(f"unknown sigma family {self.family!r}")

    def integral(self, t0: float, t1: float) -> float:
        g = self.antiderivative(np.array([t0, t1], dtype=float))
        return float(g[1] - g[0])

    def bounds(self) -> tuple[float, float]:
        """(inf sigma, sup sigma)."""
        p = self.params
        if self.family == "constant":
            return p["value"], p["value"]
        if self.family == "cosine":
            a = abs(p["amplitude"])
            return p["mean"] - a, p["mean"] + a
        if self.family == "quasi_periodic":
            a = sum(abs(amp) for amp, _ in p["terms"])
            return p["mean"] - a, p["mean"] + a
        if self.family == "log_oscillatory":
            a = abs(p["amplitude"])
            return -a, a
        if self.family == "piecewise_linear_iid":
            return p["low"], p["high"]
        samples = self.value(np.linspace(-p["window"], p["window"], 20001))
        span = float(samples.max() - samples.min())
        pad = 1e-3 * (1.0 + span)
        return float(samples.min()) - pad, float(samples.max()) + pad

    # piecewise-linear i.i.d. ----------------------------------------------
    def _block(self, index: int) -> np.ndarray:
        return _iid_block(self.params["seed"], self.params["distribution"],
                          self.params["low"], self.params["high"], int(index))

    def _key(self) -> tuple:
        p = self.params
        return p["seed"], p["distribution"], p["low"], p["high"]

    def _tables(self, cells: np.ndarray):
        """Draw values and cumulative integrals over the block range covering cells."""
        key = self._key()
        b_lo = int(np.floor_divide(cells.min(), _BLOCK))
        b_hi = int(np.floor_divide(cells.max(), _BLOCK))
        draws = np.concatenate([_iid_block(*key, b) for b in range(b_lo, b_hi + 1)])
        heads = np.concatenate([_block_offset(key, b) + _block_prefix(*key, b)[:-1]
                                for b in range(b_lo, b_hi + 1)])
        return b_lo * _BLOCK, draws, heads

    def _draws(self, cells: np.ndarray) -> np.ndarray:
        cells = np.asarray(cells, dtype=np.int64)
        if cells.size == 0:
            return np.empty(cells.shape)
        base, draws, _ = self._tables(np.concatenate([cells.ravel(), cells.ravel() + 1]))
        return draws[cells - base]

    def _cumulative_cells(self, cells: np.ndarray) -> np.ndarray:
        """S(l) = int_0^l sigma for integer l (negative l allowed)."""
        cells = np.asarray(cells, dtype=np.int64)
        if cells.size == 0:
            return np.empty(cells.shape)
        base, _, heads = self._tables(cells)
        return heads[cells - base]

    def _pl_antiderivative(self, t: np.ndarray) -> np.ndarray:
        cell = np.floor(t)
        r = t - cell
        icell = cell.astype(np.int64)
        if icell.size == 0:
            return np.empty(t.shape)
        base, draws, heads = self._tables(np.concatenate([icell.ravel(), icell.ravel() + 1]))
        lo = draws[icell - base]
        hi = draws[icell + 1 - base]
        return heads[icell - base] + lo * r + (hi - lo) * r * r / 2.0

    # quadrature fallback --------------------------------------------------
    def _quadrature(self, t: np.ndarray) -> np.ndarray:
        out = np.empty(t.shape, dtype=float)
        for idx in np.ndindex(t.shape):
            end = float(t[idx])
            n = max(2, int(math.ceil(abs(end) / self.dt_quad)) + 1)
            grid = np.linspace(0.0, end, n)
            out[idx] = np.trapezoid(self.value(grid), grid)
        return out

    def describe(self) -> dict:
        p = {k: v for k, v in self.params.items() if k != "fn"}
        if "terms" in p:
            p["terms"] = [list(term) for term in p["terms"]]
        return {"family": self.family, **p}


@lru_cache(maxsize=512)
def _iid_block(seed: int, distribution: str, low: float, high: float, index: int) -> np.ndarray:
    rng = np.random.default_rng([int(seed) & 0xFFFFFFFF, index & 0xFFFFFFFFFFFF,
                                 1 if index < 0 else 0])
    if distribution == "uniform":
        draws = rng.uniform(low, high, _BLOCK)
    elif distribution == "bernoulli":
        draws = np.where(rng.random(_BLOCK) < 0.5, low, high)
    else:
        raise FieldError(f"unknown distribution {distribution!r}")
    draws.setflags(write=False)
    return draws


@lru_cache(maxsize=512)
def _block_prefix(seed, distribution, low, high, index) -> np.ndarray:
    """prefix[k] = int_{index*B}^{index*B + k} sigma, k = 0..B."""
    here = _iid_block(seed, distribution, low, high, index)
    nxt = _iid_block(seed, distribution, low, high, index + 1)
    vals = np.concatenate([here, nxt[:1]])
    cells = 0.5 * (vals[:-1] + vals[1:])
    prefix = np.concatenate([[0.0], np.cumsum(cells)])
    prefix.setflags(write=False)
    return prefix


_OFFSETS: dict = {}


def _block_offset(key: tuple, index: int) -> float:
    """int_0^{index*B} sigma, memoized per signal key."""
    table = _OFFSETS.setdefault(key, {0: 0.0})
    if index in table:
        return table[index]
    step = 1 if index > 0 else -1
    k = index
    while k not in table:
        k -= step
    while k != index:
        if step > 0:
            table[k + 1] = table[k] + float(_block_prefix(*key, k)[-1])
        else:
            table[k - 1] = table[k] - float(_block_prefix(*key, k - 1)[-1])
        k += step
    return table[index]


def make_sigma(spec: dict) -> SigmaSignal:
    """Build a SigmaSignal from a dict with a ``family`` key."""
    if not isinstance(spec, dict) or "family" not in spec:
        raise FieldError("sigma: expected an object with a 'family' key")
    family = spec["family"]
    allowed = {
        "constant": {"value"},
        "cosine": {"mean", "amplitude", "period"},
        "quasi_periodic": {"mean", "terms", "irrational"},
        "log_oscillatory": {"amplitude"},
        "piecewise_linear_iid": {"distribution", "seed"},
        "expression": {"expr", "dt_quad", "window"},
    }
    if family not in allowed:
        raise FieldError(f"sigma.family: unknown family {family!r}")
    unknown = set(spec) - allowed[family] - {"family"}
    if unknown:
        raise FieldError(f"sigma: unknown keys {sorted(unknown)} for family {family!r}")

    if family == "constant":
        return SigmaSignal("constant", {"value": _to_float(spec.get("value", 0.0), "sigma.value")})
    if family == "cosine":
        period = _to_float(spec.get("period", 1.0), "sigma.period")
        if period <= 0:
            raise FieldError("sigma.period must be positive")
        return SigmaSignal("cosine", {
            "mean": _to_float(spec.get("mean", 0.0), "sigma.mean"),
            "amplitude": _to_float(spec.get("amplitude", 1.0), "sigma.amplitude"),
            "period": period,
        })
    if family == "quasi_periodic":
        terms = _parse_terms(spec.get("terms"), bool(spec.get("irrational", True)))
        return SigmaSignal("quasi_periodic", {
            "mean": _to_float(spec.get("mean", 0.0), "sigma.mean"), "terms": terms})
    if family == "log_oscillatory":
        return SigmaSignal("log_oscillatory",
                           {"amplitude": _to_float(spec.get("amplitude", 1.0), "sigma.amplitude")})
    if family == "piecewise_linear_iid":
        dist = spec.get("distribution", {"name": "uniform", "low": 0.0, "high": 1.0})
        if isinstance(dist, str):
            dist = {"name": dist}
        if not isinstance(dist, dict):
            raise FieldError("sigma.distribution: expected an object")
        name = dist.get("name", "uniform")
        low = _to_float(dist.get("low", 0.0), "sigma.distribution.low")
        high = _to_float(dist.get("high", 1.0), "sigma.distribution.high")
        if name not in ("uniform", "bernoulli") or high < low:
            raise FieldError("sigma.distribution: need name uniform|bernoulli and low <= high")
        seed = spec.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise FieldError("sigma.seed: expected an integer")
        return SigmaSignal("piecewise_linear_iid",
                           {"distribution": name, "low": low, "high": high, "seed": seed})
    expr = spec.get("expr")
    if not isinstance(expr, str):
        raise FieldError("sigma.expr: expected an expression string in t")
    dt_quad = _to_float(spec.get("dt_quad", 1e-3), "sigma.dt_quad")
    window = _to_float(spec.get("window", 100.0), "sigma.window")
    fn = _compile(expr, ("t",))
    return SigmaSignal("expression", {"expr": expr, "fn": fn, "window": window},
                       exact=False, dt_quad=dt_quad)


def _parse_terms(raw, irrational: bool) -> tuple[tuple[float, float], ...]:
    if not isinstance(raw, (list, tuple)) or not raw:
        raise FieldError("quasi_periodic: 'terms' must be a nonempty list of [amplitude, omega]")
    terms = []
    for i, term in enumerate(raw):
        if not isinstance(term, (list, tuple)) or len(term) != 2:
            raise FieldError(f"quasi_periodic: terms[{i}] must be [amplitude, omega]")
        amp = _to_float(term[0], f"terms[{i}][0]")
        omega = _to_float(term[1], f"terms[{i}][1]")
        if omega <= 0:
            raise FieldError(f"quasi_periodic: terms[{i}] frequency must be positive")
        terms.append((amp, omega))
    if irrational:
        for i in range(len(terms)):
            for j in range(i + 1, len(terms)):
                ratio = terms[i][1] / terms[j][1]
                approx = Fraction(ratio).limit_denominator(1000)
                if abs(ratio - float(approx)) <= 1e-12 * max(1.0, abs(ratio)):
                    raise FieldError(
                        f"quasi_periodic: frequencies {terms[i][1]} and {terms[j][1]} "
                        f"are rationally dependent (ratio {approx}) but declared irrational")
    return tuple(terms)


# ---------------------------------------------------------------------------
# coefficient fields


@dataclass(frozen=True)
class CoefficientField:
    """Immutable, vectorized coefficient field on a bounded interval.

    ``a_fn``, ``b_fn``, ``c_fn`` take the *effective* time (after translation
    and reflection).  For separable fields ``c_fn`` is the full coefficient
    and ``c0_fn`` / ``sigma`` expose the split.
    """

    kind: str
    domain: Domain1D
    a_fn: Callable
    b_fn: Callable
    c_fn: Callable
    alpha: float
    bounds: dict
    time_dependent: bool
    c0_fn: Callable | None = None
    sigma: SigmaSignal | None = None
    period: float | None = None
    seed: int | None = None
    even_reflected: bool = False
    shift: float = 0.0
    outer_shift: float = 0.0
    t_range: tuple[float, float] | None = None
    limit: "CoefficientField | None" = None
    ab_static: bool = True
    spec: dict = dc_field(default_factory=dict, compare=False)

    @property
    def separable(self) -> bool:
        return self.sigma is not None

    def effective_time(self, t):
        """Time at which the underlying coefficients are read.

        (|t + shift| if even_reflected else t + shift) + outer_shift.
        """
        te = np.asarray(t, dtype=float) + self.shift
        if self.even_reflected:
            te = np.abs(te)
        return te + self.outer_shift if self.outer_shift else te

    def _check_x(self, x):
        x = np.asarray(x, dtype=float)
        tol = 1e-12 * (1.0 + abs(self.domain.x_hi) + abs(self.domain.x_lo))
        if np.any(x < self.domain.x_lo - tol) or np.any(x > self.domain.x_hi + tol):
            raise FieldError(
                f"x outside domain [{self.domain.x_lo}, {self.domain.x_hi}]")
        return x

    def a(self, t, x):
        return self.a_fn(self.effective_time(t), self._check_x(x))

    def b(self, t, x):
        return self.b_fn(self.effective_time(t), self._check_x(x))

    def c(self, t, x):
        return self.c_fn(self.effective_time(t), self._check_x(x))

    def c0(self, x):
        if self.c0_fn is None:
            raise FieldError("field is not separable")
        return self.c0_fn(0.0, self._check_x(x))

    def sigma_at(self, t):
        if self.sigma is None:
            raise FieldError("field is not separable")
        return self.sigma.value(self.effective_time(t))

    @property
    def c_sup(self) -> float:
        """Signed supremum of c (used in the monotonicity condition)."""
        return self.bounds["c_max"]

    @property
    def c_plus(self) -> float:
        return max(self.bounds["c_max"], 0.0)

    def translated(self, s: float) -> "CoefficientField":
        """Field t -> P(t + s)."""
        return replace(self, shift=self.shift + float(s))

    def reflected(self) -> "CoefficientField":
        """Even reflection about t = 0: t -> P(|t|)."""
        if self.even_reflected:
            return self
        return replace(self, even_reflected=True, shift=0.0,
                       outer_shift=self.shift + self.outer_shift)

    def with_domain(self, domain: Domain1D) -> "CoefficientField":
        return replace(self, domain=domain)


def eval(field: CoefficientField, t: float, x: float) -> tuple[float, float, float]:  # noqa: A001
    """Evaluate (a, b, c) at a single point."""
    a = float(field.a(t, x))
    b = float(field.b(t, x))
    c = float(field.c(t, x))
    if not (math.isfinite(a) and math.isfinite(b) and math.isfinite(c)):
        raise FieldError(f"non-finite coefficient at t={t}, x={x}")
    return a, b, c


def integral_sigma(field: CoefficientField | SigmaSignal, t0: float, t1: float) -> float:
    """int_{t0}^{t1} sigma, honouring the field's translation and reflection."""
    if t1 < t0:
        raise FieldError("integral_sigma needs t0 <= t1")
    if isinstance(field, SigmaSignal):
        return field.integral(t0, t1)
    if field.sigma is None:
        raise FieldError("integral_sigma needs a separable field")
    g = sigma_antiderivative(field, np.array([t0, t1], dtype=float))
    return float(g[1] - g[0])


def sigma_antiderivative(field: CoefficientField, t) -> np.ndarray:
    """H(t) with H(t1) - H(t0) = int_{t0}^{t1} sigma_eff for the field's signal."""
    if field.sigma is None:
        raise FieldError("field is not separable")
    u = np.asarray(t, dtype=float) + field.shift
    o = field.outer_shift
    g = field.sigma.antiderivative
    if field.even_reflected:
        return np.sign(u) * (g(np.abs(u) + o) - g(np.asarray(o)))
    return g(u + o)


def perturbed(field: CoefficientField, da=0.0, db=0.0, dc=0.0) -> CoefficientField:
    """Add perturbations to (a, b, c); each is a number or a callable (t, x).

    Callables are evaluated at the field's effective time.  Constant shifts of
    c keep a separable field separable.
    """
    def add(fn, delta):
        if callable(delta):
            return lambda t, x: fn(t, x) + delta(t, x)
        if delta == 0.0:
            return fn
        return lambda t, x: fn(t, x) + delta

    def mag(delta):
        if callable(delta):
            return float(np.max(np.abs(delta(np.linspace(-50, 50, 401)[:, None],
                                              np.linspace(field.domain.x_lo, field.domain.x_hi,
                                                          101)[None, :]))))
        return abs(delta)

    bounds = dict(field.bounds)
    bounds["a"] += mag(da)
    bounds["b"] += mag(db)
    bounds["c"] += mag(dc)
    bounds["c_max"] += mag(dc)
    alpha = field.alpha - mag(da)
    if alpha <= 0:
        raise FieldError("perturbation destroys ellipticity")
    c0_fn = field.c0_fn
    sigma = field.sigma
    if callable(dc) and sigma is not None:
        sigma = None
        c0_fn = None
    elif c0_fn is not None:
        c0_fn = add(c0_fn, dc)
    return replace(field, a_fn=add(field.a_fn, da), b_fn=add(field.b_fn, db),
                   c_fn=add(field.c_fn, dc), c0_fn=c0_fn, sigma=sigma, alpha=alpha,
                   bounds=bounds, kind=field.kind if sigma is field.sigma else "perturbed",
                   ab_static=field.ab_static and not (callable(da) or callable(db)),
                   time_dependent=field.time_dependent or any(callable(d) for d in (da, db, dc)),
                   spec={**field.spec, "perturbed": True})


# ---------------------------------------------------------------------------
# construction

_COMMON = {"kind", "even_reflected", "alpha", "bounds_window"}
_KEYS = {
    "constant": {"a", "b", "c"},
    "time_independent": {"a", "b", "c"},
    "periodic": {"a", "b", "c", "c0", "sigma", "period"},
    "separable_sigma": {"a", "b", "c0", "sigma"},
    "quasi_periodic": {"a", "b", "c0", "terms", "mean", "irrational"},
    "log_oscillatory": {"a", "b", "c0", "amplitude"},
    "random_stationary": {"a", "b", "c0", "distribution", "seed"},
    "converging": {"a", "b", "c", "a_transient", "b_transient", "c_transient", "rate"},
    "tabulated": {"t", "x", "a", "b", "c"},
}


def make_field(spec: dict, domain: Domain1D | None = None) -> CoefficientField:
    """Build a CoefficientField from a structured description.

    >>> f = make_field({"kind": "constant", "a": 1, "b": 0, "c": 0})
    >>> eval(f, 7.0, 0.3)
    (1.0, 0.0, 0.0)
    """
    if domain is None:
        domain = Domain1D()
    if not isinstance(spec, dict):
        raise FieldError("coefficients: expected an object")
    kind = spec.get("kind")
    if kind not in KINDS:
        raise FieldError(f"coefficients.kind: unknown kind {kind!r}")
    unknown = set(spec) - _KEYS[kind] - _COMMON
    if unknown:
        raise FieldError(f"coefficients: unknown keys {sorted(unknown)} for kind {kind!r}")

    if kind == "tabulated":
        return _tabulated(spec, domain)

    xt = ("t", "x")
    xo = ("x",)
    sigma = None
    c0_fn = None
    period = None
    seed = None
    limit = None
    time_dependent = True
    a_fn, _ = _function(spec.get("a", 1.0), xt if kind == "periodic" else xo, "coefficients.a")
    b_fn, _ = _function(spec.get("b", 0.0), xt if kind == "periodic" else xo, "coefficients.b")

    if kind in ("constant", "time_independent"):
        if kind == "constant":
            for key in ("a", "b", "c"):
                if key in spec:
                    _to_float(spec[key], f"coefficients.{key}")
        c_fn, _ = _function(spec.get("c", 0.0), xo, "coefficients.c")
        time_dependent = False
    elif kind == "converging":
        rate = _to_float(spec.get("rate", 1.0), "coefficients.rate")
        if rate <= 0:
            raise FieldError("coefficients.rate must be positive")
        base = {k: _function(spec.get(k, d), xo, f"coefficients.{k}")[0]
                for k, d in (("a", 1.0), ("b", 0.0), ("c", 0.0))}
        trans = {k: _function(spec.get(f"{k}_transient", 0.0), xo,
                              f"coefficients.{k}_transient")[0] for k in ("a", "b", "c")}

        def conv(k):
            return lambda t, x: base[k](t, x) + trans[k](t, x) * np.exp(-rate * np.abs(t))

        a_fn, b_fn, c_fn = conv("a"), conv("b"), conv("c")
        limit = make_field({"kind": "time_independent",
                            **{k: spec.get(k, d) for k, d in (("a", 1), ("b", 0), ("c", 0))}},
                           domain)
    else:
        if kind == "periodic" and ("c" in spec or "sigma" not in spec):
            if "c" in spec and ("sigma" in spec or "c0" in spec):
                raise FieldError("periodic: give either 'c' or 'c0' + 'sigma'")
            if "c0" in spec:
                raise FieldError("periodic: 'c0' needs 'sigma'")
            c_fn, _ = _function(spec.get("c", 0.0), xt, "coefficients.c")
        else:
            c0_fn, _ = _function(spec.get("c0", 0.0), xo, "coefficients.c0")
            sigma = _sigma_for_kind(kind, spec)
            sig = sigma

            def c_fn(t, x, _c0=c0_fn, _s=sig):
                t = np.asarray(t, dtype=float)
                return _c0(t, x) + _s.value(t)
        if kind == "random_stationary":
            seed = sigma.params["seed"]
        if kind == "periodic":
            period = _to_float(spec.get("period", sigma.params["period"] if sigma and
                                        sigma.family == "cosine" else None), "coefficients.period")
            if period <= 0:
                raise FieldError("coefficients.period must be positive")
            if sigma is not None and not (sigma.family == "cosine"
                                          and abs(sigma.params["period"] - period) < 1e-12):
                if sigma.family != "constant":
                    raise FieldError("periodic: sigma must be a cosine with the stated period")
        if sigma is not None and sigma.family == "cosine":
            period = sigma.params["period"]
        if sigma is not None and sigma.family == "constant":
            time_dependent = False

    ab_static = kind != "converging" and not (
        kind == "periodic" and (_uses_t(spec.get("a", 1.0)) or _uses_t(spec.get("b", 0.0))))
    even = bool(spec.get("even_reflected", False))
    window = _to_float(spec.get("bounds_window", period if period else 50.0),
                       "coefficients.bounds_window")
    bounds, a_min = _bounds(a_fn, b_fn, c_fn, c0_fn, sigma, domain, window, time_dependent)
    alpha = _alpha(spec, a_min, kind)
    field = CoefficientField(
        kind=kind, domain=domain, a_fn=a_fn, b_fn=b_fn, c_fn=c_fn, alpha=alpha,
        bounds=bounds, time_dependent=time_dependent, c0_fn=c0_fn, sigma=sigma,
        period=period, seed=seed, even_reflected=even, limit=limit, ab_static=ab_static,
        spec=dict(spec))
    if kind == "periodic" and sigma is None:
        _check_periodic(field)
    return field


def _sigma_for_kind(kind: str, spec: dict) -> SigmaSignal:
    if kind in ("separable_sigma", "periodic"):
        if "sigma" not in spec:
            raise FieldError(f"{kind}: missing 'sigma'")
        return make_sigma(spec["sigma"])
    if kind == "quasi_periodic":
        return make_sigma({"family": "quasi_periodic", "terms": spec.get("terms"),
                           "mean": spec.get("mean", 0.0),
                           "irrational": spec.get("irrational", True)})
    if kind == "log_oscillatory":
        return make_sigma({"family": "log_oscillatory", "amplitude": spec.get("amplitude", 1.0)})
    return make_sigma({"family": "piecewise_linear_iid",
                       "distribution": spec.get("distribution",
                                                {"name": "uniform", "low": 0.0, "high": 1.0}),
                       "seed": spec.get("seed", 0)})


def _sample_grid(domain: Domain1D, window: float, time_dependent: bool):
    xs = np.linspace(domain.x_lo, domain.x_hi, 257)
    ts = np.linspace(-window, window, 1601) if time_dependent else np.zeros(1)
    return ts[:, None], xs[None, :]


def _bounds(a_fn, b_fn, c_fn, c0_fn, sigma, domain, window, time_dependent):
    ts, xs = _sample_grid(domain, window, time_dependent and sigma is None)
    a = a_fn(ts, xs)
    b = b_fn(ts, xs)
    if sigma is not None:
        c0 = c0_fn(0.0, xs)
        s_lo, s_hi = sigma.bounds()
        c_abs = float(max(np.max(np.abs(c0 + s_lo)), np.max(np.abs(c0 + s_hi))))
        c_max = float(np.max(c0)) + s_hi
        exact = True
    else:
        c = c_fn(ts, xs)
        c_abs = float(np.max(np.abs(c)))
        c_max = float(np.max(c))
        exact = not time_dependent
    for name, arr in (("a", a), ("b", b)):
        if not np.all(np.isfinite(arr)):
            raise FieldError(f"coefficient {name} is not finite on the sampling grid")
    pad = 0.0 if exact else 1e-3
    bounds = {
        "a": float(np.max(np.abs(a))) * (1 + pad),
        "b": float(np.max(np.abs(b))) * (1 + pad),
        "c": c_abs * (1 + pad),
        "c_max": c_max + pad * abs(c_max),
        "window": float(window),
        "sampled": not exact,
    }
    return bounds, float(np.min(a))


def _alpha(spec: dict, a_min: float, kind: str) -> float:
    if "alpha" in spec:
        alpha = _to_float(spec["alpha"], "coefficients.alpha")
        if alpha <= 0:
            raise FieldError("coefficients.alpha: ellipticity bound must be positive")
        if a_min < alpha:
            raise FieldError(f"coefficients.a: sampled minimum {a_min} is below alpha={alpha}")
        return alpha
    if a_min <= 0:
        raise FieldError(f"coefficients.a: nonpositive ellipticity (min a = {a_min})")
    const_a = (isinstance(spec.get("a", 1.0), (int, float)) and not spec.get("a_transient")) \
        or kind == "constant"
    return a_min if const_a else 0.99 * a_min


def _check_periodic(field: CoefficientField) -> None:
    ts = np.linspace(0.0, field.period, 37)[:, None]
    xs = np.linspace(field.domain.x_lo, field.domain.x_hi, 33)[None, :]
    for name in ("a_fn", "b_fn", "c_fn"):
        fn = getattr(field, name)
        v0 = fn(ts, xs)
        v1 = fn(ts + field.period, xs)
        if np.max(np.abs(v1 - v0) / (1.0 + np.abs(v0))) > 1e-9:
            raise FieldError(f"periodic: coefficient {name[0]} is not {field.period}-periodic")


def _tabulated(spec: dict, domain: Domain1D) -> CoefficientField:
    try:
        t = np.asarray(spec["t"], dtype=float)
        x = np.asarray(spec["x"], dtype=float)
    except KeyError as exc:
        raise FieldError(f"tabulated: missing {exc.args[0]!r}") from exc
    if t.ndim != 1 or x.ndim != 1 or len(t) < 2 or len(x) < 2:
        raise FieldError("tabulated: 't' and 'x' must be 1-D grids with >= 2 points")
    if np.any(np.diff(t) <= 0) or np.any(np.diff(x) <= 0):
        raise FieldError("tabulated: grids must be strictly increasing")
    if x[0] > domain.x_lo + 1e-12 or x[-1] < domain.x_hi - 1e-12:
        raise FieldError("tabulated: x grid does not cover the domain")
    tables = {}
    for key, default in (("a", 1.0), ("b", 0.0), ("c", 0.0)):
        raw = spec.get(key, default)
        arr = np.broadcast_to(np.asarray(raw, dtype=float), (len(t), len(x))).copy()
        if not np.all(np.isfinite(arr)):
            raise FieldError(f"tabulated: {key} table not finite")
        tables[key] = arr

    def interp(arr):
        rgi = RegularGridInterpolator((t, x), arr, method="linear")

        def fn(tt, xx):
            tt = np.clip(np.asarray(tt, dtype=float), t[0], t[-1])
            xx = np.asarray(xx, dtype=float)
            shape = np.broadcast_shapes(tt.shape, xx.shape)
            pts = np.stack([np.broadcast_to(tt, shape).ravel(),
                            np.broadcast_to(xx, shape).ravel()], axis=-1)
            return rgi(pts).reshape(shape)

        return fn

    a_min = float(tables["a"].min())
    alpha = _alpha(spec, a_min, "tabulated")
    bounds = {"a": float(np.abs(tables["a"]).max()), "b": float(np.abs(tables["b"]).max()),
              "c": float(np.abs(tables["c"]).max()), "c_max": float(tables["c"].max()),
              "window": float(t[-1] - t[0]), "sampled": False}
    return CoefficientField(
        kind="tabulated", domain=domain, a_fn=interp(tables["a"]), b_fn=interp(tables["b"]),
        c_fn=interp(tables["c"]), alpha=alpha, bounds=bounds, time_dependent=True,
        ab_static=False,
        even_reflected=bool(spec.get("even_reflected", False)),
        t_range=(float(t[0]), float(t[-1])), spec={"kind": "tabulated"})
