"""Scenario configuration, experiment runners and report assembly."""

from __future__ import annotations

import copy
import json
import math
import os
import platform
import tempfile
import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import jsonschema
import numpy as np
import scipy

from .coeffield import CoefficientField, Domain1D, FieldError, make_field
from .discretize import Mesh, build_mesh
from .eigensolve import averaged_lower_bound, dirichlet_eigen, periodic_eigen
from .floquet import auto_burn_in, compute_bundle
from .growthrate import TrustCollapse, global_growth_rates, pde_report, synthetic_report
from .growthrate import translate_scan
from .kpp import (ancient_uniqueness_gap, entire_solution_pullback, make_nonlinearity,
                  mp_decay_test, persistence_verdict)
from .stepper import StepScheme

SCHEMA_VERSION = "1.0"
OUTPUT_ENV = "PAREIG_OUTPUT_DIR"
DEFAULT_OUTPUT = "pareig-runs"

KINDS = ("eigen_report", "synthetic_growth", "kpp_persistence", "kpp_entire",
         "kpp_uniqueness", "mp_decay", "translate_scan", "oracle_crosscheck")

_pos = {"type": "number", "exclusiveMinimum": 0}
_pos_list = {"type": "array", "items": _pos, "minItems": 1}
_form = {"enum": ["logistic_quadratic", "logistic_cubic"]}
_n_coef = {"type": ["number", "string"]}
_window = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}


def _obj(props: dict, required=()) -> dict:
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


PARAMETER_SCHEMAS = {
    "eigen_report": _obj({"write_traces": {"type": "boolean"}}),
    "synthetic_growth": _obj({"t_max_plus": _pos, "t_max_minus": _pos, "dt_record": _pos,
                              "T_list": _pos_list, "tail_start": _pos,
                              "tail_fraction": {"type": "number", "exclusiveMinimum": 0,
                                                "exclusiveMaximum": 1},
                              "write_traces": {"type": "boolean"}}),
    "kpp_persistence": _obj({"form": _form, "n": _n_coef, "horizon": _pos, "amplitude": _pos,
                             "floor_tol": _pos, "ext_tol": _pos, "dt": _pos}),
    "kpp_entire": _obj({"form": _form, "n": _n_coef, "n_list": _pos_list, "window": _window,
                        "dt": _pos, "gap_tol": _pos}),
    "kpp_uniqueness": _obj({"form": _form, "n": _n_coef, "n_list": _pos_list,
                            "window": _window, "second_datum_factor": _pos, "dt": _pos,
                            "gap_tol": _pos}),
    "mp_decay": _obj({"T_list": _pos_list, "margin": _pos, "dt": _pos, "amplitude": _pos}),
    "translate_scan": _obj({"shifts": {"type": "array", "items": {"type": "number"},
                                       "minItems": 1},
                            "horizon": _pos, "burn_in": _pos}),
    "oracle_crosscheck": _obj({"t_star": {"type": "number"}, "tolerance": _pos,
                               "bound_tolerance": _pos, "t_grid_step": _pos}),
}

SCHEMA = _obj({
    "name": {"type": "string", "minLength": 1},
    "domain": _obj({"x_lo": {"type": "number"}, "x_hi": {"type": "number"}}, ["x_lo", "x_hi"]),
    "coefficients": {"type": "object", "required": ["kind"]},
    "discretization": _obj({"n_interior": {"type": "integer", "minimum": 3},
                            "dt": _pos, "theta": {"enum": [1, 0.5]},
                            "richardson": {"type": "boolean"}}),
    "horizons": _obj({"burn_in": {"oneOf": [_pos, {"const": "auto"}]},
                      "t_max_plus": _pos, "t_max_minus": _pos,
                      "record_stride": {"type": "integer", "minimum": 1}}),
    "growthrate": _obj({"T_list": {"oneOf": [_pos_list, {"type": "null"}]},
                        "s_stride": {"type": "integer", "minimum": 1},
                        "tail_fraction": {"type": "number", "exclusiveMinimum": 0,
                                          "exclusiveMaximum": 1},
                        "tail_start": {"oneOf": [_pos, {"type": "null"}]}}),
    "experiments": {"type": "array", "items": _obj({
        "name": {"type": "string", "minLength": 1},
        "kind": {"enum": list(KINDS)},
        "parameters": {"type": "object"}}, ["name", "kind"])},
    "seed": {"type": "integer"},
}, ["name", "domain", "coefficients"])


class ScenarioError(ValueError):
    """Invalid scenario document; the message starts with the offending path."""


@dataclass(frozen=True)
class Discretization:
    n_interior: int = 199
    dt: float = 1e-3
    theta: float = 1.0
    richardson: bool = False


@dataclass(frozen=True)
class Horizons:
    burn_in: float | str = "auto"
    t_max_plus: float = 50.0
    t_max_minus: float = 50.0
    record_stride: int = 10


@dataclass(frozen=True)
class GrowthSettings:
    T_list: list | None = None
    s_stride: int = 1
    tail_fraction: float = 0.5
    tail_start: float | None = None


@dataclass(frozen=True)
class Experiment:
    name: str
    kind: str
    parameters: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    domain: Domain1D
    coefficients: dict
    discretization: Discretization = Discretization()
    horizons: Horizons = Horizons()
    growthrate: GrowthSettings = GrowthSettings()
    experiments: tuple = (Experiment("eigen", "eigen_report"),)
    seed: int = 0

    def build_field(self) -> CoefficientField:
        return make_field(self.coefficients, self.domain)

    def mesh(self) -> Mesh:
        return build_mesh(self.domain, self.discretization.n_interior)

    def scheme(self, dt: float | None = None) -> StepScheme:
        return StepScheme(self.discretization.dt if dt is None else dt,
                          float(self.discretization.theta))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "domain": {"x_lo": self.domain.x_lo, "x_hi": self.domain.x_hi},
            "coefficients": copy.deepcopy(self.coefficients),
            "discretization": asdict(self.discretization),
            "horizons": asdict(self.horizons),
            "growthrate": asdict(self.growthrate),
            "experiments": [asdict(e) for e in self.experiments],
            "seed": self.seed,
        }


def _path(err) -> str:
    out = "$"
    for p in err.absolute_path:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def _validate(doc, schema, prefix=""):
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        e = errors[0]
        path = _path(e)
        if prefix:
            path = prefix + path[1:]
        raise ScenarioError(f"{path}: {e.message}")


def parse_scenario(doc) -> ScenarioConfig:
    """Validate a scenario document (JSON text or dict) and fill defaults."""
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"$: not valid JSON ({exc})") from None
    _validate(doc, SCHEMA)
    if not doc["domain"]["x_hi"] > doc["domain"]["x_lo"]:
        raise ScenarioError("$.domain: x_hi must exceed x_lo")
    dom = Domain1D(float(doc["domain"]["x_lo"]), float(doc["domain"]["x_hi"]))
    disc = Discretization(**doc.get("discretization", {}))
    disc = Discretization(disc.n_interior, float(disc.dt), float(disc.theta), disc.richardson)
    hz = Horizons(**doc.get("horizons", {}))
    gr = GrowthSettings(**doc.get("growthrate", {}))
    exps = []
    seen = set()
    for i, e in enumerate(doc.get("experiments", [{"name": "eigen", "kind": "eigen_report"}])):
        if e["name"] in seen:
            raise ScenarioError(f"$.experiments[{i}].name: duplicate experiment name "
                                f"{e['name']!r}")
        seen.add(e["name"])
        params = e.get("parameters", {})
        _validate(params, PARAMETER_SCHEMAS[e["kind"]], f"$.experiments[{i}].parameters")
        exps.append(Experiment(e["name"], e["kind"], dict(params)))
    cfg = ScenarioConfig(doc["name"], dom, dict(doc["coefficients"]), disc, hz, gr,
                         tuple(exps), int(doc.get("seed", 0)))
    try:
        fld = cfg.build_field()
    except FieldError as exc:
        msg = str(exc)
        raise ScenarioError(msg if msg.startswith("coefficients") else
                            f"$.coefficients: {msg}") from None
    if disc.theta == 1.0 and disc.dt * fld.c_plus >= 1.0:
        raise ScenarioError(
            f"$.discretization.dt: monotonicity condition dt*max(c+) < 1 violated "
            f"(dt={disc.dt}, max(c+)={fld.c_plus:.6g})")
    if disc.richardson and hz.record_stride % 2:
        raise ScenarioError("$.horizons.record_stride: richardson needs an even record_stride")
    t_max = min(hz.t_max_plus, hz.t_max_minus)
    if gr.T_list is not None and max(gr.T_list) > t_max / 2:
        raise ScenarioError(f"$.growthrate.T_list: max T {max(gr.T_list)} exceeds t_max/2 = "
                            f"{t_max / 2}")
    return cfg


def load_scenario(path) -> ScenarioConfig:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# serialization


def _fmt(v: float) -> str:
    if math.isnan(v):
        return '"nan"'
    if math.isinf(v):
        return '"inf"' if v > 0 else '"-inf"'
    s = f"{v:.17g}"
    if "e" not in s and "." not in s and "inf" not in s:
        s += ".0"
    return s


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with sorted keys and floats written with 17 significant digits."""
    obj = to_jsonable(obj) if _level == 0 else obj
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {dumps(obj[k], indent, _level + 1)}"
                 for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return _fmt(obj)
    return json.dumps(obj)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# experiments


@dataclass
class Context:
    config: ScenarioConfig
    field: CoefficientField
    mesh: Mesh
    scheme: StepScheme
    burn_in: float
    gamma: float | None


def _inv(name, passed, tolerance, hard=True, **extra):
    return {"name": name, "passed": bool(passed), "tolerance": tolerance, "hard": hard, **extra}


def _report_invariants(report) -> list:
    out = [_inv(c["name"], c["passed"], c["tolerance"], lhs=c["lhs"], rhs=c["rhs"])
           for c in report.checks]
    for iv, vals in report.values.items():
        for name, est in vals.items():
            if est.defined:
                out.append(_inv(f"{iv}: {name} converged", est.converged, None, hard=False))
    return out


def _t_list(ctx: Context, span: float):
    gr = ctx.config.growthrate
    if gr.T_list is not None:
        return list(gr.T_list)
    return [span / 16, span / 8, span / 4]


def _exp_eigen_report(ctx: Context, params: dict):
    cfg = ctx.config
    hz = cfg.horizons
    gr = cfg.growthrate
    report, traces = pde_report(ctx.field, ctx.mesh, ctx.scheme, hz.t_max_plus, hz.t_max_minus,
                                ctx.burn_in, hz.record_stride,
                                _t_list(ctx, min(hz.t_max_plus, hz.t_max_minus)),
                                gr.tail_fraction, gr.tail_start,
                                cfg.discretization.richardson, gr.s_stride)
    out_traces = dict(zip(("R", "R_plus", "R_minus"), traces))
    if not params.get("write_traces", True):
        out_traces = {}
    return {"report": report.to_dict()}, _report_invariants(report), out_traces


def _exp_synthetic_growth(ctx: Context, params: dict):
    gr = ctx.config.growthrate
    tp = params.get("t_max_plus", 1e5)
    tm = params.get("t_max_minus", tp)
    dt_rec = params.get("dt_record", 1.0)
    T_list = params.get("T_list", gr.T_list or [tp / 1e4, tp / 1e3, tp / 1e2, tp / 10])
    report, traces = synthetic_report(ctx.field, tp, tm, dt_rec, T_list,
                                      params.get("tail_fraction", gr.tail_fraction),
                                      params.get("tail_start", gr.tail_start), mesh=ctx.mesh,
                                      stride=gr.s_stride)
    out_traces = dict(zip(("R", "R_plus", "R_minus"), traces))
    if not params.get("write_traces", False):
        out_traces = {}
    return {"report": report.to_dict()}, _report_invariants(report), out_traces


def _kpp_scheme(ctx: Context, params: dict) -> StepScheme:
    return StepScheme(params.get("dt", ctx.scheme.dt), 1.0)


def _exp_kpp_persistence(ctx: Context, params: dict):
    scheme = _kpp_scheme(ctx, params)
    fspec = make_nonlinearity(params.get("form", "logistic_quadratic"), ctx.field,
                              params.get("n", 1.0))
    u0 = params.get("amplitude", 0.1) * ctx.mesh.sine_profile()
    v = persistence_verdict(ctx.field, fspec, u0, params.get("horizon", 60.0), ctx.mesh, scheme,
                            floor_tol=params.get("floor_tol", 1e-3),
                            ext_tol=params.get("ext_tol", 1e-6))
    res = {"verdict": v.verdict, "floor": v.floor,
           "mu_bp_plus": {"value": v.mu_bp_plus, "trust_radius": v.margin},
           "fitted_rate": v.fitted_rate, "final_sup": v.final_sup, "margin": v.margin}
    invs = [_inv("verdict consistent with sign of mu_bp(R+)", v.consistency, v.margin),
            _inv("verdict determinate", v.verdict != "inconclusive", None, hard=False)]
    return res, invs, {}


def _pullback_common(ctx, params):
    scheme = _kpp_scheme(ctx, params)
    fspec = make_nonlinearity(params.get("form", "logistic_quadratic"), ctx.field,
                              params.get("n", 1.0))
    n_list = params.get("n_list", [5, 10, 20, 40])
    window = tuple(params.get("window", (0.0, 1.0)))
    return scheme, fspec, n_list, window


def _exp_kpp_entire(ctx: Context, params: dict):
    scheme, fspec, n_list, window = _pullback_common(ctx, params)
    tol = params.get("gap_tol", 1e-6)
    pb = entire_solution_pullback(ctx.field, fspec, n_list, window, ctx.mesh, scheme)
    res = {"n_list": pb.n_list, "gaps": pb.gaps, "monotone": pb.monotone, "floors": pb.floors,
           "sups": pb.sups, "M": fspec.M}
    invs = [_inv("pullback sequence nonincreasing", all(pb.monotone), 1e-12),
            _inv("final pullback gap below tolerance", pb.gaps[-1] < tol, tol, hard=False)]
    return res, invs, {}


def _exp_kpp_uniqueness(ctx: Context, params: dict):
    scheme, fspec, n_list, window = _pullback_common(ctx, params)
    tol = params.get("gap_tol", 1e-6)
    second = params.get("second_datum_factor", 0.5) * fspec.M * ctx.mesh.sine_profile()
    gaps = ancient_uniqueness_gap(ctx.field, fspec, n_list, second, window, ctx.mesh, scheme)
    res = {"n_list": sorted(float(n) for n in n_list), "gaps": gaps, "M": fspec.M}
    invs = [_inv("pullback limits agree", gaps[-1] < tol, tol, hard=False),
            _inv("gap nonincreasing in n", all(b <= a * (1 + 1e-9) + 1e-15
                                               for a, b in zip(gaps, gaps[1:])), 1e-9,
                 hard=False)]
    return res, invs, {}


def _exp_mp_decay(ctx: Context, params: dict):
    scheme = _kpp_scheme(ctx, params)
    u0 = params.get("amplitude", 1.0) * ctx.mesh.sine_profile()
    r = mp_decay_test(ctx.field, ctx.mesh, scheme, u0, params.get("T_list", [5, 10, 20, 40]),
                      params.get("margin", 0.05))
    res = {"T_list": r.T_list, "sup_at_zero": r.sup_at_zero, "fitted_rate": r.fitted_rate,
           "classification": r.classification, "margin": r.margin}
    invs = [_inv("sup at t=0 finite and positive",
                 all(v > 0 for v in r.sup_at_zero), None, hard=True)]
    return res, invs, {}


def _exp_translate_scan(ctx: Context, params: dict):
    shifts = params.get("shifts", [0.0, 0.25, 0.5])
    horizon = params.get("horizon", ctx.config.horizons.t_max_plus)
    scan = translate_scan(ctx.field, ctx.mesh, ctx.scheme, shifts, horizon,
                          params.get("burn_in", ctx.burn_in), ctx.config.horizons.record_stride,
                          ctx.config.growthrate.tail_fraction)
    res, invs = {}, []
    for s, (mu_p, lam_b) in scan.items():
        res[f"{s:.17g}"] = {"mu_p": mu_p.to_dict(), "lambda_b": lam_b.to_dict()}
        tol = mu_p.trust_radius + lam_b.trust_radius
        invs.append(_inv(f"shift {s:g}: lambda_b <= mu_p", lam_b.value <= mu_p.value + tol, tol))
    return res, invs, {}


def discrete_rate(lam: float, dt: float, theta: float) -> float:
    """Exact per-unit-time decay rate of the principal mode under the theta-scheme."""
    if theta == 1.0:
        return math.log1p(dt * lam) / dt
    return math.log((1.0 + 0.5 * dt * lam) / (1.0 - 0.5 * dt * lam)) / dt


def _exp_oracle_crosscheck(ctx: Context, params: dict):
    fld, mesh, scheme = ctx.field, ctx.mesh, ctx.scheme
    tol = params.get("tolerance", 1e-6)
    horizon = ctx.config.horizons.t_max_plus
    res, invs = {}, []
    if not fld.time_dependent:
        ev = dirichlet_eigen(fld, mesh, params.get("t_star", 0.0))
        oracle = discrete_rate(ev.value, scheme.dt, scheme.theta)
        res["oracle"] = {"method": "dirichlet_eigen", "lambda_h": ev.value,
                         "time_discrete": oracle, "residual": ev.residual}
        T_list = [horizon / 8, horizon / 4]
    elif fld.period is not None:
        ev = periodic_eigen(fld, mesh, scheme)
        oracle = ev.value
        res["oracle"] = {"method": "periodic_eigen", "value": oracle, "residual": ev.residual,
                         "period": fld.period}
        k = max(1, int(horizon / 8 / fld.period))
        T_list = [k * fld.period, 2 * k * fld.period]
    else:
        step = params.get("t_grid_step", 0.1)
        grid = np.arange(0.0, horizon + 0.5 * step, step)
        bound = averaged_lower_bound(fld, mesh, grid, [horizon / 8, horizon / 4])
        btol = params.get("bound_tolerance", 1e-2)
        tr = compute_bundle(fld, mesh, scheme, 0.0, horizon, ctx.burn_in,
                            ctx.config.horizons.record_stride)
        _, ggr = global_growth_rates(tr, [horizon / 8, horizon / 4])
        lam_bp = -ggr.value
        res["oracle"] = {"method": "averaged_lower_bound", "bound": bound}
        res["pipeline"] = {"lambda_bp_window": {"value": lam_bp,
                                                "trust_radius": ggr.trust_radius}}
        invs.append(_inv("lambda_bp >= averaged lower bound",
                         lam_bp >= bound - btol - ggr.trust_radius, btol))
        return res, invs, {}
    tr = compute_bundle(fld.reflected(), mesh, scheme, 0.0, horizon, ctx.burn_in,
                        ctx.config.horizons.record_stride, tag="R_plus")
    lgr, ggr = global_growth_rates(tr, T_list)
    res["pipeline"] = {"mu_bp_plus": {"value": -lgr.value, "trust_radius": lgr.trust_radius},
                       "lambda_bp_plus": {"value": -ggr.value, "trust_radius": ggr.trust_radius}}
    for name, est in (("mu_bp", lgr), ("lambda_bp", ggr)):
        delta = -est.value - oracle
        res.setdefault("deltas", {})[name] = delta
        t = tol + est.trust_radius
        invs.append(_inv(f"{name}(R+) matches oracle", abs(delta) <= t, t, delta=delta))
    return res, invs, {}


RUNNERS = {
    "eigen_report": _exp_eigen_report,
    "synthetic_growth": _exp_synthetic_growth,
    "kpp_persistence": _exp_kpp_persistence,
    "kpp_entire": _exp_kpp_entire,
    "kpp_uniqueness": _exp_kpp_uniqueness,
    "mp_decay": _exp_mp_decay,
    "translate_scan": _exp_translate_scan,
    "oracle_crosscheck": _exp_oracle_crosscheck,
}

_NEEDS_BURN = {"eigen_report", "translate_scan", "oracle_crosscheck"}


# ---------------------------------------------------------------------------
# runner


@dataclass
class RunReport:
    document: dict
    out_dir: Path | None
    exit_code: int

    @property
    def invariants(self) -> list:
        return self.document["invariants"]


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_ENV, DEFAULT_OUTPUT))


def _versions() -> dict:
    from . import __version__

    return {"pareig": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def _run_one(ctx: Context, exp: Experiment, out_dir: Path | None):
    t0 = time.perf_counter()
    try:
        res, invs, traces = RUNNERS[exp.kind](ctx, exp.parameters)
        status = "ok"
        error = None
    except (TrustCollapse, ValueError, ArithmeticError, RuntimeError) as exc:
        res, invs, traces = {}, [], {}
        status = "error"
        error = f"{type(exc).__name__}: {exc}"
        invs = [_inv("experiment completed", False, None, traceback=traceback.format_exc(
            limit=3))]
    files = {}
    if out_dir is not None:
        for tag, tr in traces.items():
            p = out_dir / "traces" / f"{exp.name}_{tag}.csv"
            p.parent.mkdir(parents=True, exist_ok=True)
            tr.to_csv(p)
            files[tag] = str(p.relative_to(out_dir))
    entry = {"kind": exp.kind, "status": status, "parameters": exp.parameters, "result": res,
             "invariants": invs, "trace_files": files}
    if error:
        entry["error"] = error
    elapsed = time.perf_counter() - t0
    if out_dir is not None:
        _atomic_write(out_dir / "parts" / f"{exp.name}.json", dumps(entry))
    return exp.name, entry, elapsed


def resolve_burn_in(cfg: ScenarioConfig, fld: CoefficientField, mesh: Mesh,
                    scheme: StepScheme) -> tuple[float, float | None]:
    if cfg.horizons.burn_in != "auto":
        return float(cfg.horizons.burn_in), None
    return auto_burn_in(fld, mesh, scheme)


def run_scenario(cfg: ScenarioConfig, out_dir=None, threads: int = 1,
                 write: bool = True) -> RunReport:
    """Run every experiment of a scenario; failures are recorded, not raised."""
    t_start = time.perf_counter()
    fld = cfg.build_field()
    mesh = cfg.mesh()
    scheme = cfg.scheme()
    gamma = None
    burn = None
    setup_invs = []
    if any(e.kind in _NEEDS_BURN for e in cfg.experiments):
        try:
            burn, gamma = resolve_burn_in(cfg, fld, mesh, scheme)
        except ValueError as exc:
            setup_invs.append(_inv("burn-in resolved", False, None, error=str(exc)))
            burn = 3.0
    ctx = Context(cfg, fld, mesh, scheme, burn, gamma)
    target = None
    if write:
        target = Path(out_dir) if out_dir is not None else default_output_dir() / cfg.name
        target.mkdir(parents=True, exist_ok=True)
    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        results = list(pool.map(lambda e: _run_one(ctx, e, target), cfg.experiments))
    experiments = {name: entry for name, entry, _ in results}
    table = list(setup_invs)
    for name, entry, _ in results:
        for inv in entry["invariants"]:
            table.append({"experiment": name, **{k: inv[k] for k in
                                                 ("name", "passed", "tolerance", "hard")}})
    hard_fail = any(r["hard"] and not r["passed"] for r in table)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "scenario": cfg.to_dict(),
        "setup": {"burn_in": burn, "burn_in_auto": cfg.horizons.burn_in == "auto",
                  "gamma": gamma, "field_kind": fld.kind, "c_sup": fld.c_sup,
                  "alpha": fld.alpha},
        "experiments": experiments,
        "invariants": table,
        "all_hard_invariants_pass": not hard_fail,
        "versions": _versions(),
        "timing": {"total_seconds": time.perf_counter() - t_start,
                   "experiments": {name: el for name, _, el in results}},
    }
    if target is not None:
        _atomic_write(target / "report.json", dumps(doc))
        rows = ["experiment,name,passed,tolerance,hard"]
        for r in table:
            tol = "" if r["tolerance"] is None else f"{r['tolerance']:.17g}"
            rows.append(f"{r.get('experiment', '')},\"{r['name']}\",{r['passed']},{tol},"
                        f"{r['hard']}")
        _atomic_write(target / "invariants.csv", "\n".join(rows) + "\n")
    return RunReport(doc, target, 1 if hard_fail else 0)


def strip_timing(doc: dict) -> dict:
    """Copy of a report without the timing section (for determinism checks)."""
    out = copy.deepcopy(doc)
    out.pop("timing", None)
    return out
