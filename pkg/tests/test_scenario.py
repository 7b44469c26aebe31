import copy
import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from pareig.scenario import (OUTPUT_ENV, ScenarioError, default_output_dir, discrete_rate, dumps,
                             load_scenario, parse_scenario, run_scenario, strip_timing)

BASE = {
    "name": "small-heat",
    "domain": {"x_lo": 0.0, "x_hi": 1.0},
    "coefficients": {"kind": "constant", "c": 2.0},
    "discretization": {"n_interior": 19, "dt": 1e-2},
    "horizons": {"burn_in": 1.0, "t_max_plus": 20.0, "t_max_minus": 20.0, "record_stride": 10},
    "growthrate": {"T_list": [1.0, 2.0, 4.0]},
    "experiments": [{"name": "eigen", "kind": "eigen_report"},
                    {"name": "oracle", "kind": "oracle_crosscheck"}],
}


def _doc(**changes):
    d = copy.deepcopy(BASE)
    for path, value in changes.items():
        node = d
        keys = path.split("__")
        for k in keys[:-1]:
            node = node[k]
        node[keys[-1]] = value
    return d


def test_defaults_filled():
    cfg = parse_scenario({"name": "x", "domain": {"x_lo": 0, "x_hi": 2},
                          "coefficients": {"kind": "constant"}})
    assert cfg.discretization.n_interior == 199
    assert cfg.discretization.dt == 1e-3 and cfg.discretization.theta == 1.0
    assert cfg.horizons.burn_in == "auto"
    assert cfg.growthrate.tail_fraction == 0.5
    assert [e.kind for e in cfg.experiments] == ["eigen_report"]
    assert cfg.mesh().dx == pytest.approx(2.0 / 200)


@pytest.mark.parametrize("changes, path", [
    ({"discretization__dt": 1.0}, "$.discretization.dt"),
    ({"discretization__theta": 0.7}, "$.discretization.theta"),
    ({"horizons__record_stride": 0}, "$.horizons.record_stride"),
    ({"growthrate__T_list": [1.0, 15.0]}, "$.growthrate.T_list"),
    ({"coefficients": {"kind": "constant", "a": -1.0}}, "coefficients"),
    ({"experiments": [{"name": "e", "kind": "eigen_report"},
                      {"name": "e", "kind": "mp_decay"}]}, "$.experiments[1].name"),
    ({"experiments": [{"name": "e", "kind": "mp_decay", "parameters": {"T_list": [-1]}}]},
     "$.experiments[0].parameters.T_list[0]"),
    ({"domain": {"x_lo": 1.0, "x_hi": 0.0}}, "$.domain"),
    ({"extra": 1}, "$"),
])
def test_rejections_name_the_path(changes, path):
    with pytest.raises(ScenarioError) as info:
        parse_scenario(_doc(**changes))
    assert str(info.value).startswith(path)


def test_monotonicity_message():
    with pytest.raises(ScenarioError, match="monotonicity condition"):
        parse_scenario(_doc(coefficients={"kind": "constant", "c": 200.0}))


def test_richardson_needs_even_stride():
    with pytest.raises(ScenarioError, match="even record_stride"):
        parse_scenario(_doc(discretization={"n_interior": 19, "dt": 1e-2, "richardson": True},
                            horizons__record_stride=5))


def test_invalid_json_text():
    with pytest.raises(ScenarioError, match="not valid JSON"):
        parse_scenario("{nope")


def test_round_trip_through_to_dict():
    cfg = parse_scenario(BASE)
    assert parse_scenario(cfg.to_dict()) == cfg


def test_discrete_rate_formulas():
    assert discrete_rate(3.0, 0.1, 1.0) == pytest.approx(math.log(1.3) / 0.1)
    assert discrete_rate(3.0, 0.1, 0.5) == pytest.approx(math.log(1.15 / 0.85) / 0.1)


floats = st.floats(allow_nan=False, allow_infinity=True)
values = st.recursive(st.none() | st.booleans() | floats | st.integers() | st.text(max_size=5),
                      lambda inner: st.lists(inner, max_size=4)
                      | st.dictionaries(st.text(max_size=5), inner, max_size=4), max_leaves=20)


@settings(max_examples=100, deadline=None)
@given(obj=values)
def test_dumps_round_trips(obj):
    def restore(v):
        if isinstance(v, dict):
            return {k: restore(x) for k, x in v.items()}
        if isinstance(v, list):
            return [restore(x) for x in v]
        if v in ("inf", "-inf") and isinstance(v, str):
            return float(v)
        return v

    def normalize(v):
        if isinstance(v, dict):
            return {k: normalize(x) for k, x in v.items()}
        if isinstance(v, list):
            return [normalize(x) for x in v]
        if isinstance(v, str) and v in ("inf", "-inf"):
            return float(v)
        return v

    back = restore(json.loads(dumps(obj)))
    assert back == normalize(obj)


def test_dumps_is_key_sorted_and_exact():
    text = dumps({"b": 0.1, "a": [1, 2.0, float("-inf")]})
    assert text.index('"a"') < text.index('"b"')
    assert "0.10000000000000001" in text
    assert '"-inf"' in text


def test_run_writes_report_and_is_deterministic(tmp_path):
    cfg = parse_scenario(BASE)
    r1 = run_scenario(cfg, tmp_path / "one", threads=1)
    r2 = run_scenario(cfg, tmp_path / "two", threads=2)
    assert r1.exit_code == 0
    assert r1.document["all_hard_invariants_pass"]
    d1 = json.loads((tmp_path / "one" / "report.json").read_text())
    d2 = json.loads((tmp_path / "two" / "report.json").read_text())
    assert strip_timing(d1) == strip_timing(d2)
    assert (tmp_path / "one" / "parts" / "eigen.json").exists()
    assert (tmp_path / "one" / "invariants.csv").read_text().startswith("experiment,name")
    oracle = d1["experiments"]["oracle"]["result"]
    assert oracle
    assert d1["schema_version"] == "1.0"


def test_failing_experiment_is_isolated(tmp_path):
    doc = _doc(coefficients={"kind": "constant", "c": 15.0},
               experiments=[{"name": "eigen", "kind": "eigen_report"},
                            {"name": "broken", "kind": "kpp_entire",
                             "parameters": {"n_list": [1, 2], "window": [-5.0, 1.0]}}])
    rep = run_scenario(parse_scenario(doc), tmp_path)
    assert rep.exit_code == 1
    exps = rep.document["experiments"]
    assert exps["broken"]["status"] == "error"
    assert "window" in exps["broken"]["error"]
    assert exps["eigen"]["status"] == "ok"
    assert any(r["name"] == "experiment completed" and not r["passed"] for r in rep.invariants)


def test_output_directory_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "runs"))
    assert default_output_dir() == tmp_path / "runs"
    monkeypatch.delenv(OUTPUT_ENV)
    assert str(default_output_dir()) == "pareig-runs"


def test_shipped_scenarios_parse():
    import pathlib

    files = sorted(pathlib.Path(__file__).parents[1].glob("scenarios/*.json"))
    assert files
    for f in files:
        assert load_scenario(f).name == f.stem
