"""Named coefficient fields and a seeded randomized scenario suite."""

from __future__ import annotations

import math

import numpy as np

NAMED = {
    "frozen-heat": {"kind": "constant", "a": 1.0, "b": 0.0, "c": 0.0},
    "frozen-plus": {"kind": "constant", "a": 1.0, "b": 0.0, "c": math.pi ** 2 + 0.5},
    "frozen-minus": {"kind": "constant", "a": 1.0, "b": 0.0, "c": math.pi ** 2 - 0.5},
    "frozen-critical": {"kind": "constant", "a": 1.0, "b": 0.0, "c": math.pi ** 2},
    "periodic-sigma": {"kind": "separable_sigma", "c0": 0.0,
                       "sigma": {"family": "cosine", "mean": 1.0, "amplitude": 1.0,
                                 "period": 1.0}},
    "periodic-kpp": {"kind": "periodic", "period": 1.0,
                     "c": "pi**2 + 0.5 + cos(2*pi*t)"},
    "periodic-kpp-reversed": {"kind": "periodic", "period": 1.0,
                              "c": "pi**2 - 0.5 + cos(2*pi*t)"},
    "periodic-drift": {"kind": "periodic", "period": 1.0, "b": "0.5*sin(2*pi*t)",
                       "c": "sin(pi*x)"},
    "quasi-periodic": {"kind": "quasi_periodic", "terms": [[1.0, 1.0], [1.0, math.sqrt(2.0)]]},
    "log-oscillatory": {"kind": "log_oscillatory", "amplitude": 1.0},
    "log-oscillatory-kpp": {"kind": "log_oscillatory", "amplitude": 1.0, "c0": math.pi ** 2},
    "random-uniform": {"kind": "random_stationary", "distribution": "uniform", "seed": 0},
    "converging": {"kind": "converging", "a": 1.0, "c": "sin(pi*x)", "c_transient": 2.0,
                   "rate": 0.5},
    "inhomogeneous": {"kind": "time_independent", "a": "1 + 0.5*x", "b": "1 - 2*x",
                      "c": "2*sin(pi*x)"},
}


def named_field(name: str) -> dict:
    try:
        return dict(NAMED[name])
    except KeyError:
        raise KeyError(f"unknown suite field {name!r}; choose from {sorted(NAMED)}") from None


FAMILIES = ("constant", "time_independent", "periodic_sigma", "periodic_full", "quasi_periodic",
            "log_oscillatory", "random_stationary", "converging")


def _random_field(family: str, rng: np.random.Generator) -> dict:
    u = lambda lo, hi: float(rng.uniform(lo, hi))  # noqa: E731
    if family == "constant":
        return {"kind": "constant", "a": u(0.5, 2.0), "b": u(-1.0, 1.0), "c": u(-2.0, 5.0)}
    if family == "time_independent":
        return {"kind": "time_independent", "a": f"{u(0.6, 1.5)!r} + {u(0, 0.4)!r}*x",
                "b": f"{u(-1, 1)!r}*cos(pi*x)", "c": f"{u(0, 4)!r}*sin(pi*x)"}
    if family == "periodic_sigma":
        return {"kind": "separable_sigma", "c0": f"{u(0, 2)!r}*x",
                "sigma": {"family": "cosine", "mean": u(-1, 1), "amplitude": u(0.2, 2),
                          "period": float(rng.choice([0.5, 1.0, 2.0]))}}
    if family == "periodic_full":
        p = float(rng.choice([1.0, 2.0]))
        return {"kind": "periodic", "period": p, "a": f"1 + {u(0, 0.3)!r}*sin(2*pi*t/{p!r})",
                "b": f"{u(0, 1)!r}*cos(2*pi*t/{p!r})",
                "c": f"{u(0, 3)!r}*sin(pi*x)*(1 + cos(2*pi*t/{p!r}))"}
    if family == "quasi_periodic":
        return {"kind": "quasi_periodic", "mean": u(-1, 1),
                "terms": [[u(0.3, 1.5), 1.0], [u(0.3, 1.5), math.sqrt(2.0)]]}
    if family == "log_oscillatory":
        return {"kind": "log_oscillatory", "amplitude": u(0.3, 1.5), "c0": u(0, 3)}
    if family == "random_stationary":
        return {"kind": "random_stationary", "seed": int(rng.integers(0, 2 ** 31)),
                "distribution": str(rng.choice(["uniform", "bernoulli"]))}
    if family == "converging":
        return {"kind": "converging", "a": 1.0, "c": f"{u(0, 3)!r}*sin(pi*x)",
                "c_transient": u(-2, 2), "rate": u(0.2, 2.0)}
    raise ValueError(f"unknown family {family!r}")


def random_suite(seed: int = 0, count: int = 20) -> list[dict]:
    """count coefficient specs cycling through all families, parameters drawn from seed."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        family = FAMILIES[i % len(FAMILIES)]
        out.append({"name": f"{family}-{i:02d}", "family": family,
                    "coefficients": _random_field(family, rng)})
    return out
