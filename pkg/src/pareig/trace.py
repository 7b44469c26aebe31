"""BetaTrace: uniformly sampled log sup-norm of the principal solution."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

INTERVAL_TAGS = ("R", "R_plus", "R_minus")


@dataclass(frozen=True)
class BetaTrace:
    """beta[k] = ln ||u(t_start + k*dt_record)||_inf, up to an additive anchor."""

    interval_tag: str
    t_start: float
    dt_record: float
    beta: np.ndarray
    profiles: dict = field(default_factory=dict, compare=False)
    burn_in_used: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.interval_tag not in INTERVAL_TAGS:
            raise ValueError(f"unknown interval tag {self.interval_tag!r}")
        if not self.dt_record > 0:
            raise ValueError("dt_record must be positive")
        beta = np.asarray(self.beta, dtype=float)
        if beta.ndim != 1 or len(beta) < 2:
            raise ValueError("beta must be a 1-D array with at least two samples")
        if not np.all(np.isfinite(beta)):
            raise ValueError("beta must be finite")
        object.__setattr__(self, "beta", beta)

    @property
    def n_samples(self) -> int:
        return len(self.beta)

    @property
    def times(self) -> np.ndarray:
        return self.t_start + self.dt_record * np.arange(len(self.beta))

    @property
    def t_end(self) -> float:
        return self.t_start + self.dt_record * (len(self.beta) - 1)

    @property
    def span(self) -> float:
        return self.t_end - self.t_start

    def index_of(self, t: float) -> int:
        k = (t - self.t_start) / self.dt_record
        i = int(round(k))
        if abs(k - i) > 1e-6 or i < 0 or i >= len(self.beta):
            raise ValueError(f"t={t} is not a sample time of the trace")
        return i

    def value_at(self, t: float) -> float:
        return float(self.beta[self.index_of(t)])

    def anchored(self, t_anchor: float) -> "BetaTrace":
        return replace(self, beta=self.beta - self.beta[self.index_of(t_anchor)])

    def slice(self, t_a: float, t_b: float, tag: str | None = None) -> "BetaTrace":
        i, j = self.index_of(t_a), self.index_of(t_b)
        if j - i < 1:
            raise ValueError("slice must contain at least two samples")
        profiles = {t: p for t, p in self.profiles.items() if t_a <= t <= t_b}
        tag = tag or infer_tag(t_a, t_b)
        return replace(self, interval_tag=tag, t_start=self.t_start + i * self.dt_record,
                       beta=self.beta[i:j + 1].copy(), profiles=profiles)

    def negated(self) -> "BetaTrace":
        return replace(self, beta=-self.beta)

    def plus_linear(self, kappa: float) -> "BetaTrace":
        return replace(self, beta=self.beta + kappa * self.times)

    def to_csv(self, path) -> None:
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "beta"])
            for t, b in zip(self.times, self.beta):
                writer.writerow([f"{t:.17g}", f"{b:.17g}"])

    def profiles_to_csv(self, path, x_nodes) -> None:
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "x", "u"])
            for t in sorted(self.profiles):
                for x, u in zip(x_nodes, self.profiles[t]):
                    writer.writerow([f"{t:.17g}", f"{x:.17g}", f"{u:.17g}"])

    @classmethod
    def from_csv(cls, path, interval_tag: str | None = None, meta: dict | None = None):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        t, beta = data[:, 0], data[:, 1]
        dts = np.diff(t)
        dt = float(np.mean(dts))
        if np.max(np.abs(dts - dt)) > 1e-9 * max(1.0, abs(dt)) + 1e-12 * np.max(np.abs(t)):
            raise ValueError("trace CSV is not uniformly sampled")
        tag = interval_tag or infer_tag(float(t[0]), float(t[-1]))
        return cls(tag, float(t[0]), dt, beta, meta=dict(meta or {}))


def infer_tag(t_a: float, t_b: float) -> str:
    if t_a >= 0:
        return "R_plus"
    if t_b <= 0:
        return "R_minus"
    return "R"


def linear_trace(slope: float, t_start: float, t_end: float, dt_record: float) -> BetaTrace:
    """beta(t) = slope * t sampled on [t_start, t_end]."""
    n = int(math.floor((t_end - t_start) / dt_record + 1e-9)) + 1
    t = t_start + dt_record * np.arange(n)
    return BetaTrace(infer_tag(t_start, t[-1]), t_start, dt_record, slope * t)
