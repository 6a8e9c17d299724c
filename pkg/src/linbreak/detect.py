"""Single and multiple change-point detection on top of :mod:`linbreak.cpstat`.

The multiple change-point procedure isolates the leftmost change first. A
range whose statistic exceeds the threshold is cut just left of its argmax
(by ``[eps N]`` samples) and rescanned; once the left piece looks stationary,
or becomes shorter than ``[2 eps N]``, the last argmax is emitted as a
change-point and the search restarts ``[eps N]`` samples to its right.
"""

from __future__ import annotations

import json
from collections.abc import Callable
from dataclasses import asdict, dataclass, field
from typing import Any, Union

import numpy as np

from .cpstat import StatProfile, profile
from .model import Sample, grid_index

Threshold = Union[float, Callable[[int], float]]


class ConfigError(ValueError):
    """Inconsistent detection configuration."""


@dataclass(frozen=True)
class DetectionConfig:
    """Search window, exclusion half-width and threshold policy.

    ``threshold`` is either a fixed value ``C`` or a callable giving ``C(n)``
    for a (sub-)sample of length ``n``; thresholds are in unsquared norm units.
    """

    threshold: Threshold
    beta: float = 0.05
    alpha: float = 0.95
    epsilon: float = 0.04

    def __post_init__(self) -> None:
        if not 0 <= self.beta < self.alpha <= 1:
            raise ConfigError("need 0 <= beta < alpha <= 1")
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")
        if self.beta > 0 and not self.epsilon < min(self.beta, 1 - self.alpha):
            raise ConfigError("epsilon must be below min(beta, 1 - alpha)")

    def threshold_for(self, n: int) -> float:
        c = self.threshold
        return float(c(n)) if callable(c) else float(c)


@dataclass(frozen=True)
class TraceStep:
    lo: int
    hi: int
    threshold: float
    max_value: float
    argmax: int
    exceeded: bool


@dataclass
class DetectionResult:
    """Outcome of :func:`detect_multiple`; indices are 1-based sample positions."""

    N: int
    estimates: list[int] = field(default_factory=list)
    segment_max_stats: list[float] = field(default_factory=list)
    decision_trace: list[TraceStep] = field(default_factory=list)

    @property
    def changepoint_count(self) -> int:
        return len(self.estimates)

    @property
    def thetas(self) -> list[float]:
        return [n / self.N for n in self.estimates]

    def to_dict(self) -> dict[str, Any]:
        return {
            "N": self.N,
            "changepoint_count": self.changepoint_count,
            "estimates": [{"n": n, "theta": n / self.N} for n in self.estimates],
            "segment_max_stats": self.segment_max_stats,
            "decision_trace": [asdict(s) for s in self.decision_trace],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def segment_view(sample: Sample, lo: int, hi: int) -> Sample:
    """Columns ``lo..hi`` (1-based, inclusive) as a standalone sample."""
    if not 1 <= lo <= hi <= sample.N:
        raise ValueError(f"need 1 <= lo <= hi <= N, got lo={lo}, hi={hi}, N={sample.N}")
    return Sample(sample.X[:, lo - 1:hi], sample.Y[:, lo - 1:hi])


def detect_single(sample: Sample, config: DetectionConfig) -> tuple[bool, StatProfile]:
    """Reject stationarity iff the window maximum exceeds ``C(N)``."""
    prof = profile(sample.X, sample.Y, config.beta, config.alpha)
    return prof.max_value > config.threshold_for(sample.N), prof


def detect_multiple(sample: Sample, config: DetectionConfig) -> DetectionResult:
    """Estimate the number and positions of change-points."""
    N = sample.N
    gap = grid_index(config.epsilon, N)
    if gap < 1 or N * config.epsilon < 2:
        raise ConfigError(f"epsilon={config.epsilon} leaves no exclusion width at N={N}")
    result = DetectionResult(N)

    def scan(lo: int, hi: int) -> TraceStep:
        sub = segment_view(sample, lo, hi)
        c = config.threshold_for(sub.N)
        prof = profile(sub.X, sub.Y, config.beta, config.alpha)
        step = TraceStep(lo, hi, c, prof.max_value, lo - 1 + prof.argmax_index, prof.max_value > c)
        result.decision_trace.append(step)
        result.segment_max_stats.append(prof.max_value)
        return step

    lo = 1
    while N - lo + 1 > 2 * gap:
        step = scan(lo, N)
        if not step.exceeded:
            break
        nmax = step.argmax
        while True:
            right = nmax - gap
            if right - lo + 1 <= 2 * gap:
                break
            step = scan(lo, right)
            if not step.exceeded:
                break
            nmax = step.argmax
        result.estimates.append(nmax)
        lo = nmax + gap
    return result
