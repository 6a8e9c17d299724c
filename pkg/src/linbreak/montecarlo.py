"""Seeded, chunked Monte Carlo over simulated samples.

Trials are split into contiguous chunks; each chunk is simulated and
reduced independently (optionally in worker processes), and results are
concatenated in trial order, so any worker count gives identical output.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from .baseline import sup_wald_batch
from .cpstat import profile_max
from .model import ModelSpec, simulate_batch

Statistic = Literal["core", "wald"]

_CELLS_PER_CHUNK = 4_000_000


def _chunk_size(spec: ModelSpec) -> int:
    per_trial = spec.N * spec.K * max(spec.K, spec.M) * 2
    return max(1, min(500, _CELLS_PER_CHUNK // per_trial))


def _run_chunk(args: tuple) -> tuple[NDArray[np.float64], NDArray[np.intp]]:
    spec, seed, start, count, statistic, beta, alpha = args
    X, Y = simulate_batch(spec, seed, count, start=start)
    if statistic == "core":
        return profile_max(X, Y, beta, alpha)
    if statistic == "wald":
        return sup_wald_batch(X, Y, beta, alpha)
    raise ValueError(f"unknown statistic {statistic!r}")


def trial_maxima(spec: ModelSpec, seed: int, trials: int, statistic: Statistic = "core",
                 beta: float = 0.05, alpha: float = 0.95, workers: int = 1
                 ) -> tuple[NDArray[np.float64], NDArray[np.intp]]:
    """Window maxima of the chosen statistic and their locations, one per trial."""
    size = _chunk_size(spec)
    jobs = [(spec, seed, s, min(size, trials - s), statistic, beta, alpha)
            for s in range(0, trials, size)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(j) for j in jobs]
    values = np.concatenate([p[0] for p in parts])
    where = np.concatenate([p[1] for p in parts])
    return values, where
