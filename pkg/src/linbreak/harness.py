"""Seeded Monte Carlo experiments and the bundled simulation tables.

An experiment simulates ``trials`` samples from a :class:`ModelSpec`, runs a
detector on each and aggregates:

* single-change mode: ``w_hat`` is the non-detection frequency and
  ``theta_hat_mean`` averages the argmax location over detecting trials;
* multiple-change mode: ``w_hat`` is the frequency of a wrong change-point
  count and ``delta_rms`` is the root mean square of
  ``sqrt(sum_i (theta_hat_i - theta_i)^2)`` over trials with the right count.

Statistics without qualifying trials are reported as ``None`` (an empty CSV
cell), never as zero.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np

from .calibrate import PerLengthThreshold, mc_quantiles, mc_threshold
from .detect import DetectionConfig, detect_multiple
from .model import ModelSpec, Sample, simulate_batch
from .montecarlo import Statistic, trial_maxima
from .scenarios import ar1_spec, eq16_spec, ses_spec

Mode = Literal["single", "multiple"]

PAPER_TRIALS = 2000


class UnknownTableError(KeyError):
    """Requested table id is not bundled."""


# ---------------------------------------------------------------------------
# configuration and reports

def threshold_to_dict(threshold: Any) -> Any:
    if isinstance(threshold, PerLengthThreshold):
        return threshold.to_dict()
    if callable(threshold):
        raise TypeError("only fixed or per-length thresholds can be serialized")
    return float(threshold)


def threshold_from_dict(obj: Any, spec: ModelSpec | None = None, statistic: Statistic = "core",
                        beta: float = 0.05, alpha: float = 0.95, workers: int = 1) -> Any:
    """Fixed value, ``{"lengths", "values"}`` table, or ``{"calibrate": {...}}``.

    The calibrate form simulates the stationary version of ``spec`` and takes
    the empirical quantile (keys ``level``, ``trials``, ``seed``).
    """
    if isinstance(obj, (int, float)):
        return float(obj)
    if "lengths" in obj:
        return PerLengthThreshold(tuple(obj["lengths"]), tuple(obj["values"]))
    if "calibrate" in obj:
        if spec is None:
            raise ValueError("calibrated thresholds need a model spec")
        opts = obj["calibrate"]
        est = mc_threshold(spec.stationary(), opts.get("level", 0.95),
                           opts.get("trials", PAPER_TRIALS), beta, alpha,
                           opts.get("seed", 0), statistic, workers)
        return est.value
    raise ValueError(f"unrecognised threshold {obj!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo cell: model, detector settings and trial budget."""

    spec: ModelSpec
    detection: DetectionConfig
    method: Statistic = "core"
    trials: int = PAPER_TRIALS
    seed: int = 0
    mode: Mode = "single"
    workers: int = 1
    outputs: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.method not in ("core", "wald"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.mode not in ("single", "multiple"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "multiple" and self.method != "core":
            raise ValueError("multiple change-point search is only defined for the core statistic")

    def to_dict(self) -> dict[str, Any]:
        det = self.detection
        return {
            "spec": self.spec.to_dict(),
            "detection": {"threshold": threshold_to_dict(det.threshold), "beta": det.beta,
                          "alpha": det.alpha, "epsilon": det.epsilon},
            "method": self.method, "trials": self.trials, "seed": self.seed,
            "mode": self.mode, "workers": self.workers, "outputs": dict(self.outputs),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ExperimentConfig:
        spec = ModelSpec.from_dict(d["spec"])
        det = dict(d["detection"])
        method = d.get("method", "core")
        beta, alpha = det.get("beta", 0.05), det.get("alpha", 0.95)
        threshold = threshold_from_dict(det["threshold"], spec, method, beta, alpha,
                                        d.get("workers", 1))
        detection = DetectionConfig(threshold, beta, alpha, det.get("epsilon", 0.04))
        return cls(spec, detection, method, int(d.get("trials", PAPER_TRIALS)),
                   int(d.get("seed", 0)), d.get("mode", "single"), int(d.get("workers", 1)),
                   dict(d.get("outputs", {})))

    @classmethod
    def from_json(cls, text: str) -> ExperimentConfig:
        return cls.from_dict(json.loads(text))


@dataclass
class ExperimentReport:
    threshold_used: float
    w_hat: float
    w_hat_stderr: float
    theta_hat_mean: list[float] | None
    theta_hat_stderr: list[float] | None
    delta_rms: float | None
    delta_stderr: float | None
    trials_used: int
    qualifying: int
    mean_max: float
    count_frequencies: dict[int, float] = field(default_factory=dict)
    per_trial_records: list[dict[str, Any]] | None = None

    def to_dict(self, records: bool = False) -> dict[str, Any]:
        d = {k: v for k, v in self.__dict__.items() if k != "per_trial_records"}
        d["count_frequencies"] = {str(k): v for k, v in self.count_frequencies.items()}
        if records:
            d["per_trial_records"] = self.per_trial_records
        return d

    def to_json(self, records: bool = False) -> str:
        return json.dumps(self.to_dict(records), indent=2)

    def to_csv(self) -> str:
        row = {
            "threshold": self.threshold_used, "w_hat": self.w_hat,
            "w_hat_stderr": self.w_hat_stderr,
            "theta_hat": _join(self.theta_hat_mean), "theta_hat_stderr": _join(self.theta_hat_stderr),
            "delta": self.delta_rms, "delta_stderr": self.delta_stderr,
            "trials": self.trials_used, "qualifying": self.qualifying, "mean_max": self.mean_max,
        }
        return _write_csv(list(row), [row])


def _join(values: Sequence[float] | None) -> str | None:
    if values is None:
        return None
    return ";".join(_fmt(v) for v in values)


# ---------------------------------------------------------------------------
# running

def _true_thetas(spec: ModelSpec) -> list[float]:
    return list(spec.coeffs.thetas[:-1])


def _binomial_stderr(p: float, n: int) -> float:
    return math.sqrt(p * (1 - p) / n)


def _mean_and_stderr(x: np.ndarray) -> tuple[float, float]:
    if x.size == 0:
        return math.nan, math.nan
    se = float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size > 1 else math.nan
    return float(np.mean(x)), se


def _multi_chunk(args: tuple) -> list[tuple[list[int], float]]:
    spec, seed, start, count, detection = args
    X, Y = simulate_batch(spec, seed, count, start=start)
    out = []
    for k in range(count):
        res = detect_multiple(Sample(X[k], Y[k]), detection)
        top = res.segment_max_stats[0] if res.segment_max_stats else math.nan
        out.append((res.estimates, top))
    return out


def _multi_runs(config: ExperimentConfig) -> list[tuple[list[int], float]]:
    size = 100
    jobs = [(config.spec, config.seed, s, min(size, config.trials - s), config.detection)
            for s in range(0, config.trials, size)]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            parts = list(pool.map(_multi_chunk, jobs))
    else:
        parts = [_multi_chunk(j) for j in jobs]
    return [r for p in parts for r in p]


def _none_if_nan(x: float) -> float | None:
    return None if math.isnan(x) else x


def run_experiment(config: ExperimentConfig, keep_records: bool = False) -> ExperimentReport:
    """Simulate, detect and aggregate one experiment cell."""
    spec, det = config.spec, config.detection
    N = spec.N
    C = det.threshold_for(N)
    truth = _true_thetas(spec)
    if config.mode == "single":
        maxima, where = trial_maxima(spec, config.seed, config.trials, config.method,
                                     det.beta, det.alpha, config.workers)
        detected = maxima > C
        w = 1.0 - float(np.mean(detected))
        th = where[detected] / N
        m, se = _mean_and_stderr(th)
        delta = delta_se = math.nan
        if truth and th.size:
            sq = (th - truth[0]) ** 2
            delta, delta_se = _rms_and_stderr(sq)
        counts = {0: w, 1: 1.0 - w}
        records = None
        if keep_records:
            records = [{"trial": i, "max": float(maxima[i]), "argmax": int(where[i]),
                        "detected": bool(detected[i])} for i in range(config.trials)]
        return ExperimentReport(
            C, w, _binomial_stderr(w, config.trials),
            None if th.size == 0 else [m], None if th.size == 0 else [_safe(se)],
            _none_if_nan(delta), _none_if_nan(delta_se), config.trials, int(th.size),
            float(np.mean(maxima)), counts, records)

    runs = _multi_runs(config)
    k_true = len(truth)
    ks = np.array([len(e) for e, _ in runs])
    w = float(np.mean(ks != k_true))
    good = [np.asarray(e, dtype=float) / N for e, _ in runs if len(e) == k_true]
    theta_mean = theta_se = None
    delta = delta_se = math.nan
    if good and k_true:
        G = np.stack(good)
        theta_mean = [float(v) for v in G.mean(axis=0)]
        theta_se = [_safe(float(np.std(G[:, j], ddof=1) / math.sqrt(len(G))))
                    if len(G) > 1 else None for j in range(k_true)]
        delta, delta_se = _rms_and_stderr(np.sum((G - np.asarray(truth)) ** 2, axis=1))
    values, freq = np.unique(ks, return_counts=True)
    counts = {int(v): float(f) / len(ks) for v, f in zip(values, freq)}
    records = None
    if keep_records:
        records = [{"trial": i, "estimates": e, "first_max": t} for i, (e, t) in enumerate(runs)]
    return ExperimentReport(
        C, w, _binomial_stderr(w, config.trials), theta_mean, theta_se,
        _none_if_nan(delta), _none_if_nan(delta_se), config.trials, len(good),
        float(np.nanmean([t for _, t in runs])), counts, records)


def _safe(x: float) -> float | None:
    return None if x is None or math.isnan(x) else x


def _rms_and_stderr(sq: np.ndarray) -> tuple[float, float]:
    # delta-method stderr of sqrt(mean(sq))
    rms = math.sqrt(float(np.mean(sq)))
    if sq.size < 2 or rms == 0:
        return rms, math.nan
    return rms, float(np.std(sq, ddof=1) / math.sqrt(sq.size) / (2 * rms))


# ---------------------------------------------------------------------------
# bundled tables

THRESHOLD_NS = (100, 200, 300, 400, 500, 700, 1000, 1200)
SHIFT_NS = (300, 400, 500, 700, 1000)
AR_NS = (500, 700, 1000, 1200)
SYSTEM_NS = (200, 400, 500, 700, 900, 1000, 1200, 1500)
SYSTEM_CAL_LENGTHS = (30, 50, 75, 100, 150, 200, 300, 400, 500, 700, 900, 1000, 1200, 1500)
SYSTEM_LEVEL = 0.95
TABLE_IDS = tuple(f"T{i}" for i in range(1, 10))


def _fmt(x: Any) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    if math.isnan(x):
        return ""
    return f"{x:.6g}"


def _write_csv(columns: list[str], rows: list[dict[str, Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def cell_seed(seed: int, table: int, cell: int) -> int:
    """Independent 32-bit seed for one table cell."""
    return int(np.random.SeedSequence([int(seed), table, cell]).generate_state(1)[0])


def scaled_trials(scale: float) -> int:
    if not 0 < scale <= 1:
        raise ValueError("scale must lie in (0, 1]")
    return max(100, round(PAPER_TRIALS * scale))


def _quantile_table(make: Callable[[int], ModelSpec], Ns: Sequence[int], tid: int,
                    statistic: Statistic, trials: int, seed: int, workers: int) -> str:
    rows = []
    for i, N in enumerate(Ns):
        q95, q99 = mc_quantiles(make(N), (0.95, 0.99), trials, seed=cell_seed(seed, tid, i),
                                statistic=statistic, workers=workers)
        rows.append({"N": N, "p95": q95.value, "p95_stderr": q95.stderr,
                     "p99": q99.value, "p99_stderr": q99.stderr})
    return _write_csv(["N", "p95", "p95_stderr", "p99", "p99_stderr"], rows)


_SHIFT_COLUMNS = ["N", "C", "w_hat", "w_hat_stderr", "theta_hat", "theta_hat_stderr"]


def _shift_row(spec: ModelSpec, C: float, statistic: Statistic, trials: int, seed: int,
               workers: int) -> dict[str, Any]:
    rep = run_experiment(ExperimentConfig(spec, DetectionConfig(C), statistic, trials, seed,
                                          workers=workers))
    return {"N": spec.N, "C": C, "w_hat": rep.w_hat, "w_hat_stderr": rep.w_hat_stderr,
            "theta_hat": rep.theta_hat_mean[0] if rep.theta_hat_mean else None,
            "theta_hat_stderr": rep.theta_hat_stderr[0] if rep.theta_hat_stderr else None}


def _shift_table(tid: int, statistic: Statistic, theta: float, trials: int, seed: int,
                 workers: int) -> str:
    # thresholds are the 95% null quantiles at each N, shared across shift sizes
    thresholds = {N: mc_threshold(eq16_spec(N), 0.95, trials, seed=cell_seed(seed, tid, 100 + i),
                                  statistic=statistic, workers=workers).value
                  for i, N in enumerate(SHIFT_NS)}
    rows = []
    for j, delta in enumerate((0.3, 0.4)):
        for i, N in enumerate(SHIFT_NS):
            row = _shift_row(eq16_spec(N, delta, theta), thresholds[N], statistic, trials,
                             cell_seed(seed, tid, 10 * j + i), workers)
            rows.append({"delta": delta, **row})
    return _write_csv(["delta", *_SHIFT_COLUMNS], rows)


def _ar_table(trials: int, seed: int, workers: int) -> str:
    thresholds = {N: mc_threshold(ar1_spec(N), 0.95, trials, seed=cell_seed(seed, 7, 100 + i),
                                  workers=workers).value
                  for i, N in enumerate(AR_NS)}
    rows = []
    for j, theta in enumerate((0.5, 0.3)):
        for i, N in enumerate(AR_NS):
            row = _shift_row(ar1_spec(N, theta), thresholds[N], "core", trials,
                             cell_seed(seed, 7, 10 * j + i), workers)
            rows.append({"theta": theta, **row})
    return _write_csv(["theta", *_SHIFT_COLUMNS], rows)


def system_thresholds(trials: int, seed: int, workers: int = 1, level: float = SYSTEM_LEVEL,
                      lengths: Sequence[int] = SYSTEM_CAL_LENGTHS) -> PerLengthThreshold:
    """Null quantiles of the multivariate system at the sub-sample lengths the search visits."""
    return PerLengthThreshold.from_mc(ses_spec(max(lengths), changes=False), lengths, level,
                                      trials, seed=cell_seed(seed, 9, 100), workers=workers)


def _system_table(trials: int, seed: int, workers: int) -> str:
    thr = system_thresholds(trials, seed, workers)
    rows = []
    for i, N in enumerate(SYSTEM_NS):
        cfg = ExperimentConfig(ses_spec(N), DetectionConfig(thr), "core", trials,
                               cell_seed(seed, 9, i), "multiple", workers)
        rep = run_experiment(cfg)
        rows.append({"N": N, "C": rep.threshold_used, "w": rep.w_hat, "w_stderr": rep.w_hat_stderr,
                     "delta": rep.delta_rms, "delta_stderr": rep.delta_stderr})
    return _write_csv(["N", "C", "w", "w_stderr", "delta", "delta_stderr"], rows)


def reproduce_table(table_id: str, scale: float = 1.0, seed: int = 0, workers: int = 1) -> str:
    """CSV for one of the bundled simulation tables ``T1`` .. ``T9``.

    ``scale`` multiplies the 2000-trial budget (never below 100 trials).
    Threshold tables (T1, T3, T6, T8) carry 95% and 99% quantiles with
    binomial-interval standard errors; shift tables (T2, T4, T5, T7) use the
    95% null quantile at each N as the threshold and report non-detection
    frequency; T9 reports the wrong-count frequency and the conditional
    location error of the two-change multivariate system.
    """
    tid = table_id.upper()
    if tid not in TABLE_IDS:
        raise UnknownTableError(table_id)
    trials = scaled_trials(scale)
    if tid == "T1":
        return _quantile_table(eq16_spec, THRESHOLD_NS, 1, "wald", trials, seed, workers)
    if tid == "T3":
        return _quantile_table(eq16_spec, THRESHOLD_NS, 3, "core", trials, seed, workers)
    if tid == "T6":
        return _quantile_table(ar1_spec, THRESHOLD_NS, 6, "core", trials, seed, workers)
    if tid == "T8":
        return _quantile_table(lambda N: ses_spec(N, changes=False), SYSTEM_NS, 8, "core",
                               trials, seed, workers)
    if tid == "T2":
        return _shift_table(2, "wald", 0.3, trials, seed, workers)
    if tid == "T4":
        return _shift_table(4, "core", 0.3, trials, seed, workers)
    if tid == "T5":
        return _shift_table(5, "core", 0.5, trials, seed, workers)
    if tid == "T7":
        return _ar_table(trials, seed, workers)
    return _system_table(trials, seed, workers)
