"""Command-line entry point: ``linbreak <subcommand> ...``.

Subcommands
-----------
simulate    spec JSON -> sample CSV
detect      sample CSV (+ threshold) -> detection result JSON
calibrate   spec JSON -> threshold JSON, optionally appending a CSV row
experiment  experiment config JSON -> report JSON/CSV
table       bundled simulation table -> CSV
bound       divergence case + parameters -> CSV of lower bounds
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import Any

import numpy as np

from .baseline import sup_wald
from .bounds import (kl_gaussian_regression, kl_gaussian_stochastic, kl_gaussian_trend,
                     lower_bound, theorem1_exponent)
from .calibrate import (LimitLawSpec, ThresholdEstimate, analytic_threshold, limit_threshold,
                        mc_threshold, plan_fmax)
from .detect import DetectionConfig, DetectionResult, TraceStep, detect_multiple
from .harness import (TABLE_IDS, ExperimentConfig, reproduce_table, run_experiment,
                      threshold_from_dict)
from .model import DeterministicPlan, ModelSpec, Sample, simulate


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _load_json(arg: str) -> Any:
    """A path to a JSON file, or an inline JSON document."""
    if arg.lstrip().startswith(("{", "[")):
        return json.loads(arg)
    return json.loads(Path(arg).read_text())


def _fn(expr: str):
    plan = DeterministicPlan((expr,))
    return lambda t: plan(t)[0]


# ---------------------------------------------------------------------------
# subcommands

def cmd_simulate(args: argparse.Namespace) -> int:
    spec = ModelSpec.from_dict(_load_json(args.spec))
    if args.N:
        spec = spec.with_N(args.N)
    _emit(simulate(spec, args.seed, args.trial).to_csv(), args.out)
    return 0


def _threshold_arg(args: argparse.Namespace) -> Any:
    if args.threshold is None:
        raise SystemExit("detect: --threshold is required (a number or a per-length JSON table)")
    try:
        return float(args.threshold)
    except ValueError:
        return threshold_from_dict(_load_json(args.threshold))


def cmd_detect(args: argparse.Namespace) -> int:
    sample = Sample.from_csv(Path(args.sample).read_text())
    config = DetectionConfig(_threshold_arg(args), args.beta, args.alpha, args.epsilon)
    if args.method == "core":
        result = detect_multiple(sample, config)
    else:
        res = sup_wald(sample.X, sample.Y, args.beta, args.alpha)
        c = config.threshold_for(sample.N)
        hit = res.sup_w > c
        result = DetectionResult(sample.N, [res.n0] if hit else [], [res.sup_w],
                                 [TraceStep(1, sample.N, c, res.sup_w, res.n0, hit)])
    _emit(result.to_json(), args.out)
    return 0


def _append_row(path: str, est: ThresholdEstimate) -> None:
    p = Path(path)
    new = not p.exists() or p.stat().st_size == 0
    with p.open("a", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if new:
            w.writerow(["N", "level", "value", "stderr", "method"])
        w.writerow(["" if est.N is None else est.N, f"{est.level:.6g}", f"{est.value:.6g}",
                    f"{est.stderr:.6g}", est.method])


def cmd_calibrate(args: argparse.Namespace) -> int:
    spec = ModelSpec.from_dict(_load_json(args.spec))
    if args.N:
        spec = spec.with_N(args.N)
    if args.method == "mc":
        est = mc_threshold(spec.stationary(), args.level, args.trials, args.beta, args.alpha,
                           args.seed, args.statistic, args.workers)
    elif args.method == "analytic":
        if args.lam is None:
            raise SystemExit("calibrate --method analytic needs --lam")
        if not isinstance(spec.plan, DeterministicPlan):
            raise SystemExit("the analytic rule needs a deterministic plan")
        value = analytic_threshold(spec.N, args.lam, max(spec.noise.std), plan_fmax(spec.plan))
        est = ThresholdEstimate(args.level, value, "analytic", N=spec.N)
    else:
        if not isinstance(spec.plan, DeterministicPlan) or spec.M != 1:
            raise SystemExit("the limit law needs a deterministic plan and a scalar response")
        s = spec.noise.std[0]
        law = LimitLawSpec(spec.plan, lambda t: np.full_like(t, s))
        est = limit_threshold(law, args.level, mc_draws=max(args.trials, 1000), seed=args.seed)
        # the estimate stays in sqrt(N) units; rows and the extra field are C(N)
        scale = spec.N ** -0.5
        row = ThresholdEstimate(est.level, est.at(spec.N), "limit", est.trials,
                                est.stderr * scale, est.ci_low * scale, est.ci_high * scale, spec.N)
        if args.csv:
            _append_row(args.csv, row)
        _emit(json.dumps({**est.to_dict(), "value_at_N": row.value, "at_N": spec.N}, indent=2),
              args.out)
        return 0
    if args.csv:
        _append_row(args.csv, est)
    _emit(est.to_json(), args.out)
    return 0


def cmd_experiment(args: argparse.Namespace) -> int:
    raw = _load_json(args.config)
    if isinstance(raw.get("spec"), str):
        # a spec path is relative to the config file when the config is one
        inline = args.config.lstrip().startswith("{")
        base = Path.cwd() if inline else Path(args.config).parent
        ref = Path(raw["spec"])
        raw["spec"] = _load_json(str(ref if ref.is_absolute() else base / ref))
    if args.workers > 1:
        raw["workers"] = args.workers
    if args.seed is not None:
        raw["seed"] = args.seed
    config = ExperimentConfig.from_dict(raw)
    report = run_experiment(config, keep_records=args.records)
    outputs = config.outputs
    if outputs.get("csv"):
        Path(outputs["csv"]).write_text(report.to_csv())
    if outputs.get("json"):
        Path(outputs["json"]).write_text(report.to_json(args.records))
    _emit(report.to_csv() if args.format == "csv" else report.to_json(args.records), args.out)
    return 0


def cmd_table(args: argparse.Namespace) -> int:
    _emit(reproduce_table(args.id, args.scale, args.seed, args.workers), args.out)
    return 0


def _kl_from_params(case: str, p: dict[str, Any]):
    if case == "trend":
        return kl_gaussian_trend(_fn(p["phi0"]), _fn(p["phi1"]))
    if case == "regression":
        plan = DeterministicPlan(tuple(p["functions"]))
        return kl_gaussian_regression(plan, p["a"], p["b"], p.get("sigma", 1.0))
    return kl_gaussian_stochastic([_fn(e) for e in p["f"]], [_fn(e) for e in p["sigma"]],
                                  p["a"], p["b"])


def cmd_bound(args: argparse.Namespace) -> int:
    kl = _kl_from_params(args.case, _load_json(args.params))
    e = theorem1_exponent(kl, args.theta, args.eps)
    rows = [["N", "exponent", "lower_bound"]]
    rows += [[str(n), f"{e:.6g}", f"{lower_bound(e, n):.6g}"] for n in args.N]
    _emit("\n".join(",".join(r) for r in rows) + "\n", args.out)
    return 0


# ---------------------------------------------------------------------------
# parser

def _common(seed_default: int | None = 0) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=seed_default, help="base RNG seed")
    common.add_argument("--workers", type=int, default=1, help="worker processes for Monte Carlo")
    common.add_argument("--out", help="write the result here instead of stdout")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()

    window = argparse.ArgumentParser(add_help=False)
    window.add_argument("--beta", type=float, default=0.05)
    window.add_argument("--alpha", type=float, default=0.95)

    parser = argparse.ArgumentParser(prog="linbreak", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="simulate one sample from a spec")
    p.add_argument("spec", help="ModelSpec JSON file or inline JSON")
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--N", type=int, help="override the sample size")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("detect", parents=[common, window], help="detect change-points in a sample")
    p.add_argument("sample", help="sample CSV (t,x1..xK,y1..yM)")
    p.add_argument("--threshold", help="fixed C, or per-length JSON {lengths, values}")
    p.add_argument("--method", choices=("core", "wald"), default="core")
    p.add_argument("--epsilon", type=float, default=0.04)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("calibrate", parents=[common, window], help="estimate a decision threshold")
    p.add_argument("spec", help="ModelSpec JSON file or inline JSON")
    p.add_argument("--method", choices=("mc", "analytic", "limit"), default="mc")
    p.add_argument("--statistic", choices=("core", "wald"), default="core")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--lam", type=float, help="calibration constant for the analytic rule")
    p.add_argument("--N", type=int, help="override the sample size")
    p.add_argument("--csv", help="append (N, level, value, stderr, method) to this CSV")
    p.set_defaults(func=cmd_calibrate)

    # the config carries its own seed; --seed only overrides it when given
    p = sub.add_parser("experiment", parents=[_common(None)], help="run one Monte Carlo experiment")
    p.add_argument("config", help="ExperimentConfig JSON file or inline JSON")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--records", action="store_true", help="include per-trial records in JSON")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("table", parents=[common], help="reproduce a bundled simulation table")
    p.add_argument("--id", required=True, type=str.upper, choices=TABLE_IDS)
    p.add_argument("--scale", type=float, default=1.0, help="fraction of the 2000-trial budget")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("bound", parents=[common], help="information lower bound for one change")
    p.add_argument("--case", choices=("trend", "regression", "stochastic"), required=True)
    p.add_argument("--params", required=True, help="case parameters as JSON (file or inline)")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--N", type=int, nargs="+", required=True)
    p.set_defaults(func=cmd_bound)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
