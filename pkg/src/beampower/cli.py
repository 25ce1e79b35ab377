"""Batch experiment runner.

Subcommands: train, eval, sweep, ablate-grid, timing, dump-realization.
Outputs are CSV files (plus the binary model format); configs are the flat
key-value files of `config.py`, with --seed overriding the config seed
everywhere. Nonzero exit codes carry line-precise messages on stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .agent import train
from .baselines import SearchBudgetExceeded
from .channel import dump_realization, sample_realization
from .config import ConfigError, ExperimentConfig, load_experiment
from .evaluate import (POLICIES, POLICY_DQN, POLICY_ES, evaluate_policies,
                       grid_from_model, measure_latency, run_sweep,
                       train_for_scenario)
from .mlp import ModelFormatError, load_model, save_model
from .reporting import write_csv


def _progress_printer(label: str, quiet: bool):
    if quiet:
        return None

    def progress(done, total):
        if done % max(total // 10, 1) < 1000 or done == total:
            print(f"{label}: episode {done}/{total}", file=sys.stderr)
    return progress


def _history_rows(history):
    for i in range(history.episode.size):
        yield (int(history.episode[i]), float(history.epsilon[i]),
               float(history.reward[i]), float(history.running_mean[i]),
               float(history.loss[i]))


HISTORY_COLUMNS = ["episode", "epsilon", "reward", "running_mean", "loss"]


def cmd_train(args) -> int:
    exp = load_experiment(args.config, seed=args.seed)
    grid = exp.grid_spec.build(exp.radio)
    model, history = train(exp.scenario, exp.radio, grid, exp.train,
                           pad_db=exp.pad_db,
                           progress=_progress_printer("train", args.quiet))
    model_path = args.model_out or os.path.join(exp.out_dir, "model.bin")
    history_path = args.history_out or os.path.join(exp.out_dir, "history.csv")
    parent = os.path.dirname(model_path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    save_model(model, model_path)
    write_csv(history_path, HISTORY_COLUMNS, _history_rows(history), exp.hash)
    print(f"wrote {model_path} and {history_path}")
    return 0


def _write_eval_report(prefix: str, report, exp: ExperimentConfig) -> None:
    trial_rows = ([k] + [float(v) for v in report.values[k]] for k in range(report.trials))
    write_csv(f"{prefix}_trials.csv", ["trial"] + report.policies, trial_rows, exp.hash)

    es_mean = report.mean(POLICY_ES) if POLICY_ES in report.policies else None
    columns = ["policy", "mean_bits_per_slot", "stderr_bits_per_slot", "trials"]
    if es_mean is not None:
        columns.append("percent_of_es")
    rows = []
    for p in report.policies:
        row = [p, report.mean(p), report.stderr(p), report.trials]
        if es_mean is not None:
            row.append(100.0 * report.mean(p) / es_mean)
        rows.append(row)
    write_csv(f"{prefix}_summary.csv", columns, rows, exp.hash)

    timing_rows = [(p, report.trials, report.decision_ms[p][0], report.decision_ms[p][1])
                   for p in report.policies]
    write_csv(f"{prefix}_timing.csv",
              ["policy", "samples", "mean_decision_ms", "median_decision_ms"],
              timing_rows, exp.hash)


def _parse_policies(text: str) -> list[str]:
    policies = [p.strip() for p in text.split(",") if p.strip()]
    for p in policies:
        if p not in POLICIES:
            raise ConfigError(f"unknown policy {p!r}; choose from {', '.join(POLICIES)}")
    if not policies:
        raise ConfigError("empty policy list")
    return policies


def cmd_eval(args) -> int:
    exp = load_experiment(args.config, seed=args.seed)
    policies = _parse_policies(args.policies)
    model = None
    if POLICY_DQN in policies:
        if not args.model:
            raise ConfigError("--model is required when evaluating the dqn policy")
        model, _ = load_model(args.model)
    trials = args.trials if args.trials is not None else exp.trials
    report = evaluate_policies(exp, policies, model=model, trials=trials,
                               workers=args.workers)
    prefix = args.out_prefix or os.path.join(exp.out_dir, "eval")
    _write_eval_report(prefix, report, exp)
    print(f"wrote {prefix}_trials.csv, {prefix}_summary.csv, {prefix}_timing.csv")
    return 0


def cmd_sweep(args) -> int:
    exp = load_experiment(args.config, seed=args.seed)
    policies = _parse_policies(args.policies)
    if args.axis == "n_links":
        values = [int(v) for v in args.values.split(",")]
    else:
        values = [float(v) for v in args.values.split(",")]
    reuse = None
    if args.reuse_model:
        reuse, _ = load_model(args.reuse_model)
    results = run_sweep(exp, args.axis, values, policies, reuse_model=reuse,
                        trials=args.trials,
                        progress=_progress_printer("sweep train", args.quiet))
    rows = []
    for value, report in results:
        for p in report.policies:
            rows.append([args.axis, value, p, report.mean(p), report.stderr(p),
                         report.trials])
    out = args.out or os.path.join(exp.out_dir, "sweep.csv")
    write_csv(out, ["axis", "value", "policy", "mean_bits_per_slot",
                    "stderr_bits_per_slot", "trials"], rows, exp.hash)
    print(f"wrote {out}")
    return 0


def cmd_ablate_grid(args) -> int:
    exp = load_experiment(args.config, seed=args.seed)
    curves = {}
    for scheme in ("reciprocal-square", "uniform"):
        spec = replace(exp.grid_spec, scheme=scheme)
        grid = spec.build(exp.radio)
        _, history = train(exp.scenario, exp.radio, grid, exp.train,
                           pad_db=exp.pad_db,
                           progress=_progress_printer(scheme, args.quiet))
        curves[scheme] = history
    rs, un = curves["reciprocal-square"], curves["uniform"]
    rows = ((int(rs.episode[i]), float(rs.epsilon[i]),
             float(rs.reward[i]), float(rs.running_mean[i]),
             float(un.reward[i]), float(un.running_mean[i]))
            for i in range(rs.episode.size))
    out = args.out or os.path.join(exp.out_dir, "ablate_grid.csv")
    write_csv(out, ["episode", "epsilon",
                    "reward_reciprocal_square", "running_mean_reciprocal_square",
                    "reward_uniform", "running_mean_uniform"], rows, exp.hash)
    print(f"wrote {out}")
    return 0


def cmd_timing(args) -> int:
    exp = load_experiment(args.config, seed=args.seed)
    model, _ = load_model(args.model)
    rows = measure_latency(exp, model, n_links_list=(4, 10), samples=args.samples)
    out = args.out or os.path.join(exp.out_dir, "timing.csv")
    write_csv(out, ["policy", "n_links", "samples", "mean_decision_ms",
                    "median_decision_ms"], rows, exp.hash)
    for policy, n, samples, mean_ms, median_ms in rows:
        print(f"{policy} n={n}: mean {mean_ms:.3f} ms, median {median_ms:.3f} ms "
              f"({samples} samples)")
    return 0


def cmd_dump_realization(args) -> int:
    exp = load_experiment(args.config, seed=args.seed)
    real = sample_realization(exp.scenario, np.random.default_rng(exp.seed))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            dump_realization(real, fh)
        print(f"wrote {args.out}")
    else:
        dump_realization(real, sys.stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beampower",
        description="Joint beamwidth and power optimization experiments")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="config file (defaults used when omitted)")
        p.add_argument("--seed", type=int, help="override the config seed everywhere")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")

    p = sub.add_parser("train", help="train a model, write model file + history CSV")
    common(p)
    p.add_argument("--model-out", help="model file path")
    p.add_argument("--history-out", help="history CSV path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate policies on common random drops")
    common(p)
    p.add_argument("--model", help="model file for the dqn policy")
    p.add_argument("--policies", default="dqn,random,underest",
                   help="comma list from: " + ",".join(POLICIES))
    p.add_argument("--trials", type=int, help="override eval.trials")
    p.add_argument("--workers", type=int, help="parallel trial workers")
    p.add_argument("--out-prefix", help="prefix for _trials/_summary/_timing CSVs")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="evaluate along a geometry axis")
    common(p)
    p.add_argument("--axis", required=True, choices=("n_links", "side_len"))
    p.add_argument("--values", required=True, help="comma list of axis values")
    p.add_argument("--policies", default="dqn,underest")
    p.add_argument("--trials", type=int, help="override eval.trials")
    p.add_argument("--reuse-model",
                   help="evaluate this one model at every axis value instead of retraining")
    p.add_argument("--out", help="output CSV path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("ablate-grid",
                       help="train both discretization schemes with identical seeds")
    common(p)
    p.add_argument("--out", help="output CSV path")
    p.set_defaults(func=cmd_ablate_grid)

    p = sub.add_parser("timing", help="per-decision latency report")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--out", help="output CSV path")
    p.set_defaults(func=cmd_timing)

    p = sub.add_parser("dump-realization",
                       help="write one drop in the textual exchange format")
    common(p)
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.set_defaults(func=cmd_dump_realization)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SearchBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ModelFormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
