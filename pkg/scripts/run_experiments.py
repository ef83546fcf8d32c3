"""Desk-scale experiments on the shipped suite.

Prints three tables and writes the per-task reports behind them:

* one-shot planning vs the stepwise baseline (queries and simulated latency),
* ablations (full, no validator, no transition rules, no HTML request) under
  the prompt-reading and noisy mock backends, averaged over seeds,
* TCR by number of required actions for the noisy backend with and without
  the validator.

Usage: python scripts/run_experiments.py [--seeds 5] [--noise 0.1] [--out results/]
"""

from __future__ import annotations

import argparse
import statistics
from pathlib import Path

from graphpilot import suite_dir
from graphpilot.harness import BenchConfig, load_suite, reduction, report_emit, run_bench, run_stepwise_baseline

ABLATIONS = {
    "full": {},
    "no-validator": {"no_validator": True},
    "no-transition-rules": {"no_transition_rules": True},
    "no-html-request": {"no_html_request": True},
}


def contrast(apps, tasks, out: Path):
    one = run_bench(apps, tasks, BenchConfig(backend="oracle"))
    step = run_stepwise_baseline(apps, tasks, BenchConfig(backend="oracle"))
    (out / "oracle_one_shot.csv").write_text(report_emit(one))
    (out / "oracle_stepwise.csv").write_text(report_emit(step))
    print("mode        TCR%   queries/task  latency/task(s)")
    for r in (one, step):
        print(f"{r.mode:<10} {r.tcr:6.1f}   {r.mean_queries:11.2f}  {r.mean_latency:15.3f}")
    print(f"query reduction {reduction(step.mean_queries, one.mean_queries):.1f}%, "
          f"latency reduction {reduction(step.mean_latency, one.mean_latency):.1f}%\n")


def ablations(apps, tasks, seeds: int, noise: float, out: Path):
    print(f"backend  {'setting':<20} TCR% mean (min-max) over {seeds} seeds")
    for backend in ("reader", "noisy"):
        for name, flags in ABLATIONS.items():
            tcrs = []
            for seed in range(seeds):
                r = run_bench(apps, tasks, BenchConfig(backend=backend, seed=seed, noise=noise, **flags))
                tcrs.append(r.tcr)
                if seed == 0:
                    (out / f"{backend}_{name}.csv").write_text(report_emit(r))
            print(f"{backend:<8} {name:<20} {statistics.mean(tcrs):5.1f} ({min(tcrs):.1f}-{max(tcrs):.1f})")
    print()


def by_action_count(apps, tasks, noise: float):
    full = run_bench(apps, tasks, BenchConfig(backend="noisy", noise=noise)).tcr_by_action_count()
    novl = run_bench(apps, tasks, BenchConfig(backend="noisy", noise=noise, no_validator=True)).tcr_by_action_count()
    print("actions  tasks  TCR% full  TCR% no-validator")
    for n in sorted(full):
        print(f"{n:7d}  {full[n]['tasks']:5d}  {full[n]['tcr']:9.1f}  {novl[n]['tcr']:17.1f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--suite", default=str(suite_dir()))
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--noise", type=float, default=0.1)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    apps, tasks = load_suite(args.suite)
    print(f"suite: {len(apps)} apps, {len(tasks)} tasks\n")
    contrast(apps, tasks, out)
    ablations(apps, tasks, args.seeds, args.noise, out)
    by_action_count(apps, tasks, args.noise)


if __name__ == "__main__":
    main()
