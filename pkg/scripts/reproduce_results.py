#!/usr/bin/env python3
"""End-to-end experiment: train attackers, evaluate both attack-cycle
scenarios, and emit the summary table plus detector/trajectory plots.

Writes everything under results/ (checkpoints, reward curves, traces, SVGs,
and summary.txt). PPO takes ~10 s per seed on a laptop CPU; SAC is heavier
(per-step updates), so it runs one seed unless --sac-seeds asks for more.
"""

import argparse
import dataclasses
import json
import time
from pathlib import Path

import numpy as np

from avlab.cli import run_episode
from avlab.config import load_config, with_scenario, without_schedule
from avlab.environment import AttackEnv
from avlab.metrics import build_report, export_plot, export_trace
from avlab.rl.checkpoint import save_checkpoint
from avlab.rl.train import train


def evaluate(run, policy, seeds):
    traces = [run_episode(AttackEnv(run.env), policy, seed=s) for s in seeds]
    return build_report(traces, seeds), traces


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=None, help="TOML config (defaults built in)")
    ap.add_argument("--out", default="results", help="output directory")
    ap.add_argument("--ppo-seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--sac-seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--eval-episodes", type=int, default=10)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    run = load_config(args.config)
    eval_seeds = list(range(10_000, 10_000 + args.eval_episodes))

    baseline_traces = [
        run_episode(AttackEnv(without_schedule(run).env), None, seed=s) for s in eval_seeds
    ]
    baseline_cost = float(np.mean([r.j_t for t in baseline_traces for r in t]))
    baseline_flags = float(np.mean([r.detected for t in baseline_traces for r in t]))

    rows = []
    for algo, seeds in (("ppo", args.ppo_seeds), ("sac", args.sac_seeds)):
        trainer = run.ppo if algo == "ppo" else run.sac
        for seed in seeds:
            t0 = time.time()
            result = train(AttackEnv(run.env), algo, trainer, seed=seed)
            elapsed = time.time() - t0
            ckpt = out / f"{algo}_seed{seed}.ckpt"
            save_checkpoint(ckpt, result.best_policy, algo, seed, run.config_hash)
            np.savetxt(
                out / f"{algo}_seed{seed}_curve.csv",
                np.column_stack([np.arange(len(result.reward_curve)), result.reward_curve]),
                delimiter=",", header="episode,reward", comments="",
            )
            for scen in ("long", "short"):
                rep, traces = evaluate(
                    with_scenario(run, scen), result.best_policy, eval_seeds
                )
                rows.append({
                    "algo": algo, "seed": seed, "scenario": scen,
                    "recall": rep.recall, "energy": rep.energy,
                    "tracking_error": rep.tracking_error,
                    "tracking_ratio": rep.tracking_error / baseline_cost,
                    "train_seconds": round(elapsed, 1),
                })
                if seed == seeds[0]:
                    export_trace(traces[0], out / f"{algo}_{scen}_trace.csv")
                    export_plot(traces[0], out / f"{algo}_{scen}.svg")
            print(f"{algo} seed {seed}: trained in {elapsed:.0f}s")

    lines = [
        f"config_hash: {run.config_hash}",
        f"no-attack baseline: tracking cost {baseline_cost:.5f}, "
        f"detector flag rate {baseline_flags:.4f}",
        "",
        f"{'algo':<5} {'seed':>4} {'scenario':<8} {'recall':>8} {'energy':>10} "
        f"{'tracking':>10} {'ratio':>8}",
    ]
    for r in rows:
        lines.append(
            f"{r['algo']:<5} {r['seed']:>4} {r['scenario']:<8} {r['recall']:>8.4f} "
            f"{r['energy']:>10.4f} {r['tracking_error']:>10.3f} {r['tracking_ratio']:>8.0f}"
        )
    summary = "\n".join(lines) + "\n"
    (out / "summary.txt").write_text(summary)
    (out / "summary.json").write_text(json.dumps(rows, indent=2))
    print(summary)


if __name__ == "__main__":
    main()
