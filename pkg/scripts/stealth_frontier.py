#!/usr/bin/env python3
"""Sweep constant injections and print the stealth/damage frontier.

Useful for sanity-checking a config before training: shows how detector
recall, per-step tracking damage, and the attacker objective vary with
injection amplitude, next to the no-attack calibration rate.
"""

import argparse

import numpy as np

from avlab.config import load_config, without_schedule
from avlab.cli import run_episode
from avlab.dynamics import AttackSignal
from avlab.environment import AttackEnv


def sweep_point(env_cfg, amp, episodes, seed0):
    recs, jts, objs = [], [], []
    for i in range(episodes):
        env = AttackEnv(env_cfg)
        env.reset(seed=seed0 + i)
        done = False
        while not done:
            done = env.step(AttackSignal(*amp)).done
        rows = [r for r in env.trace if r.attack_active]
        recs.append(np.mean([r.detected for r in rows]))
        jts.append(np.mean([r.j_t for r in rows]))
        objs.append(np.mean([r.j_t - r.j_e + r.j_s for r in rows]))
    return np.mean(recs), np.mean(jts), np.mean(objs)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=None)
    ap.add_argument("--episodes", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    run = load_config(args.config)
    base = without_schedule(run)
    flags = []
    for i in range(args.episodes):
        trace = run_episode(AttackEnv(base.env), None, seed=args.seed + i)
        flags += [r.detected for r in trace]
    print(f"no-attack flag rate: {np.mean(flags):.4f} "
          f"(configured {run.env.detector.false_alarm_rate})")

    print(f"{'v_d':>5} {'phi_d':>6} {'recall':>8} {'mean j_t':>9} {'objective':>10}")
    for amp in [(0.1, 0.03), (0.2, 0.07), (0.3, 0.1), (0.5, 0.2), (0.8, 0.3), (1.0, 0.5)]:
        rec, jt, obj = sweep_point(run.env, amp, args.episodes, args.seed + 100)
        print(f"{amp[0]:>5.2f} {amp[1]:>6.2f} {rec:>8.4f} {jt:>9.3f} {obj:>10.3f}")


if __name__ == "__main__":
    main()
