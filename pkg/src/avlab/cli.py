"""Command-line entry point: train, eval, baseline, plot.

Exit codes: 0 success, 2 configuration/usage error, 3 training fault,
4 I/O failure. AVLAB_LOG in {error, info, debug} sets log verbosity.
Commands never mutate their input files, and every run is reproducible
from (config file, seed) alone.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from avlab import metrics
from avlab.config import RunConfig, load_config, with_scenario, without_schedule
from avlab.dynamics import AttackSignal, ZERO_ATTACK
from avlab.environment import AttackEnv
from avlab.errors import AvlabError, ConfigError, TrainingFault, UsageError
from avlab.metrics import EpisodeTrace
from avlab.rl.checkpoint import load_checkpoint, save_checkpoint
from avlab.rl.policy import GaussianPolicy
from avlab.rl.train import train

log = logging.getLogger("avlab")

_LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging() -> None:
    level = os.environ.get("AVLAB_LOG", "info").lower()
    if level not in _LOG_LEVELS:
        raise ConfigError(f"AVLAB_LOG must be one of {sorted(_LOG_LEVELS)}, got {level!r}")
    logging.basicConfig(level=_LOG_LEVELS[level], format="%(levelname)s %(name)s: %(message)s")


def _write_curve(path, curve) -> None:
    lines = ["episode,reward"]
    lines += [f"{i},{format(r, '.17g')}" for i, r in enumerate(curve)]
    Path(path).write_text("\n".join(lines) + "\n")


def run_episode(
    env: AttackEnv, policy: GaussianPolicy | None, seed: int, stochastic: bool = False
) -> EpisodeTrace:
    """One full episode; `policy=None` injects nothing (baseline)."""
    obs = env.reset(seed=seed)
    rng = np.random.default_rng(seed) if stochastic else None
    done = False
    while not done:
        if policy is None:
            action = ZERO_ATTACK
        elif stochastic:
            a, _, _ = policy.sample(obs[None, :], rng)
            action = AttackSignal(float(a[0, 0]), float(a[0, 1]))
        else:
            a = policy.mean_action(obs)
            action = AttackSignal(float(a[0]), float(a[1]))
        out = env.step(action)
        obs = out.observation
        done = out.done
    return env.trace


def _episode_worker(args) -> EpisodeTrace:
    run, checkpoint_path, seed, stochastic = args
    policy = load_checkpoint(checkpoint_path)[0] if checkpoint_path else None
    return run_episode(AttackEnv(run.env), policy, seed, stochastic)


def _run_episodes(run, checkpoint_path, seeds, stochastic=False, jobs=1) -> list[EpisodeTrace]:
    tasks = [(run, checkpoint_path, seed, stochastic) for seed in seeds]
    if jobs <= 1:
        return [_episode_worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_episode_worker, tasks))


def _baseline_tracking_cost(run: RunConfig, seeds) -> float:
    traces = _run_episodes(without_schedule(run), None, seeds)
    return float(np.mean([r.j_t for t in traces for r in t]))


def cmd_train(args) -> int:
    run = load_config(args.config)
    trainer = run.ppo if args.algo == "ppo" else run.sac
    log.info("config hash %s", run.config_hash)
    log.info("training %s for %d episodes (seed %d)", args.algo, trainer.episodes, args.seed)
    result = train(AttackEnv(run.env), args.algo, trainer, args.seed)
    save_checkpoint(args.out, result.best_policy, args.algo, args.seed, run.config_hash)
    curve_path = args.curve or f"{args.out}.curve.csv"
    _write_curve(curve_path, result.reward_curve)
    if result.reward_curve:
        log.info(
            "first-5 mean %.2f, trailing-5 mean %.2f",
            float(np.mean(result.reward_curve[:5])),
            float(np.mean(result.reward_curve[-5:])),
        )
    print(f"checkpoint written to {args.out}")
    print(f"reward curve written to {curve_path}")
    print(f"config_hash: {run.config_hash}")
    return 0


def cmd_eval(args) -> int:
    if args.episodes < 1:
        raise ConfigError("--episodes must be >= 1: nothing to evaluate")
    run = load_config(args.config)
    policy, header = load_checkpoint(args.policy)
    if header["config_hash"] != run.config_hash:
        raise ConfigError(
            "checkpoint/config mismatch: checkpoint was trained under config hash "
            f"{header['config_hash'][:12]}..., current is {run.config_hash[:12]}..."
        )
    if args.scenario:
        run = with_scenario(run, args.scenario)
    seeds = [args.seed + i for i in range(args.episodes)]
    traces = _run_episodes(run, args.policy, seeds, args.stochastic, args.jobs)
    report = metrics.build_report(traces, seeds)
    baseline = _baseline_tracking_cost(run, seeds)
    lines = [
        "avlab evaluation report",
        f"config_hash: {run.config_hash}",
        f"algo: {header['algo']}",
        f"scenario: {run.schedule_name or 'custom'}",
        f"episodes: {report.episodes}",
        f"seeds: {','.join(str(s) for s in report.seeds)}",
        f"recall: {report.recall:.6f}",
        f"energy: {report.energy:.6f}",
        f"tracking_error: {report.tracking_error:.6f}",
        f"baseline_tracking_cost: {baseline:.6f}",
        f"tracking_ratio: {report.tracking_error / max(baseline, 1e-300):.3f}",
    ]
    text = "\n".join(lines) + "\n"
    if args.report:
        Path(args.report).write_text(text)
    if args.trace:
        metrics.export_trace(traces[0], args.trace)
    print(text, end="")
    return 0


def cmd_baseline(args) -> int:
    run = without_schedule(load_config(args.config))
    seeds = [args.seed + i for i in range(args.episodes)]
    traces = _run_episodes(run, None, seeds)
    rows = [r for t in traces for r in t]
    flag_rate = float(np.mean([r.detected for r in rows]))
    tracking = float(np.mean([r.j_t for r in rows]))
    lines = [
        "avlab baseline report (no attack)",
        f"config_hash: {run.config_hash}",
        f"episodes: {len(traces)}",
        f"steps: {len(rows)}",
        f"detector_flag_rate: {flag_rate:.6f}",
        f"tracking_cost: {tracking:.6f}",
    ]
    text = "\n".join(lines) + "\n"
    if args.report:
        Path(args.report).write_text(text)
    print(text, end="")
    return 0


def cmd_plot(args) -> int:
    trace = metrics.import_trace(args.trace)
    metrics.export_plot(trace, args.out)
    print(f"plot written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="avlab", description="Stealthy actuator-attack simulation lab."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train_p = sub.add_parser("train", help="train an attack policy")
    train_p.add_argument("--config", default=None, help="TOML config path (defaults built in)")
    train_p.add_argument("--algo", choices=["ppo", "sac"], default="ppo")
    train_p.add_argument("--out", required=True, help="checkpoint output path")
    train_p.add_argument("--seed", type=int, default=0)
    train_p.add_argument("--curve", default=None, help="reward-curve CSV path (default <out>.curve.csv)")
    train_p.set_defaults(func=cmd_train)

    eval_p = sub.add_parser("eval", help="evaluate a trained policy")
    eval_p.add_argument("--config", default=None)
    eval_p.add_argument("--policy", required=True, help="checkpoint path")
    eval_p.add_argument("--episodes", type=int, default=10)
    eval_p.add_argument("--scenario", choices=["long", "short"], default=None)
    eval_p.add_argument("--trace", default=None, help="write first episode trace CSV here")
    eval_p.add_argument("--report", default=None, help="write the text report here")
    eval_p.add_argument("--seed", type=int, default=0)
    eval_p.add_argument("--jobs", type=int, default=1, help="parallel episodes")
    eval_p.add_argument("--stochastic", action="store_true", help="sample actions instead of the mean")
    eval_p.set_defaults(func=cmd_eval)

    base_p = sub.add_parser("baseline", help="no-attack closed-loop reference run")
    base_p.add_argument("--config", default=None)
    base_p.add_argument("--episodes", type=int, default=10)
    base_p.add_argument("--seed", type=int, default=0)
    base_p.add_argument("--report", default=None)
    base_p.set_defaults(func=cmd_baseline)

    plot_p = sub.add_parser("plot", help="render a trace CSV as SVG")
    plot_p.add_argument("--trace", required=True)
    plot_p.add_argument("--out", required=True)
    plot_p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    try:
        _setup_logging()
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TrainingFault as exc:
        print(f"training fault: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    except AvlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
