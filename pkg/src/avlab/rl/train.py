"""Episode-loop training for both algorithms.

Runs are deterministic in (config, seed): every random stream is derived
from the seed, and per-episode environment seeds follow a fixed sequence.
The best policy by trailing-5-episode mean reward is checkpointed in
memory and returned alongside the final one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from avlab.dynamics import AttackSignal
from avlab.environment import AttackEnv, OBS_DIM
from avlab.errors import ConfigError
from avlab.rl.config import TrainerConfig
from avlab.rl.gae import gae
from avlab.rl.nets import Adam, Mlp
from avlab.rl.policy import GaussianPolicy
from avlab.rl.ppo import PpoBatch, PpoDiagnostics, ppo_update
from avlab.rl.replay import ReplayBuffer, Transition
from avlab.rl.sac import SacDiagnostics, make_sac_state, sac_update

ACT_DIM = 2


@dataclass
class TrainResult:
    algo: str
    seed: int
    policy: GaussianPolicy
    best_policy: GaussianPolicy
    reward_curve: list[float] = field(default_factory=list)
    diagnostics: list = field(default_factory=list)


def episode_seed(seed: int, episode: int) -> int:
    return seed * 1_000_003 + episode


def _trailing_mean(curve: list[float], n: int = 5) -> float:
    return float(np.mean(curve[-n:]))


def train(env: AttackEnv, algo: str, config: TrainerConfig, seed: int) -> TrainResult:
    if algo not in ("ppo", "sac"):
        raise ConfigError(f"unknown algorithm {algo!r}; expected 'ppo' or 'sac'")
    ss = np.random.SeedSequence(seed)
    init_rng, action_rng, update_rng = (np.random.default_rng(c) for c in ss.spawn(3))
    policy = GaussianPolicy.create(
        OBS_DIM, ACT_DIM, init_rng, hidden=config.hidden, a_max=env.config.a_max
    )
    if algo == "ppo":
        return _train_ppo(env, policy, config, seed, action_rng, update_rng, init_rng)
    return _train_sac(env, policy, config, seed, action_rng, update_rng, init_rng)


def _snapshot(policy: GaussianPolicy) -> GaussianPolicy:
    return GaussianPolicy(Mlp(policy.trunk.dims, policy.trunk.params.copy()), policy.a_max)


def _train_ppo(env, policy, config, seed, action_rng, update_rng, init_rng) -> TrainResult:
    value_net = Mlp.create([OBS_DIM, *config.hidden, 1], init_rng)
    opt_policy = Adam(policy.n_params(), config.learning_rate)
    opt_value = Adam(value_net.n_params, config.learning_rate)
    result = TrainResult(algo="ppo", seed=seed, policy=policy, best_policy=_snapshot(policy))
    best = -np.inf

    obs_buf, u_buf, logp_buf, rew_buf, done_buf = [], [], [], [], []
    for ep in range(config.episodes):
        obs = env.reset(seed=episode_seed(seed, ep))
        ep_return = 0.0
        done = False
        while not done:
            action, u, logp = policy.sample(obs[None, :], action_rng)
            out = env.step(AttackSignal(float(action[0, 0]), float(action[0, 1])))
            obs_buf.append(obs)
            u_buf.append(u[0])
            logp_buf.append(float(logp[0]))
            rew_buf.append(out.reward * config.reward_scale)
            done_buf.append(out.done)
            ep_return += out.reward
            obs = out.observation
            done = out.done
        result.reward_curve.append(ep_return)
        if _trailing_mean(result.reward_curve) > best:
            best = _trailing_mean(result.reward_curve)
            result.best_policy = _snapshot(policy)

        if len(rew_buf) >= config.batch_size:
            obs_arr = np.array(obs_buf)
            values = value_net.forward(obs_arr)[:, 0]
            # Batches end at an episode boundary, so the bootstrap value is unused.
            adv, ret = gae(
                rew_buf, np.append(values, 0.0), done_buf, config.gamma, config.gae_lambda
            )
            batch = PpoBatch(
                obs=obs_arr,
                u=np.array(u_buf),
                logp_old=np.array(logp_buf),
                advantages=adv,
                returns=ret,
            )
            diag = ppo_update(policy, value_net, batch, config, opt_policy, opt_value, update_rng)
            result.diagnostics.append(diag)
            obs_buf, u_buf, logp_buf, rew_buf, done_buf = [], [], [], [], []
    result.policy = policy
    return result


def _train_sac(env, policy, config, seed, action_rng, update_rng, init_rng) -> TrainResult:
    state = make_sac_state(policy, config, init_rng)
    buffer = ReplayBuffer(config.replay_capacity, OBS_DIM, ACT_DIM)
    result = TrainResult(algo="sac", seed=seed, policy=policy, best_policy=_snapshot(policy))
    best = -np.inf
    total_steps = 0

    for ep in range(config.episodes):
        obs = env.reset(seed=episode_seed(seed, ep))
        ep_return = 0.0
        done = False
        while not done:
            action, u, logp = policy.sample(obs[None, :], action_rng)
            out = env.step(AttackSignal(float(action[0, 0]), float(action[0, 1])))
            buffer.add(
                Transition(
                    obs=obs,
                    u=u[0],
                    reward=out.reward * config.reward_scale,
                    next_obs=out.observation,
                    done=out.done,
                    logp=float(logp[0]),
                )
            )
            total_steps += 1
            ep_return += out.reward
            obs = out.observation
            done = out.done
            if total_steps >= config.warmup_steps and len(buffer) >= config.sac_batch_size:
                for _ in range(config.updates_per_step):
                    batch = buffer.sample(config.sac_batch_size, update_rng)
                    diag = sac_update(state, batch, config, update_rng)
                result.diagnostics.append(diag)
        result.reward_curve.append(ep_return)
        if _trailing_mean(result.reward_curve) > best:
            best = _trailing_mean(result.reward_curve)
            result.best_policy = _snapshot(policy)
    result.policy = policy
    return result
