"""Entropy-regularized actor-critic with twin Q networks and Polyak targets.

Policy gradients use the reparametrized sample u = mu + sigma * xi: under
that substitution the Gaussian term of log pi contributes d/d(mu) = 0 and
d/d(log sigma) = -1, while the tanh correction contributes 2*tanh(u) along
the sample path; the Q term is chained through dQ/da and the squash
Jacobian a_max * (1 - tanh(u)^2).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from avlab.errors import TrainingFault
from avlab.rl.config import TrainerConfig
from avlab.rl.nets import Adam, Mlp, clip_grad_norm
from avlab.rl.policy import GaussianPolicy


@dataclass
class SacState:
    """All mutable trainer state for one SAC run."""

    policy: GaussianPolicy
    q1: Mlp
    q2: Mlp
    q1_target: Mlp
    q2_target: Mlp
    opt_policy: Adam
    opt_q1: Adam
    opt_q2: Adam
    log_alpha: float = np.log(0.2)
    opt_alpha: Adam | None = None
    alpha_m: float = 0.0
    alpha_v: float = 0.0
    alpha_t: int = 0

    @property
    def alpha(self) -> float:
        return float(np.exp(self.log_alpha))


@dataclass
class SacDiagnostics:
    q_loss: float
    policy_loss: float
    alpha: float
    entropy_estimate: float


def make_sac_state(policy: GaussianPolicy, config: TrainerConfig, rng: np.random.Generator) -> SacState:
    q_dims = [policy.obs_dim + policy.act_dim, *config.hidden, 1]
    q1 = Mlp.create(q_dims, rng)
    q2 = Mlp.create(q_dims, rng)
    lr = config.learning_rate
    return SacState(
        policy=policy,
        q1=q1,
        q2=q2,
        q1_target=Mlp(q_dims, q1.params.copy()),
        q2_target=Mlp(q_dims, q2.params.copy()),
        opt_policy=Adam(policy.n_params(), lr),
        opt_q1=Adam(q1.n_params, lr),
        opt_q2=Adam(q2.n_params, lr),
        log_alpha=float(np.log(config.entropy_alpha)),
    )


def polyak_update(target: Mlp, online: Mlp, tau: float) -> None:
    target.params *= 1.0 - tau
    target.params += tau * online.params


def _q_forward(q: Mlp, obs: np.ndarray, act: np.ndarray):
    y, cache = q.forward_cached(np.concatenate([obs, act], axis=1))
    return y[:, 0], cache


def policy_loss_and_grad(
    policy: GaussianPolicy,
    q1: Mlp,
    q2: Mlp,
    obs: np.ndarray,
    xi: np.ndarray,
    alpha: float,
):
    """Actor loss mean(alpha * log pi - min twin Q) at the reparametrized sample
    u = mu + sigma * xi, and its exact gradient w.r.t. the policy parameters."""
    B = len(obs)
    heads = policy.heads(obs)
    sigma = np.exp(heads.log_std)
    u = heads.mu + sigma * xi
    tanh_u = np.tanh(u)
    a_new = policy.a_max * tanh_u
    logp = policy._log_prob_given(heads, u)

    q1v, cache1 = _q_forward(q1, obs, a_new)
    q2v, cache2 = _q_forward(q2, obs, a_new)
    use_q1 = q1v <= q2v
    q_min = np.where(use_q1, q1v, q2v)
    loss = float(np.mean(alpha * logp - q_min))

    # dQ/da from whichever twin realizes the minimum, per sample.
    ones = np.ones((B, 1)) / B
    _, dinput1 = q1.backward(cache1, ones * use_q1[:, None])
    _, dinput2 = q2.backward(cache2, ones * (~use_q1)[:, None])
    dq_da = (dinput1 + dinput2)[:, policy.obs_dim :]

    da_du = policy.a_max * (1.0 - tanh_u * tanh_u)
    dlogp_dmu = 2.0 * tanh_u
    dlogp_dls = -1.0 + 2.0 * tanh_u * sigma * xi
    d_mu = (alpha * dlogp_dmu) / B - dq_da * da_du
    d_log_std = (alpha * dlogp_dls) / B - dq_da * da_du * sigma * xi
    grad = policy.backprop_heads(heads, d_mu, d_log_std)
    return loss, grad, logp


def q_targets(state: SacState, batch: dict, config: TrainerConfig, rng: np.random.Generator) -> np.ndarray:
    """Bellman targets y = r + gamma * (1 - done) * (min twin target Q - alpha log pi)."""
    a2, _, logp2 = state.policy.sample(batch["next_obs"], rng)
    tq1, _ = _q_forward(state.q1_target, batch["next_obs"], a2)
    tq2, _ = _q_forward(state.q2_target, batch["next_obs"], a2)
    soft_q = np.minimum(tq1, tq2) - state.alpha * logp2
    nonterminal = 1.0 - batch["done"].astype(float)
    return batch["reward"] + config.gamma * nonterminal * soft_q


def sac_update(
    state: SacState,
    batch: dict,
    config: TrainerConfig,
    rng: np.random.Generator,
) -> SacDiagnostics:
    """One gradient step on both critics, the actor, and the entropy coefficient.

    `batch["reward"]` is expected in trainer units (already scaled). Raises
    TrainingFault with parameters rolled back on non-finite values.
    """
    snapshots = (
        state.policy.trunk.params.copy(),
        state.q1.params.copy(),
        state.q2.params.copy(),
    )
    obs = batch["obs"]
    act_env = state.policy.a_max * np.tanh(batch["u"])
    B = len(obs)

    y = q_targets(state, batch, config, rng)

    q_loss_total = 0.0
    for q, opt in ((state.q1, state.opt_q1), (state.q2, state.opt_q2)):
        qv, cache = _q_forward(q, obs, act_env)
        err = qv - y
        q_loss = float(np.mean(err * err))
        upstream = (2.0 * err / B)[:, None]
        grad, _ = q.backward(cache, upstream)
        if not (np.isfinite(q_loss) and np.all(np.isfinite(grad))):
            _rollback(state, snapshots)
            raise TrainingFault("non-finite critic loss in sac_update")
        opt.step(q.params, clip_grad_norm(grad, config.grad_clip))
        q_loss_total += q_loss

    xi = rng.standard_normal((B, state.policy.act_dim))
    policy_loss, pgrad, logp = policy_loss_and_grad(
        state.policy, state.q1, state.q2, obs, xi, state.alpha
    )
    if not (np.isfinite(policy_loss) and np.all(np.isfinite(pgrad))):
        _rollback(state, snapshots)
        raise TrainingFault("non-finite actor loss in sac_update")
    state.opt_policy.step(state.policy.trunk.params, clip_grad_norm(pgrad, config.grad_clip))

    if config.auto_entropy:
        # d/d(log alpha) of -log_alpha * mean(logp + target_entropy), via Adam.
        g = -float(np.mean(logp + config.target_entropy))
        state.alpha_t += 1
        state.alpha_m = 0.9 * state.alpha_m + 0.1 * g
        state.alpha_v = 0.999 * state.alpha_v + 0.001 * g * g
        m_hat = state.alpha_m / (1 - 0.9**state.alpha_t)
        v_hat = state.alpha_v / (1 - 0.999**state.alpha_t)
        state.log_alpha -= config.learning_rate * m_hat / (np.sqrt(v_hat) + 1e-8)

    polyak_update(state.q1_target, state.q1, config.tau)
    polyak_update(state.q2_target, state.q2, config.tau)

    return SacDiagnostics(
        q_loss=q_loss_total / 2.0,
        policy_loss=policy_loss,
        alpha=state.alpha,
        entropy_estimate=float(-np.mean(logp)),
    )


def _rollback(state: SacState, snapshots) -> None:
    state.policy.trunk.params[:] = snapshots[0]
    state.q1.params[:] = snapshots[1]
    state.q2.params[:] = snapshots[2]
