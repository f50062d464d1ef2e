"""Clipped-surrogate policy optimization over the Gaussian policy.

All gradients are assembled analytically: the surrogate's derivative with
respect to the new log-density is ratio * advantage wherever the clip is
inactive, and zero where clipping has frozen the objective; the Gaussian
log-density derivatives are propagated through the trunk by the shared
reverse-mode machinery.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from avlab.errors import TrainingFault
from avlab.rl.config import TrainerConfig
from avlab.rl.nets import Adam, Mlp, clip_grad_norm
from avlab.rl.policy import GaussianPolicy

_ENTROPY_CONST = 0.5 * (1.0 + np.log(2.0 * np.pi))


def clipped_surrogate(ratio, adv, eps: float):
    """Per-sample objective min(ratio * adv, clip(ratio, 1-eps, 1+eps) * adv)."""
    ratio = np.asarray(ratio, dtype=float)
    adv = np.asarray(adv, dtype=float)
    return np.minimum(ratio * adv, np.clip(ratio, 1.0 - eps, 1.0 + eps) * adv)


@dataclass
class PpoDiagnostics:
    policy_loss: float
    value_loss: float
    entropy: float
    approx_kl: float
    clip_fraction: float
    epochs_run: int


@dataclass
class PpoBatch:
    obs: np.ndarray
    u: np.ndarray          # pre-squash actions
    logp_old: np.ndarray
    advantages: np.ndarray
    returns: np.ndarray


def policy_objective_grad(
    policy: GaussianPolicy, obs, u, logp_old, adv, eps: float, entropy_coef: float
):
    """(objective value, flat gradient) of the clipped surrogate plus entropy bonus.

    The objective is to be *maximized*; callers negate for descent.
    """
    heads = policy.heads(obs)
    logp = policy._log_prob_given(heads, u)
    ratio = np.exp(logp - logp_old)
    objective = float(np.mean(clipped_surrogate(ratio, adv, eps)))
    entropy = float(np.mean(policy.entropy(heads)))

    # d(surrogate)/d(logp): active unless the clip has frozen the objective.
    clip_hi = (adv >= 0.0) & (ratio > 1.0 + eps)
    clip_lo = (adv < 0.0) & (ratio < 1.0 - eps)
    active = ~(clip_hi | clip_lo)
    B = len(ratio)
    dlogp = active * ratio * adv / B

    std = np.exp(heads.log_std)
    z = (u - heads.mu) / std
    d_mu = dlogp[:, None] * z / std
    d_log_std = dlogp[:, None] * (z * z - 1.0) + entropy_coef / B
    grad = policy.backprop_heads(heads, d_mu, d_log_std)
    return objective + entropy_coef * entropy, grad, ratio, entropy


def value_loss_grad(value_net: Mlp, obs, returns, coef: float):
    """(loss value, flat gradient) of coef * mean((V(s) - returns)^2)."""
    v, cache = value_net.forward_cached(obs)
    err = v[:, 0] - returns
    loss = coef * float(np.mean(err * err))
    upstream = (coef * 2.0 * err / len(err))[:, None]
    grad, _ = value_net.backward(cache, upstream)
    return loss, grad


def ppo_update(
    policy: GaussianPolicy,
    value_net: Mlp,
    batch: PpoBatch,
    config: TrainerConfig,
    opt_policy: Adam,
    opt_value: Adam,
    rng: np.random.Generator,
) -> PpoDiagnostics:
    """Several epochs of minibatch ascent on one on-policy batch.

    Raises TrainingFault (with parameters restored) on any non-finite loss
    or gradient.
    """
    policy_snapshot = policy.trunk.params.copy()
    value_snapshot = value_net.params.copy()
    adv = batch.advantages
    adv = (adv - adv.mean()) / (adv.std() + 1e-8)
    n = len(adv)
    epochs_run = 0
    approx_kl = 0.0
    try:
        for _ in range(config.epochs_per_batch):
            order = rng.permutation(n)
            for start in range(0, n, config.minibatch_size):
                idx = order[start : start + config.minibatch_size]
                objective, pgrad, _, _ = policy_objective_grad(
                    policy,
                    batch.obs[idx],
                    batch.u[idx],
                    batch.logp_old[idx],
                    adv[idx],
                    config.clip_epsilon,
                    config.entropy_coef,
                )
                vloss, vgrad = value_loss_grad(
                    value_net, batch.obs[idx], batch.returns[idx], config.value_coef
                )
                if not (
                    np.isfinite(objective)
                    and np.isfinite(vloss)
                    and np.all(np.isfinite(pgrad))
                    and np.all(np.isfinite(vgrad))
                ):
                    raise TrainingFault("non-finite loss or gradient in ppo_update")
                opt_policy.step(policy.trunk.params, clip_grad_norm(-pgrad, config.grad_clip))
                opt_value.step(value_net.params, clip_grad_norm(vgrad, config.grad_clip))
            epochs_run += 1
            logp_new = policy.log_prob(batch.obs, batch.u)
            approx_kl = float(np.mean(batch.logp_old - logp_new))
            if config.target_kl > 0 and approx_kl > config.target_kl:
                break
    except TrainingFault:
        policy.trunk.params[:] = policy_snapshot
        value_net.params[:] = value_snapshot
        raise

    heads = policy.heads(batch.obs)
    logp_new = policy._log_prob_given(heads, batch.u)
    ratio = np.exp(logp_new - batch.logp_old)
    objective = float(np.mean(clipped_surrogate(ratio, adv, config.clip_epsilon)))
    vloss, _ = value_loss_grad(value_net, batch.obs, batch.returns, config.value_coef)
    return PpoDiagnostics(
        policy_loss=-objective,
        value_loss=vloss,
        entropy=float(np.mean(policy.entropy(heads))),
        approx_kl=approx_kl,
        clip_fraction=float(np.mean(np.abs(ratio - 1.0) > config.clip_epsilon)),
        epochs_run=epochs_run,
    )
