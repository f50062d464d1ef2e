"""Tanh-squashed diagonal Gaussian policy over a shared Mlp trunk.

The trunk emits [mean, log_std] per action dimension; log_std is clamped to
[-5, 2]. Sampled pre-squash actions u are mapped to the action box by
a_max * tanh(u), and log-densities carry the change-of-variables correction
log|da/du| = log(a_max) + log(1 - tanh(u)^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from avlab.rl.nets import Mlp

LOG_STD_MIN = -5.0
LOG_STD_MAX = 2.0

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


def log1m_tanh2(u: np.ndarray) -> np.ndarray:
    """Numerically stable log(1 - tanh(u)^2)."""
    return 2.0 * (np.log(2.0) - u - np.logaddexp(0.0, -2.0 * u))


@dataclass
class PolicyHeads:
    mu: np.ndarray
    log_std: np.ndarray           # clamped
    log_std_mask: np.ndarray      # 1 where the clamp is inactive
    cache: list


class GaussianPolicy:
    def __init__(self, trunk: Mlp, a_max: float = 1.0):
        if trunk.dims[-1] % 2 != 0:
            raise ValueError("policy trunk must emit [mean, log_std] pairs")
        self.trunk = trunk
        self.a_max = float(a_max)
        self.obs_dim = trunk.dims[0]
        self.act_dim = trunk.dims[-1] // 2

    @classmethod
    def create(
        cls,
        obs_dim: int,
        act_dim: int,
        rng: np.random.Generator,
        hidden=(64, 64),
        a_max: float = 1.0,
        init_log_std: float = -0.5,
    ) -> "GaussianPolicy":
        trunk = Mlp.create([obs_dim, *hidden, 2 * act_dim], rng, final_scale=0.01)
        policy = cls(trunk, a_max)
        # Bias of the log_std head sets the initial exploration scale.
        layers = trunk._layers()
        offset = trunk.n_params - 2 * act_dim
        trunk.params[offset + act_dim :] = init_log_std
        assert np.allclose(layers[-1][1][act_dim:], init_log_std)
        return policy

    # -- forward -----------------------------------------------------------

    def heads(self, obs: np.ndarray) -> PolicyHeads:
        out, cache = self.trunk.forward_cached(np.atleast_2d(obs))
        mu = out[:, : self.act_dim]
        raw = out[:, self.act_dim :]
        log_std = np.clip(raw, LOG_STD_MIN, LOG_STD_MAX)
        mask = ((raw > LOG_STD_MIN) & (raw < LOG_STD_MAX)).astype(float)
        return PolicyHeads(mu=mu, log_std=log_std, log_std_mask=mask, cache=cache)

    def _log_prob_given(self, heads: PolicyHeads, u: np.ndarray) -> np.ndarray:
        std = np.exp(heads.log_std)
        z = (u - heads.mu) / std
        log_n = -0.5 * z * z - heads.log_std - _LOG_SQRT_2PI
        corr = np.log(self.a_max) + log1m_tanh2(u)
        return np.sum(log_n - corr, axis=-1)

    def log_prob(self, obs: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Log-density of the squashed action identified by pre-squash value u."""
        return self._log_prob_given(self.heads(obs), np.atleast_2d(u))

    def sample(self, obs: np.ndarray, rng: np.random.Generator):
        """Returns (action in the box, pre-squash u, log-prob)."""
        heads = self.heads(obs)
        xi = rng.standard_normal(heads.mu.shape)
        u = heads.mu + np.exp(heads.log_std) * xi
        action = self.a_max * np.tanh(u)
        return action, u, self._log_prob_given(heads, u)

    def mean_action(self, obs: np.ndarray) -> np.ndarray:
        heads = self.heads(np.atleast_2d(obs))
        a = self.a_max * np.tanh(heads.mu)
        return a[0] if np.asarray(obs).ndim == 1 else a

    def entropy(self, heads: PolicyHeads) -> np.ndarray:
        """Entropy of the pre-squash Gaussian (the usual PPO bonus term)."""
        return np.sum(heads.log_std + 0.5 * (1.0 + np.log(2.0 * np.pi)), axis=-1)

    # -- backward ----------------------------------------------------------

    def backprop_heads(self, heads: PolicyHeads, d_mu: np.ndarray, d_log_std: np.ndarray) -> np.ndarray:
        """Flat parameter gradient given loss gradients at the (clamped) heads."""
        upstream = np.concatenate([d_mu, d_log_std * heads.log_std_mask], axis=1)
        grad, _ = self.trunk.backward(heads.cache, upstream)
        return grad

    def n_params(self) -> int:
        return self.trunk.n_params
