"""Generalized advantage estimation."""

from __future__ import annotations

import numpy as np

from avlab.errors import UsageError


def gae(rewards, values, dones, gamma: float, lam: float):
    """Recursive GAE over one collected batch.

    `values` must carry one bootstrap entry beyond the last reward. Returns
    (advantages, returns) with returns = advantages + values[:-1]; advantages
    are unnormalized here (the PPO update normalizes per batch).
    """
    rewards = np.asarray(rewards, dtype=float)
    values = np.asarray(values, dtype=float)
    dones = np.asarray(dones, dtype=bool)
    T = len(rewards)
    if len(dones) != T or len(values) != T + 1:
        raise UsageError("gae expects len(values) == len(rewards) + 1 == len(dones) + 1")
    adv = np.zeros(T)
    last = 0.0
    for t in range(T - 1, -1, -1):
        nonterminal = 0.0 if dones[t] else 1.0
        delta = rewards[t] + gamma * values[t + 1] * nonterminal - values[t]
        last = delta + gamma * lam * nonterminal * last
        adv[t] = last
    return adv, adv + values[:-1]
