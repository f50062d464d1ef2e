"""FIFO replay buffer with uniform sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from avlab.errors import UsageError


@dataclass(frozen=True)
class Transition:
    """One environment transition; `u` is the pre-squash action."""

    obs: np.ndarray
    u: np.ndarray
    reward: float
    next_obs: np.ndarray
    done: bool
    logp: float


class ReplayBuffer:
    def __init__(self, capacity: int, obs_dim: int, act_dim: int):
        if capacity < 1:
            raise UsageError("capacity must be positive")
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_dim))
        self.u = np.zeros((capacity, act_dim))
        self.reward = np.zeros(capacity)
        self.next_obs = np.zeros((capacity, obs_dim))
        self.done = np.zeros(capacity, dtype=bool)
        self.logp = np.zeros(capacity)
        self._next = 0
        self._size = 0

    def add(self, t: Transition) -> None:
        i = self._next
        self.obs[i] = t.obs
        self.u[i] = t.u
        self.reward[i] = t.reward
        self.next_obs[i] = t.next_obs
        self.done[i] = t.done
        self.logp[i] = t.logp
        self._next = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def __len__(self) -> int:
        return self._size

    def sample(self, batch_size: int, rng: np.random.Generator) -> dict:
        if self._size == 0:
            raise UsageError("cannot sample from an empty buffer")
        idx = rng.integers(0, self._size, size=batch_size)
        return {
            "obs": self.obs[idx],
            "u": self.u[idx],
            "reward": self.reward[idx],
            "next_obs": self.next_obs[idx],
            "done": self.done[idx],
            "logp": self.logp[idx],
            "idx": idx,
        }
