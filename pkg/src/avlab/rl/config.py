"""Trainer hyperparameters for both algorithms; defaults are desk-scale."""

from __future__ import annotations

from dataclasses import dataclass

from avlab.errors import ConfigError


@dataclass
class TrainerConfig:
    # shared
    gamma: float = 0.99
    learning_rate: float = 3e-4
    grad_clip: float = 0.5
    episodes: int = 50
    # Rewards are scaled inside the trainers so critics fit desk-scale
    # targets; curves and metrics always report raw environment rewards.
    reward_scale: float = 0.01
    hidden: tuple[int, ...] = (64, 64)
    # ppo
    gae_lambda: float = 0.95
    clip_epsilon: float = 0.2
    epochs_per_batch: int = 10
    batch_size: int = 1000
    minibatch_size: int = 250
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    target_kl: float = 0.1
    # sac
    tau: float = 0.005
    entropy_alpha: float = 0.2
    auto_entropy: bool = True
    target_entropy: float = -2.0
    replay_capacity: int = 100_000
    sac_batch_size: int = 256
    warmup_steps: int = 1000
    updates_per_step: int = 1

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0 or not 0.0 < self.gae_lambda <= 1.0:
            raise ConfigError("gamma and gae_lambda must lie in (0, 1]")
        if self.clip_epsilon <= 0.0:
            raise ConfigError("clip_epsilon must be positive")
        if self.learning_rate <= 0.0:
            raise ConfigError("learning_rate must be positive")
        if self.episodes < 0:
            raise ConfigError("episodes must be >= 0")
        if self.batch_size < 1 or self.minibatch_size < 1 or self.sac_batch_size < 1:
            raise ConfigError("batch sizes must be positive")
        if not 0.0 < self.tau <= 1.0:
            raise ConfigError("tau must lie in (0, 1]")
        if self.replay_capacity < 1:
            raise ConfigError("replay_capacity must be positive")
        if self.reward_scale <= 0.0:
            raise ConfigError("reward_scale must be positive")
