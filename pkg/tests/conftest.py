import dataclasses

import numpy as np
import pytest

from avlab.dynamics import AttackSignal
from avlab.environment import AttackEnv, EnvConfig


@pytest.fixture
def default_config():
    return EnvConfig()


@pytest.fixture
def short_env():
    """Environment with a small horizon for fast closed-loop tests."""
    return AttackEnv(dataclasses.replace(EnvConfig(), horizon=60))


def run_zero_attack(env: AttackEnv, seed: int, steps: int | None = None):
    env.reset(seed=seed)
    n = steps if steps is not None else env.config.horizon
    for _ in range(n):
        out = env.step(AttackSignal(0.0, 0.0))
        if out.done:
            break
    return env.trace


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
