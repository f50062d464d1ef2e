import numpy as np
import pytest

from avlab.rl.config import TrainerConfig
from avlab.rl.nets import Mlp
from avlab.rl.policy import GaussianPolicy
from avlab.rl.sac import make_sac_state, policy_loss_and_grad, polyak_update, q_targets, sac_update
from tests.test_mlp import fd_gradient, max_rel_err


def _state(rng, obs_dim=3, act_dim=1, hidden=(8,)):
    policy = GaussianPolicy.create(obs_dim, act_dim, rng, hidden=hidden, a_max=1.0)
    cfg = TrainerConfig(hidden=hidden)
    return make_sac_state(policy, cfg, rng), cfg


def _batch(rng, state, n=16, done=None):
    obs_dim, act_dim = state.policy.obs_dim, state.policy.act_dim
    return {
        "obs": rng.standard_normal((n, obs_dim)),
        "u": rng.standard_normal((n, act_dim)),
        "reward": rng.standard_normal(n),
        "next_obs": rng.standard_normal((n, obs_dim)),
        "done": np.full(n, done) if done is not None else rng.random(n) < 0.3,
        "logp": rng.standard_normal(n),
    }


def test_done_transitions_bootstrap_to_reward(rng):
    state, cfg = _state(rng)
    batch = _batch(rng, state, done=True)
    y = q_targets(state, batch, cfg, rng)
    assert np.array_equal(y, batch["reward"])


def test_zero_gamma_removes_bootstrap(rng):
    state, cfg = _state(rng)
    cfg = TrainerConfig(gamma=1e-12, hidden=(8,))  # gamma must be > 0; effectively zero
    batch = _batch(rng, state, done=False)
    y = q_targets(state, batch, cfg, rng)
    assert np.allclose(y, batch["reward"], atol=1e-9)


def test_polyak_full_copy(rng):
    state, _ = _state(rng)
    state.q1.params += 1.0
    polyak_update(state.q1_target, state.q1, tau=1.0)
    assert np.allclose(state.q1_target.params, state.q1.params)


def test_polyak_partial(rng):
    state, _ = _state(rng)
    before = state.q1_target.params.copy()
    online = state.q1.params.copy()
    polyak_update(state.q1_target, state.q1, tau=0.25)
    assert np.allclose(state.q1_target.params, 0.75 * before + 0.25 * online)


def test_sac_policy_loss_gradient_matches_fd(rng):
    state, _ = _state(rng)
    obs = rng.standard_normal((10, 3))
    xi = rng.standard_normal((10, 1))
    alpha = 0.2
    _, analytic, _ = policy_loss_and_grad(state.policy, state.q1, state.q2, obs, xi, alpha)

    dims = state.policy.trunk.dims

    def loss_of(p):
        probe = GaussianPolicy(Mlp(dims, p), state.policy.a_max)
        loss, _, _ = policy_loss_and_grad(probe, state.q1, state.q2, obs, xi, alpha)
        return loss

    numeric = fd_gradient(loss_of, state.policy.trunk.params.copy())
    assert max_rel_err(analytic, numeric) < 1e-4


def test_sac_update_runs_and_tunes_alpha(rng):
    state, cfg = _state(rng)
    alpha_before = state.alpha
    for _ in range(5):
        diag = sac_update(state, _batch(rng, state, n=32), cfg, rng)
    assert np.isfinite(diag.q_loss) and np.isfinite(diag.policy_loss)
    assert diag.alpha > 0.0
    assert state.alpha != alpha_before  # auto-tuning moved the temperature


def test_sac_update_fixed_alpha(rng):
    state, _ = _state(rng)
    cfg = TrainerConfig(auto_entropy=False, hidden=(8,))
    before = state.alpha
    sac_update(state, _batch(rng, state, n=16), cfg, rng)
    assert state.alpha == before
