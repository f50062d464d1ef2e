from avlab.rl.config import TrainerConfig
from avlab.rl.nets import Adam, Mlp, mlp_forward, mlp_gradient
from avlab.rl.policy import GaussianPolicy
from avlab.rl.gae import gae
from avlab.rl.replay import ReplayBuffer, Transition
from avlab.rl.ppo import clipped_surrogate, ppo_update
from avlab.rl.sac import sac_update
from avlab.rl.train import TrainResult, train
from avlab.rl.checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "Adam",
    "GaussianPolicy",
    "Mlp",
    "ReplayBuffer",
    "TrainResult",
    "TrainerConfig",
    "Transition",
    "clipped_surrogate",
    "gae",
    "load_checkpoint",
    "mlp_forward",
    "mlp_gradient",
    "ppo_update",
    "sac_update",
    "save_checkpoint",
    "train",
]
