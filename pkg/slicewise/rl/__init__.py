from .agent import (
    AgentConfig,
    DqnAgent,
    act_epsilon_greedy,
    compute_target,
    compute_targets,
    epsilon_at,
    sync_target,
    train_step,
)
from .checkpoint import (
    FORMAT_VERSION,
    MissingCheckpointError,
    load_agent,
    network_from_dict,
    network_to_dict,
    save_agent,
)
from .mdp import (
    MAX_QUEUE,
    EpisodeDoneError,
    MdpState,
    ResourcePool,
    RewardParams,
    SliceEnv,
    StepRecord,
    Transition,
    one_hot,
    reward_params_for,
    state_width,
)
from .network import QNetwork, glorot_uniform
from .replay import Batch, ReplayBuffer
