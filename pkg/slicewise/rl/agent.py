"""
Double deep Q-learning: epsilon-greedy acting, experience replay, a target
network synced every sync_interval environment steps, and targets that pick
the bootstrap action with the online network but value it with the target
network.
"""

from collections import Counter
from dataclasses import asdict, dataclass, field, replace
import math
from typing import Any, Dict, Mapping, Optional, Tuple

from jax.example_libraries import optimizers
import jax.numpy as np
import numpy as onp
from typing_extensions import Literal

from slicewise.env.types import SliceType
import slicewise.static as static
from slicewise.utils import derive_seed, make_rng, stable_hash

from .mdp import (
    MAX_QUEUE,
    MdpState,
    RewardParams,
    Transition,
    reward_params_for,
    state_width,
)
from .network import QNetwork
from .replay import Batch, ReplayBuffer

Optimizer = Literal["sgd", "adam"]

LEARNING_RATES = {SliceType.eMBB: 0.05, SliceType.URLLC: 0.01, SliceType.mMTC: 0.005}
HIDDEN_WIDTHS = {SliceType.eMBB: 128, SliceType.URLLC: 128, SliceType.mMTC: 256}


@dataclass(frozen=True)
class AgentConfig:
    batch_size: int = 32
    buffer_capacity: int = 20000
    episodes: int = 50000
    sync_interval: int = 1000
    epsilon_decay: float = 25000.0
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    learning_rate: float = 0.05
    discount: float = 0.01
    reward_params: RewardParams = field(default_factory=RewardParams)
    hidden_width: int = 128
    hidden_layers: int = 3
    rng_seed: int = 0
    optimizer: Optimizer = "sgd"
    max_queue: int = MAX_QUEUE
    include_current_vnf: bool = True
    monolithic: bool = False
    checkpoint_interval: int = 5000

    def __post_init__(self):
        if not 0 < self.discount <= 1:
            raise ValueError(f"discount must be in (0, 1], got {self.discount}")
        if not 1 <= self.batch_size <= self.buffer_capacity:
            raise ValueError(
                f"Need 1 <= batch_size <= buffer_capacity, got "
                f"{self.batch_size} and {self.buffer_capacity}"
            )
        if not 0 <= self.epsilon_end <= self.epsilon_start <= 1:
            raise ValueError("Need 0 <= epsilon_end <= epsilon_start <= 1")
        if self.epsilon_decay <= 0 or self.learning_rate <= 0:
            raise ValueError("epsilon_decay and learning_rate must be positive")
        if self.sync_interval < 1 or self.episodes < 0:
            raise ValueError("sync_interval must be >= 1 and episodes >= 0")
        if self.optimizer not in ("sgd", "adam"):
            raise NotImplementedError(f"Unknown optimizer {self.optimizer!r}")

    @classmethod
    def for_slice_type(cls, slice_type: SliceType, **overrides) -> "AgentConfig":
        """Per-type defaults: learning rate, hidden width and completion reward"""
        defaults: Dict[str, Any] = dict(
            learning_rate=LEARNING_RATES[slice_type],
            hidden_width=HIDDEN_WIDTHS[slice_type],
            reward_params=reward_params_for(slice_type),
        )
        return cls(**{**defaults, **overrides})

    @classmethod
    def monolithic_default(cls, **overrides) -> "AgentConfig":
        """The single-agent baseline: 3 x 128 ReLU, lr 0.05, discount 0.01"""
        defaults: Dict[str, Any] = dict(
            learning_rate=0.05,
            hidden_width=128,
            hidden_layers=3,
            discount=0.01,
            monolithic=True,
            reward_params=reward_params_for(None),
        )
        return cls(**{**defaults, **overrides})

    def with_overrides(self, **overrides) -> "AgentConfig":
        return replace(self, **overrides)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        rewards = data["reward_params"]
        rewards["delta2"] = list(rewards["delta2"])
        if rewards["delta3_by_type"] is not None:
            rewards["delta3_by_type"] = list(rewards["delta3_by_type"])
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "AgentConfig":
        data = dict(data)
        rewards = dict(data.pop("reward_params", {}))
        if "delta2" in rewards:
            rewards["delta2"] = tuple(rewards["delta2"])
        if rewards.get("delta3_by_type") is not None:
            rewards["delta3_by_type"] = tuple(rewards["delta3_by_type"])
        return cls(reward_params=RewardParams(**rewards), **data)

    def config_hash(self) -> str:
        return stable_hash(self.to_dict())


def epsilon_at(step: int, config: AgentConfig) -> float:
    """Exponentially decayed exploration rate after step environment steps"""
    if step < 0:
        raise ValueError(f"step must be >= 0, got {step}")
    decay = math.exp(-step / config.epsilon_decay)
    return config.epsilon_end + (config.epsilon_start - config.epsilon_end) * decay


def _as_vector(state) -> onp.ndarray:
    if isinstance(state, MdpState):
        return state.vector()
    return onp.asarray(state, dtype=onp.float64)


def act_epsilon_greedy(
    net: QNetwork, state, epsilon: float, rng: onp.random.Generator
) -> int:
    """
    Uniform random action with probability epsilon, else the greedy action
    with ties to the lowest index. Consumes one uniform draw per call, plus
    one integer draw when exploring.
    """
    if not 0 <= epsilon <= 1:
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    if rng.random() < epsilon:
        return int(rng.integers(net.n_actions))
    return net.argmax(_as_vector(state))


def compute_target(
    online: QNetwork, target: QNetwork, transition: Transition, discount: float
) -> float:
    """
    Double-Q bootstrap target for one transition.

    The online network only chooses the next action; its value comes from
    the target network.
    """
    if transition.done:
        return float(transition.reward)
    next_state = _as_vector(transition.next_state)
    best = online.argmax(next_state)
    value = float(target.forward(next_state)[best])
    return float(transition.reward) + discount * value


def compute_targets(
    online: QNetwork, target: QNetwork, batch: Batch, discount: float
) -> onp.ndarray:
    """compute_target over a batch; same arithmetic, in numpy"""
    best = online.argmax(batch.next_states)
    values = onp.asarray(target.forward(batch.next_states))
    bootstrapped = values[onp.arange(len(best)), best]
    targets = batch.rewards + discount * bootstrapped
    return onp.where(batch.dones, batch.rewards, targets)


def make_optimizer(config: AgentConfig):
    if config.optimizer == "sgd":
        return optimizers.sgd(config.learning_rate)
    elif config.optimizer == "adam":
        return optimizers.adam(config.learning_rate)
    raise NotImplementedError(f"Unknown optimizer {config.optimizer!r}")


class DqnAgent:
    def __init__(self, config: AgentConfig, n_infrastructures: int = 3, name: str = ""):
        self.config = config
        self.name = name
        width = state_width(
            n_infrastructures,
            config.max_queue,
            config.include_current_vnf,
            config.monolithic,
        )
        layer_sizes = [width] + [config.hidden_width] * config.hidden_layers
        layer_sizes.append(n_infrastructures)
        init_seed = derive_seed(config.rng_seed, "init")
        self.online = QNetwork.initialize(layer_sizes, init_seed)
        self.target = self.online.copy()
        self.replay = ReplayBuffer(config.buffer_capacity, width)
        self.policy_rng = make_rng(config.rng_seed, "policy")
        self.replay_rng = make_rng(config.rng_seed, "replay")
        self.steps = 0
        self.updates = 0
        self.syncs = 0
        self.audit: Counter = Counter()
        self._reset_optimizer()

    def _reset_optimizer(self):
        opt_init, self._opt_update, self._get_params = make_optimizer(self.config)
        self._opt_state = opt_init(self.online.params)

    @property
    def layer_sizes(self) -> Tuple[int, ...]:
        return self.online.layer_sizes

    @property
    def n_actions(self) -> int:
        return self.online.n_actions

    def epsilon(self) -> float:
        return epsilon_at(self.steps, self.config)

    def act(self, state, epsilon: Optional[float] = None) -> int:
        if epsilon is None:
            epsilon = self.epsilon()
        return act_epsilon_greedy(self.online, state, epsilon, self.policy_rng)

    def train_step(self, batch: Batch) -> float:
        """
        One gradient step on the mean squared TD error of a batch.

        :return: the loss before the update
        """
        targets = compute_targets(self.online, self.target, batch, self.config.discount)
        loss, self._opt_state = static.optimizer_step(
            self._opt_update,
            self._get_params,
            self.updates,
            self._opt_state,
            np.asarray(batch.states),
            np.asarray(batch.actions),
            np.asarray(targets),
        )
        self.updates += 1
        self.online.params = list(self._get_params(self._opt_state))
        return float(loss)

    def sync_target(self):
        self.target.load(self.online)
        self.syncs += 1

    def observe(self, transition: Transition) -> Optional[float]:
        """
        Record one environment step; train once the buffer holds a batch and
        sync the target network every sync_interval steps.

        :return: the training loss, or None if no update happened
        """
        self.replay.push_transition(transition)
        self.steps += 1
        loss = None
        if len(self.replay) >= self.config.batch_size:
            batch = self.replay.sample(self.config.batch_size, self.replay_rng)
            loss = self.train_step(batch)
        if self.steps % self.config.sync_interval == 0:
            self.sync_target()
        return loss

    def load_network(self, net: QNetwork):
        """Replace online and target weights, e.g. from a checkpoint"""
        self.online.load(net)
        self.target.load(net)
        self._reset_optimizer()


def train_step(agent: DqnAgent, batch: Batch) -> float:
    return agent.train_step(batch)


def sync_target(agent: DqnAgent):
    agent.sync_target()
