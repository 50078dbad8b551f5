"""
One placement agent per slice type, plus the single-agent baseline.

Training runs each agent on its own type-homogeneous episodes over an empty
infrastructure. At placement time requests are taken in arrival order and
handed to their type's agent, with every agent drawing on one shared pool of
capacity.
"""

from collections import Counter, defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import logging
import math
from pathlib import Path
import threading
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as onp
import pandas as pd
from tqdm.autonotebook import tqdm
from typing_extensions import Literal

from slicewise.constraints import Placement
from slicewise.env.catalog import ScenarioConfig
from slicewise.env.scenario import build_request, draw_slice_types
from slicewise.env.types import Scenario, SliceRequest, SliceType
from slicewise.rl import (
    AgentConfig,
    DqnAgent,
    MissingCheckpointError,
    ResourcePool,
    SliceEnv,
    load_agent,
    save_agent,
)
from slicewise.solvers.solver import SolveResult, finish_result
from slicewise.utils import Stopwatch, derive_seed, make_rng

logger = logging.getLogger(__name__)

Mode = Literal["disaggregated", "monolithic"]

MONOLITHIC = "monolithic"
TYPE_KEYS = {t: t.value.lower() for t in SliceType}
ALL_KEYS = tuple(TYPE_KEYS.values()) + (MONOLITHIC,)

# Divergence guard: this many consecutive losses above the threshold abort
DIVERGENCE_THRESHOLD = 1e6
DIVERGENCE_PATIENCE = 100


class TrainingDivergedError(RuntimeError):
    pass


def slice_type_of(key: str) -> Optional[SliceType]:
    """None for the single agent, the slice type otherwise"""
    if key == MONOLITHIC:
        return None
    return SliceType.parse(key)


def default_configs(
    keys: Iterable[str] = ALL_KEYS, seed: int = 0, **overrides
) -> Dict[str, AgentConfig]:
    """Each agent gets its own seed derived from the master seed and its key"""
    configs = {}
    for key in keys:
        slice_type = slice_type_of(key)
        rng_seed = derive_seed(seed, key)
        if slice_type is None:
            configs[key] = AgentConfig.monolithic_default(rng_seed=rng_seed, **overrides)
        else:
            configs[key] = AgentConfig.for_slice_type(
                slice_type, rng_seed=rng_seed, **overrides
            )
    return configs


@dataclass
class SchedulerBundle:
    agents: Dict[SliceType, DqnAgent] = field(default_factory=dict)
    monolithic: Optional[DqnAgent] = None
    audit: Counter = field(default_factory=Counter)
    _audit_lock: threading.Lock = field(
        default_factory=threading.Lock, init=False, repr=False, compare=False
    )

    @property
    def configs(self) -> Dict[str, AgentConfig]:
        configs = {TYPE_KEYS[t]: agent.config for (t, agent) in self.agents.items()}
        if self.monolithic is not None:
            configs[MONOLITHIC] = self.monolithic.config
        return configs

    def agent(self, key: str) -> DqnAgent:
        slice_type = slice_type_of(key)
        if slice_type is None:
            if self.monolithic is None:
                raise ValueError("Bundle has no single agent")
            return self.monolithic
        if slice_type not in self.agents:
            raise ValueError(f"Bundle has no {slice_type.value} agent")
        return self.agents[slice_type]

    def add(self, key: str, agent: DqnAgent):
        slice_type = slice_type_of(key)
        if slice_type is None:
            self.monolithic = agent
        else:
            self.agents[slice_type] = agent

    def record_dispatch(self, key: str, slice_type: SliceType):
        """Count one request handed to an agent; placements may run on threads"""
        with self._audit_lock:
            self.audit[(key, slice_type.value)] += 1


def dispatch(bundle: SchedulerBundle, request: SliceRequest) -> DqnAgent:
    """The agent responsible for the request's slice type"""
    if not isinstance(request.slice_type, SliceType):
        raise ValueError(f"Request {request.id} has no valid slice type")
    agent = bundle.agents.get(request.slice_type)
    if agent is None:
        raise ValueError(f"No agent for {request.slice_type.value} requests")
    bundle.record_dispatch(TYPE_KEYS[request.slice_type], request.slice_type)
    return agent


# Training


def training_scenario(
    key: str,
    episode: int,
    seed: int,
    max_queue: int,
    config: Optional[ScenarioConfig] = None,
) -> Scenario:
    """
    A fresh queue of 1..max_queue requests over the empty infrastructure.
    Type-specific agents get only their type; the single agent gets
    multinomial types.
    """
    config = config or ScenarioConfig()
    rng = make_rng(seed, key, episode)
    length = int(rng.integers(1, max_queue + 1))
    slice_type = slice_type_of(key)
    if slice_type is None:
        types: Sequence[SliceType] = draw_slice_types(length, rng, config)
    else:
        types = [slice_type] * length
    return Scenario(
        infrastructures=tuple(config.infrastructures),
        latency_model=config.latency_model,
        requests=tuple(build_request(i, t, config) for (i, t) in enumerate(types)),
        rng_seed=episode,
        cost_form=config.cost_form,
    )


def checkpoint_path(directory: Union[str, Path], key: str, episode: Optional[int] = None):
    name = key if episode is None else f"{key}-ep{episode:06d}"
    return Path(directory) / f"{name}.json"


def train_agent(
    key: str,
    config: AgentConfig,
    episodes: Optional[int] = None,
    seed: Optional[int] = None,
    scenario_config: Optional[ScenarioConfig] = None,
    checkpoint_dir: Optional[Union[str, Path]] = None,
    progress: bool = True,
) -> Tuple[DqnAgent, pd.DataFrame]:
    """
    Train one agent on generated episodes.

    :param key: "urllc", "embb", "mmtc" or "monolithic"
    :param episodes: defaults to config.episodes
    :param seed: master seed for episode generation, defaults to config.rng_seed
    :param checkpoint_dir: where to write a checkpoint every
        config.checkpoint_interval episodes
    :return: the agent and one report row per episode
    :raises TrainingDivergedError: if the loss stays non-finite or above
        DIVERGENCE_THRESHOLD for DIVERGENCE_PATIENCE consecutive updates
    """
    episodes = config.episodes if episodes is None else episodes
    seed = config.rng_seed if seed is None else seed
    scenario_config = scenario_config or ScenarioConfig()
    slice_type = slice_type_of(key)
    n_infras = len(scenario_config.infrastructures)
    agent = DqnAgent(config, n_infras, key)
    env = SliceEnv(
        config.reward_params,
        config.max_queue,
        config.include_current_vnf,
        monolithic=slice_type is None,
    )

    rows = []
    bad_losses = 0
    for episode in tqdm(range(episodes), desc=f"train {key}", disable=not progress):
        scenario = training_scenario(key, episode, seed, config.max_queue, scenario_config)
        state = env.reset(scenario, slice_type)
        for request in env.queue:
            agent.audit[request.slice_type.value] += 1

        total_reward = 0.0
        losses: List[float] = []
        epsilon = agent.epsilon()
        while not env.done:
            epsilon = agent.epsilon()
            action = agent.act(state, epsilon)
            transition = env.step(action)
            total_reward += transition.reward
            loss = agent.observe(transition)
            state = transition.next_state
            if loss is None:
                continue
            losses.append(loss)
            if not math.isfinite(loss) or loss > DIVERGENCE_THRESHOLD:
                bad_losses += 1
                if bad_losses >= DIVERGENCE_PATIENCE:
                    raise TrainingDivergedError(
                        f"{key} agent diverged at episode {episode}, step "
                        f"{agent.steps}: loss {loss} for {bad_losses} consecutive "
                        f"updates (lr {config.learning_rate}, "
                        f"optimizer {config.optimizer})"
                    )
            else:
                bad_losses = 0

        rows.append(
            {
                "agent": key,
                "episode": episode,
                "reward": total_reward,
                "mean_loss": float(onp.mean(losses)) if losses else math.nan,
                "epsilon": epsilon,
                "steps": agent.steps,
                "placed": len(env.completed),
                "rejected": len(env.rejected),
                **{f"dispatched_{t.value}": agent.audit[t.value] for t in SliceType},
            }
        )
        done_episodes = episode + 1
        if checkpoint_dir is not None and done_episodes % config.checkpoint_interval == 0:
            save_agent(agent, checkpoint_path(checkpoint_dir, key, done_episodes))

    logger.info(
        "Trained %s agent: %d episodes, %d steps, %d target syncs",
        key,
        episodes,
        agent.steps,
        agent.syncs,
    )
    return agent, pd.DataFrame(rows)


def train(
    configs: Mapping[str, AgentConfig],
    episodes: Optional[int] = None,
    seed: Optional[int] = None,
    scenario_config: Optional[ScenarioConfig] = None,
    checkpoint_dir: Optional[Union[str, Path]] = None,
    threads: int = 1,
    progress: bool = True,
) -> Tuple[SchedulerBundle, pd.DataFrame]:
    """
    Train every agent in configs, optionally in parallel threads.

    Agents share no state, so results do not depend on threads.

    :return: the trained bundle and the concatenated training report
    """

    def run(key):
        return train_agent(
            key,
            configs[key],
            episodes,
            seed,
            scenario_config,
            checkpoint_dir,
            progress and threads == 1,
        )

    keys = list(configs)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, keys))
    else:
        results = [run(key) for key in keys]

    bundle = SchedulerBundle()
    for (key, (agent, _)) in zip(keys, results):
        bundle.add(key, agent)
    report = pd.concat([frame for (_, frame) in results], ignore_index=True)
    return bundle, report


# Placement


def feasible_argmax(q_values, pool: ResourcePool, vnf) -> Optional[int]:
    """Highest-Q infrastructure with room for the VNF, ties to the lowest index"""
    order = sorted(range(len(q_values)), key=lambda m: (-float(q_values[m]), m))
    return next((m for m in order if pool.fits(vnf, m)), None)


def place_slices(
    bundle: SchedulerBundle, scenario: Scenario, mode: Mode = "disaggregated"
) -> SolveResult:
    """
    Greedy placement of the scenario's requests in arrival order.

    When the best action lacks room, the best action with room is taken; a
    slice that fits nowhere is rejected and its partial allocation returned.
    wall_time sums decision time (forward passes and action choice) over
    agents; parallel_wall_time is the largest single agent's share.
    """
    pool = ResourcePool.for_scenario(scenario)
    requests = sorted(scenario.requests, key=lambda r: r.arrival_index)
    envs: Dict[str, SliceEnv] = {}
    agents: Dict[str, DqnAgent] = {}
    if mode == "disaggregated":
        for request in requests:
            key = TYPE_KEYS[request.slice_type]
            if key not in envs:
                agent = bundle.agents.get(request.slice_type)
                if agent is None:
                    raise ValueError(f"No agent for {request.slice_type.value} requests")
                agents[key] = agent
                envs[key] = _inference_env(agent)
                envs[key].reset(scenario, request.slice_type, pool)
    elif mode == "monolithic":
        agents[MONOLITHIC] = bundle.agent(MONOLITHIC)
        envs[MONOLITHIC] = _inference_env(agents[MONOLITHIC])
        envs[MONOLITHIC].reset(scenario, None, pool)
    else:
        raise NotImplementedError(f"Unknown placement mode {mode!r}")

    timers: Dict[str, Stopwatch] = defaultdict(Stopwatch)
    for request in requests:
        if mode == "disaggregated":
            key = TYPE_KEYS[request.slice_type]
            agent = dispatch(bundle, request)
        else:
            key = MONOLITHIC
            agent = agents[key]
        env = envs[key]
        assert env.current_request is request
        while True:
            vnf = env.current_vnf
            state = env.encode_state().vector()
            with timers[key]:
                q_values = onp.asarray(agent.online.forward(state))
                action = feasible_argmax(q_values, pool, vnf)
            if action is None:
                logger.warning(
                    "Rejected slice %s (%s): %s fits on no infrastructure",
                    request.id,
                    request.slice_type.value,
                    vnf.name,
                )
                env.reject_current()
                break
            if env.place_current(action):
                break

    placement = Placement()
    rejected: List[str] = []
    for env in envs.values():
        placement = placement.merge(env.placement)
        rejected.extend(env.rejected)
    rejected_ids = set(rejected)
    rejected = [r.id for r in requests if r.id in rejected_ids]

    times = {key: watch.elapsed for (key, watch) in timers.items()}
    algorithm = "marl" if mode == "disaggregated" else "mono"
    return finish_result(
        placement,
        scenario,
        algorithm,
        sum(times.values()),
        rejected=rejected,
        parallel_wall_time=max(times.values(), default=0.0),
        extras={"agent_times": times},
    )


def _inference_env(agent: DqnAgent) -> SliceEnv:
    config = agent.config
    return SliceEnv(
        config.reward_params,
        config.max_queue,
        config.include_current_vnf,
        monolithic=config.monolithic,
    )


# Checkpoints


def save_bundle(bundle: SchedulerBundle, directory: Union[str, Path]) -> List[Path]:
    """One <key>.json per agent"""
    paths = []
    for (slice_type, agent) in sorted(bundle.agents.items(), key=lambda kv: kv[0].index):
        paths.append(save_agent(agent, checkpoint_path(directory, TYPE_KEYS[slice_type])))
    if bundle.monolithic is not None:
        paths.append(save_agent(bundle.monolithic, checkpoint_path(directory, MONOLITHIC)))
    return paths


def load_bundle(
    directory: Union[str, Path], keys: Iterable[str] = tuple(TYPE_KEYS.values())
) -> SchedulerBundle:
    """
    :raises MissingCheckpointError: if any requested agent has no checkpoint
    """
    keys = list(keys)
    missing = [k for k in keys if not checkpoint_path(directory, k).exists()]
    if missing:
        raise MissingCheckpointError(
            f"No checkpoint for {', '.join(missing)} in {directory}"
        )
    bundle = SchedulerBundle()
    for key in keys:
        bundle.add(key, load_agent(checkpoint_path(directory, key)))
    return bundle
