"""
The per-slice-type placement MDP.

An episode walks a queue of slice requests in arrival order and places one
VNF per step. The action is an infrastructure index. A step is rewarded

- delta1 if the chosen infrastructure lacks room for the VNF (the same VNF
  is retried on the next step, and the slice is rejected after 3 * M
  consecutive violations),
- delta2[m] otherwise, plus
- delta3 on the step that completes a slice meeting its latency budget and
  consolidation requirement.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as onp

from slicewise.constraints import (
    CAPACITY_TOLERANCE,
    Placement,
    check_consolidation,
    check_latency,
)
from slicewise.env.catalog import SLA_SCALE_MS
from slicewise.env.scenario import vnfs_total_demand
from slicewise.env.types import Scenario, SliceRequest, SliceType, VnfSpec
from slicewise.scale import Scale

MAX_QUEUE = 16


class EpisodeDoneError(RuntimeError):
    pass


@dataclass(frozen=True)
class RewardParams:
    delta1: float = -100.0
    delta2: Tuple[float, ...] = (1.0, 2.0, 4.0)
    delta3: float = 15.0
    # Per-type completion reward, in SliceType order; overrides delta3
    delta3_by_type: Optional[Tuple[float, float, float]] = None

    def __post_init__(self):
        if not self.delta1 < 0:
            raise ValueError(f"delta1 must be negative, got {self.delta1}")
        completion = self.delta3_by_type or (self.delta3,)
        if not all(d > 0 for d in completion):
            raise ValueError(f"delta3 must be positive, got {completion}")

    def completion_reward(self, slice_type: SliceType) -> float:
        if self.delta3_by_type is not None:
            return self.delta3_by_type[slice_type.index]
        return self.delta3


DEFAULT_DELTA3 = {SliceType.URLLC: 20.0, SliceType.eMBB: 15.0, SliceType.mMTC: 10.0}


def reward_params_for(slice_type: Optional[SliceType] = None) -> RewardParams:
    """Defaults for one slice type's agent, or per-type rewards for a single agent"""
    if slice_type is None:
        return RewardParams(
            delta3_by_type=tuple(DEFAULT_DELTA3[t] for t in SliceType)  # type: ignore
        )
    return RewardParams(delta3=DEFAULT_DELTA3[slice_type])


class ResourcePool:
    """Remaining cpu and mem per infrastructure"""

    def __init__(self, cpu_capacity, mem_capacity):
        self.cpu_capacity = onp.array(cpu_capacity, dtype=onp.float64)
        self.mem_capacity = onp.array(mem_capacity, dtype=onp.float64)
        self.cpu_available = self.cpu_capacity.copy()
        self.mem_available = self.mem_capacity.copy()

    @classmethod
    def for_scenario(cls, scenario: Scenario) -> "ResourcePool":
        return cls(scenario.cpu_capacity, scenario.mem_capacity)

    @property
    def size(self) -> int:
        return len(self.cpu_capacity)

    def fits(self, vnf: VnfSpec, m: int) -> bool:
        return bool(
            vnf.cpu_demand <= self.cpu_available[m] + CAPACITY_TOLERANCE
            and vnf.mem_demand <= self.mem_available[m] + CAPACITY_TOLERANCE
        )

    def feasible_actions(self, vnf: VnfSpec) -> List[int]:
        return [m for m in range(self.size) if self.fits(vnf, m)]

    def consume(self, vnf: VnfSpec, m: int):
        self.cpu_available[m] -= vnf.cpu_demand
        self.mem_available[m] -= vnf.mem_demand

    def release(self, vnf: VnfSpec, m: int):
        self.cpu_available[m] += vnf.cpu_demand
        self.mem_available[m] += vnf.mem_demand

    def copy(self) -> "ResourcePool":
        pool = ResourcePool(self.cpu_capacity, self.mem_capacity)
        pool.cpu_available = self.cpu_available.copy()
        pool.mem_available = self.mem_available.copy()
        return pool


@dataclass
class MdpState:
    """
    available: (cpu, mem) per infrastructure, each divided by its capacity
    queued_count: slices still in the queue, the current one included, at most
      max_queue
    total_demand: raw (cores, GiB) still to place for the queued slices
    sla_params: raw latency budgets of the queued slices, zero-padded
    current_vnf: raw (cores, GiB) of the VNF to place, if encoded
    type_onehot: slice type of the current slice, single-agent variant only
    """

    available: onp.ndarray
    queued_count: int
    total_demand: Tuple[float, float]
    sla_params: onp.ndarray
    current_vnf: Optional[Tuple[float, float]] = None
    type_onehot: Optional[onp.ndarray] = None
    scales: Dict[str, Scale] = field(default_factory=dict, repr=False)

    @property
    def width(self) -> int:
        return len(self.vector())

    def vector(self) -> onp.ndarray:
        """Fixed-width network input with every component roughly in [0, 1]"""
        parts = [
            self.available,
            [self.scales["queue"].normalize_point(self.queued_count)],
            [
                self.scales["cpu_total"].normalize_point(self.total_demand[0]),
                self.scales["mem_total"].normalize_point(self.total_demand[1]),
            ],
            self.scales["sla"].normalize_points(self.sla_params),
        ]
        if self.current_vnf is not None:
            parts.append(
                [
                    self.scales["cpu_vnf"].normalize_point(self.current_vnf[0]),
                    self.scales["mem_vnf"].normalize_point(self.current_vnf[1]),
                ]
            )
        if self.type_onehot is not None:
            parts.append(self.type_onehot)
        return onp.concatenate([onp.asarray(p, dtype=onp.float64) for p in parts])


def state_width(
    n_infrastructures: int,
    max_queue: int = MAX_QUEUE,
    include_current_vnf: bool = True,
    monolithic: bool = False,
) -> int:
    return (
        2 * n_infrastructures
        + 1
        + 2
        + max_queue
        + (2 if include_current_vnf else 0)
        + (len(SliceType) if monolithic else 0)
    )


def one_hot(action: int, n_actions: int) -> onp.ndarray:
    vector = onp.zeros(n_actions)
    vector[action] = 1.0
    return vector


@dataclass
class Transition:
    state: MdpState
    action: int
    reward: float
    next_state: MdpState
    done: bool
    info: Dict[str, object] = field(default_factory=dict)


@dataclass
class StepRecord:
    """What the env saw and did on one step, for reward audits"""

    slice_id: str
    vnf_index: int
    action: int
    fits: bool
    completed: bool
    sla_ok: bool
    rejected: bool
    reward: float


class SliceEnv:
    """
    Placement environment over a queue of slice requests.

    reset(scenario, slice_type) queues the scenario's requests of that type
    (all requests when slice_type is None, for the single-agent variant).
    Pass a ResourcePool to reset to inherit partially consumed capacity.
    """

    def __init__(
        self,
        reward_params: Optional[RewardParams] = None,
        max_queue: int = MAX_QUEUE,
        include_current_vnf: bool = True,
        monolithic: bool = False,
    ):
        self.reward_params = reward_params or RewardParams()
        self.max_queue = max_queue
        self.include_current_vnf = include_current_vnf
        self.monolithic = monolithic
        self.scenario: Optional[Scenario] = None
        self.slice_type: Optional[SliceType] = None
        self.queue: List[SliceRequest] = []
        self.history: List[StepRecord] = []

    # Episode bookkeeping

    def reset(
        self,
        scenario: Scenario,
        slice_type: Optional[SliceType] = None,
        pool: Optional[ResourcePool] = None,
    ) -> MdpState:
        if len(self.reward_params.delta2) != scenario.n_infrastructures:
            raise ValueError(
                f"delta2 has {len(self.reward_params.delta2)} entries for "
                f"{scenario.n_infrastructures} infrastructures"
            )
        self.scenario = scenario
        self.slice_type = slice_type
        requests = sorted(scenario.requests, key=lambda r: r.arrival_index)
        self.queue = [
            r for r in requests if slice_type is None or r.slice_type is slice_type
        ]
        self.pool = pool if pool is not None else ResourcePool.for_scenario(scenario)
        self.placement = Placement()
        self.rejected: List[str] = []
        self.completed: List[str] = []
        self.history = []
        self.position = 0
        self.vnf_index = 0
        self.retries = 0
        self._scales = self._make_scales(scenario)
        return self.encode_state()

    def _make_scales(self, scenario: Scenario) -> Dict[str, Scale]:
        smallest = min(scenario.infrastructures, key=lambda i: (i.cpu_capacity, i.id))
        return {
            "queue": Scale(0.0, float(self.max_queue)),
            "cpu_total": Scale(0.0, float(scenario.cpu_capacity.sum())),
            "mem_total": Scale(0.0, float(scenario.mem_capacity.sum())),
            "sla": Scale(0.0, SLA_SCALE_MS),
            "cpu_vnf": Scale(0.0, smallest.cpu_capacity),
            "mem_vnf": Scale(0.0, min(i.mem_capacity for i in scenario.infrastructures)),
        }

    @property
    def done(self) -> bool:
        return self.position >= len(self.queue)

    @property
    def n_actions(self) -> int:
        return self.pool.size

    @property
    def current_request(self) -> Optional[SliceRequest]:
        return None if self.done else self.queue[self.position]

    @property
    def current_vnf(self) -> Optional[VnfSpec]:
        request = self.current_request
        return None if request is None else request.vnfs[self.vnf_index]

    @property
    def state_width(self) -> int:
        assert self.scenario is not None
        return state_width(
            self.scenario.n_infrastructures,
            self.max_queue,
            self.include_current_vnf,
            self.monolithic,
        )

    def encode_state(self) -> MdpState:
        """
        Snapshot of the environment as an MdpState.

        Only the next max_queue slices are visible: longer queues saturate
        the count and leave the later slices out of the demand and budgets.
        """
        queued = self.queue[self.position : self.position + self.max_queue]
        pool = self.pool
        available = onp.empty(2 * pool.size)
        for m in range(pool.size):
            available[2 * m] = Scale(0.0, pool.cpu_capacity[m]).normalize_point(
                pool.cpu_available[m]
            )
            available[2 * m + 1] = Scale(0.0, pool.mem_capacity[m]).normalize_point(
                pool.mem_available[m]
            )

        remaining: List[VnfSpec] = []
        if queued:
            remaining.extend(queued[0].vnfs[self.vnf_index :])
            for request in queued[1:]:
                remaining.extend(request.vnfs)
        total_demand = vnfs_total_demand(remaining)

        sla = onp.zeros(self.max_queue)
        sla[: len(queued)] = [r.latency_budget_ms for r in queued]

        current = None
        if self.include_current_vnf:
            vnf = self.current_vnf
            current = (0.0, 0.0) if vnf is None else (vnf.cpu_demand, vnf.mem_demand)

        onehot = None
        if self.monolithic:
            onehot = onp.zeros(len(SliceType))
            if queued:
                onehot[queued[0].slice_type.index] = 1.0

        return MdpState(
            available=available,
            queued_count=len(queued),
            total_demand=total_demand,
            sla_params=sla,
            current_vnf=current,
            type_onehot=onehot,
            scales=self._scales,
        )

    def decode_available(self, state: MdpState) -> Tuple[onp.ndarray, onp.ndarray]:
        """Absolute (cpu, mem) availability encoded in a state"""
        pool = self.pool
        cpu = onp.array(
            [
                Scale(0.0, pool.cpu_capacity[m]).denormalize_point(state.available[2 * m])
                for m in range(pool.size)
            ]
        )
        mem = onp.array(
            [
                Scale(0.0, pool.mem_capacity[m]).denormalize_point(
                    state.available[2 * m + 1]
                )
                for m in range(pool.size)
            ]
        )
        return cpu, mem

    # Dynamics

    def step(self, action: int) -> Transition:
        if self.done:
            raise EpisodeDoneError("step() called on a finished episode")
        if not 0 <= action < self.n_actions:
            raise ValueError(f"Action {action} outside 0..{self.n_actions - 1}")
        state = self.encode_state()
        request = self.current_request
        vnf = self.current_vnf
        assert request is not None and vnf is not None
        vnf_index = self.vnf_index
        params = self.reward_params

        fits = self.pool.fits(vnf, action)
        completed = sla_ok = rejected = False
        if not fits:
            reward = params.delta1
            self.retries += 1
            if self.retries >= 3 * self.n_actions:
                rejected = True
                self._reject_current(rollback=False)
        else:
            reward = params.delta2[action]
            self.pool.consume(vnf, action)
            self.placement.assign(request.id, vnf_index, action)
            self.retries = 0
            self.vnf_index += 1
            if self.vnf_index == len(request.vnfs):
                completed = True
                sla_ok = self.sla_satisfied(request)
                if sla_ok:
                    reward += params.completion_reward(request.slice_type)
                self.completed.append(request.id)
                self._advance()

        self.history.append(
            StepRecord(
                request.id, vnf_index, action, fits, completed, sla_ok, rejected, reward
            )
        )
        return Transition(
            state=state,
            action=action,
            reward=reward,
            next_state=self.encode_state(),
            done=self.done,
            info={
                "slice_id": request.id,
                "slice_type": request.slice_type,
                "vnf_index": vnf_index,
                "fits": fits,
                "completed": completed,
                "sla_ok": sla_ok,
                "rejected": rejected,
            },
        )

    def sla_satisfied(self, request: SliceRequest) -> bool:
        assert self.scenario is not None
        return check_latency(self.placement, request, self.scenario) and (
            check_consolidation(self.placement, request)
        )

    def _advance(self):
        self.position += 1
        self.vnf_index = 0
        self.retries = 0

    def _reject_current(self, rollback: bool):
        request = self.current_request
        assert request is not None
        if rollback:
            for i in range(self.vnf_index):
                m = self.placement.get(request.id, i)
                if m is not None:
                    self.pool.release(request.vnfs[i], m)
        self.placement.drop_slice(request.id)
        self.rejected.append(request.id)
        self._advance()

    def place_current(self, action: int) -> bool:
        """
        Inference-time placement of the current VNF without rewards.

        :return: True when this completed the current slice
        """
        request, vnf = self.current_request, self.current_vnf
        assert request is not None and vnf is not None
        if not self.pool.fits(vnf, action):
            raise ValueError(f"{vnf.name} does not fit on infrastructure {action}")
        self.pool.consume(vnf, action)
        self.placement.assign(request.id, self.vnf_index, action)
        self.vnf_index += 1
        if self.vnf_index == len(request.vnfs):
            self.completed.append(request.id)
            self._advance()
            return True
        return False

    def reject_current(self):
        """Drop the current slice at inference, returning its capacity"""
        self._reject_current(rollback=True)

