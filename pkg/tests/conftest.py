from typing import Optional, Sequence

import numpy as onp
import pytest

from slicewise.env import (
    Scenario,
    ScenarioConfig,
    SliceType,
    build_request,
    default_latency_model,
)
from slicewise.env.catalog import DEFAULT_INFRASTRUCTURES
from slicewise.rl import AgentConfig, DqnAgent
from slicewise.scheduler import TYPE_KEYS, SchedulerBundle
from slicewise.utils import derive_seed

# One full slice of the default catalog
SLICE_CPU = 5.3
SLICE_MEM = 4.56
SLICE_COST_WEIGHT = 7.2416

URLLC, EMBB, MMTC = SliceType.URLLC, SliceType.eMBB, SliceType.mMTC


def scenario_of(
    types: Sequence[SliceType],
    config: Optional[ScenarioConfig] = None,
    infrastructures=None,
    seed: int = 0,
) -> Scenario:
    """A scenario with one slice per entry of types, in that arrival order"""
    config = config or ScenarioConfig()
    return Scenario(
        infrastructures=tuple(infrastructures or config.infrastructures),
        latency_model=config.latency_model,
        requests=tuple(build_request(i, t, config) for (i, t) in enumerate(types)),
        rng_seed=seed,
        cost_form=config.cost_form,
    )


def tiny_agent_config(slice_type=None, **overrides) -> AgentConfig:
    """Small, quickly trained agents for smoke and determinism tests"""
    settings = dict(
        batch_size=8,
        buffer_capacity=256,
        episodes=20,
        sync_interval=16,
        epsilon_decay=100.0,
        hidden_width=16,
        hidden_layers=2,
        checkpoint_interval=10,
    )
    settings.update(overrides)
    if slice_type is None:
        return AgentConfig.monolithic_default(**settings)
    return AgentConfig.for_slice_type(slice_type, **settings)


def untrained_bundle(monolithic: bool = False) -> SchedulerBundle:
    """Freshly initialized tiny agents for every slice type"""
    bundle = SchedulerBundle()
    for slice_type in SliceType:
        key = TYPE_KEYS[slice_type]
        config = tiny_agent_config(slice_type, rng_seed=derive_seed(0, key))
        bundle.add(key, DqnAgent(config, name=key))
    if monolithic:
        config = tiny_agent_config(None, rng_seed=derive_seed(0, "monolithic"))
        bundle.add("monolithic", DqnAgent(config, name="monolithic"))
    return bundle


@pytest.fixture(scope="module")
def default_config():
    return ScenarioConfig()


@pytest.fixture(scope="module")
def latency_model():
    return default_latency_model()


@pytest.fixture(scope="module")
def infrastructures():
    return DEFAULT_INFRASTRUCTURES


@pytest.fixture(scope="module")
def one_of_each():
    return scenario_of([URLLC, EMBB, MMTC])


@pytest.fixture(scope="module")
def single_embb():
    return scenario_of([EMBB])


@pytest.fixture(scope="module")
def single_urllc():
    return scenario_of([URLLC])


@pytest.fixture(scope="module")
def single_mmtc():
    return scenario_of([MMTC])


@pytest.fixture
def rng():
    return onp.random.default_rng(1234)
