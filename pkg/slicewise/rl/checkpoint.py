"""
Versioned JSON checkpoints.

Weights are written row-major as float.hex strings so a load reproduces
every float64 bit, and the file bytes depend only on the weights and the
config: no timestamps, sorted keys.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as onp

from .agent import AgentConfig, DqnAgent
from .network import QNetwork

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


class MissingCheckpointError(FileNotFoundError):
    pass


def _encode_matrix(values: onp.ndarray) -> List[Any]:
    if values.ndim == 1:
        return [float(v).hex() for v in values]
    return [_encode_matrix(row) for row in values]


def _decode_matrix(values) -> onp.ndarray:
    def decode(v):
        if isinstance(v, list):
            return [decode(item) for item in v]
        return float.fromhex(v)

    return onp.array(decode(values), dtype=onp.float64)


def network_to_dict(net: QNetwork) -> Dict[str, Any]:
    return {
        "layer_sizes": list(net.layer_sizes),
        "layers": [
            {"W": _encode_matrix(W), "b": _encode_matrix(b)}
            for (W, b) in net.numpy_params()
        ],
    }


def network_from_dict(data: Dict[str, Any]) -> QNetwork:
    params = [
        (_decode_matrix(layer["W"]), _decode_matrix(layer["b"]))
        for layer in data["layers"]
    ]
    return QNetwork(data["layer_sizes"], params)


def agent_to_dict(agent: DqnAgent) -> Dict[str, Any]:
    return {
        "format_version": FORMAT_VERSION,
        "name": agent.name,
        "n_infrastructures": agent.n_actions,
        "config": agent.config.to_dict(),
        "config_hash": agent.config.config_hash(),
        "network": network_to_dict(agent.online),
    }


def save_agent(agent: DqnAgent, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(agent_to_dict(agent), sort_keys=True, indent=1)
    path.write_text(text + "\n")
    logger.info("Saved %s agent checkpoint to %s", agent.name or "unnamed", path)
    return path


def load_agent(path: Union[str, Path]) -> DqnAgent:
    """
    Rebuild an agent from a checkpoint: config, online and target weights.
    Replay contents and optimizer state are not kept.
    """
    path = Path(path)
    if not path.exists():
        raise MissingCheckpointError(f"No checkpoint at {path}")
    data = json.loads(path.read_text())
    version = data.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"Unsupported checkpoint format version {version!r} in {path}")
    config = AgentConfig.from_dict(data["config"])
    if config.config_hash() != data["config_hash"]:
        raise ValueError(f"Config hash mismatch in {path}")
    agent = DqnAgent(config, data["n_infrastructures"], data.get("name", ""))
    agent.load_network(network_from_dict(data["network"]))
    return agent
