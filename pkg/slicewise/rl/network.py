from typing import List, Optional, Sequence, Tuple

import jax.numpy as np
import numpy as onp

import slicewise.static as static

Params = List[Tuple[np.ndarray, np.ndarray]]


def glorot_uniform(
    layer_sizes: Sequence[int], rng: onp.random.Generator
) -> List[Tuple[onp.ndarray, onp.ndarray]]:
    """Weights uniform in +-sqrt(6 / (fan_in + fan_out)), zero biases"""
    params = []
    for (fan_in, fan_out) in zip(layer_sizes[:-1], layer_sizes[1:]):
        limit = onp.sqrt(6.0 / (fan_in + fan_out))
        W = rng.uniform(-limit, limit, size=(fan_in, fan_out))
        params.append((W, onp.zeros(fan_out)))
    return params


class QNetwork:
    """
    Dense feed-forward value network: one Q-value per infrastructure.

    forward() and argmax() both go straight to the jitted functions in
    slicewise.static; argmax never calls forward.
    """

    def __init__(self, layer_sizes: Sequence[int], params: Optional[Params] = None):
        if len(layer_sizes) < 2:
            raise ValueError(f"Need at least input and output widths, got {layer_sizes}")
        self.layer_sizes = tuple(int(n) for n in layer_sizes)
        if params is None:
            params = [
                (onp.zeros((i, o)), onp.zeros(o))
                for (i, o) in zip(self.layer_sizes[:-1], self.layer_sizes[1:])
            ]
        self.params = self._as_params(params)

    def _as_params(self, params) -> Params:
        if len(params) != len(self.layer_sizes) - 1:
            raise ValueError("Parameter count does not match layer sizes")
        converted = []
        shapes = zip(self.layer_sizes[:-1], self.layer_sizes[1:])
        for ((W, b), (i, o)) in zip(params, shapes):
            W = np.asarray(W, dtype=np.float64)
            b = np.asarray(b, dtype=np.float64)
            if W.shape != (i, o) or b.shape != (o,):
                raise ValueError(
                    f"Layer shape {W.shape}/{b.shape} does not match ({i}, {o})"
                )
            converted.append((W, b))
        return converted

    @classmethod
    def initialize(cls, layer_sizes: Sequence[int], seed: int) -> "QNetwork":
        rng = onp.random.default_rng(seed)
        return cls(layer_sizes, glorot_uniform(layer_sizes, rng))

    @property
    def input_width(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_actions(self) -> int:
        return self.layer_sizes[-1]

    def _check_input(self, states) -> np.ndarray:
        states = np.asarray(states, dtype=np.float64)
        if states.shape[-1] != self.input_width:
            raise ValueError(
                f"State width {states.shape[-1]} does not match network input "
                f"width {self.input_width}"
            )
        return states

    def forward(self, states) -> np.ndarray:
        """Q-values for one state (shape (M,)) or a batch (shape (B, M))"""
        return static.q_values(self.params, self._check_input(states))

    def argmax(self, states):
        """Greedy action(s), ties to the lowest index"""
        actions = static.greedy_actions(self.params, self._check_input(states))
        if actions.ndim == 0:
            return int(actions)
        return onp.asarray(actions)

    def copy(self) -> "QNetwork":
        # jax arrays are immutable, sharing them is a copy
        return QNetwork(self.layer_sizes, list(self.params))

    def load(self, other: "QNetwork"):
        if other.layer_sizes != self.layer_sizes:
            raise ValueError("Networks do not share an architecture")
        self.params = list(other.params)

    def numpy_params(self) -> List[Tuple[onp.ndarray, onp.ndarray]]:
        return [(onp.asarray(W), onp.asarray(b)) for (W, b) in self.params]

    def same_weights(self, other: "QNetwork") -> bool:
        return self.layer_sizes == other.layer_sizes and all(
            onp.array_equal(W1, W2) and onp.array_equal(b1, b2)
            for ((W1, b1), (W2, b2)) in zip(self.numpy_params(), other.numpy_params())
        )
