from typing import NamedTuple

import numpy as onp


class Batch(NamedTuple):
    states: onp.ndarray
    actions: onp.ndarray
    rewards: onp.ndarray
    next_states: onp.ndarray
    dones: onp.ndarray


class ReplayBuffer:
    """
    Fixed-capacity FIFO of transitions stored as state vectors.

    Once full, each push overwrites the oldest entry.
    """

    def __init__(self, capacity: int, state_width: int):
        if capacity < 1:
            raise ValueError(f"Replay capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.state_width = state_width
        self.states = onp.zeros((capacity, state_width))
        self.actions = onp.zeros(capacity, dtype=onp.int64)
        self.rewards = onp.zeros(capacity)
        self.next_states = onp.zeros((capacity, state_width))
        self.dones = onp.zeros(capacity, dtype=bool)
        self.cursor = 0
        self.size = 0
        self.pushed = 0

    def __len__(self):
        return self.size

    def push(self, state, action: int, reward: float, next_state, done: bool):
        i = self.cursor
        self.states[i] = state
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_states[i] = next_state
        self.dones[i] = done
        self.cursor = (self.cursor + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)
        self.pushed += 1

    def push_transition(self, transition):
        self.push(
            transition.state.vector(),
            transition.action,
            transition.reward,
            transition.next_state.vector(),
            transition.done,
        )

    def _ordered(self) -> onp.ndarray:
        """Storage indices from oldest to newest"""
        if self.size < self.capacity:
            return onp.arange(self.size)
        return (onp.arange(self.capacity) + self.cursor) % self.capacity

    def contents(self) -> Batch:
        return self._take(self._ordered())

    def _take(self, indices) -> Batch:
        return Batch(
            self.states[indices],
            self.actions[indices],
            self.rewards[indices],
            self.next_states[indices],
            self.dones[indices],
        )

    def sample(self, batch_size: int, rng: onp.random.Generator) -> Batch:
        """Uniform batch, without replacement within the batch"""
        if batch_size > self.size:
            raise ValueError(
                f"Cannot sample {batch_size} transitions from {self.size} stored"
            )
        return self._take(rng.choice(self.size, size=batch_size, replace=False))
