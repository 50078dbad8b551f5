"""
Jitted value-network math. Parameters are a list of (W, b) pairs with W of
shape (fan_in, fan_out); hidden layers are rectified, the output is affine.
"""

from functools import partial
import logging

from jax import jit, value_and_grad
import jax.numpy as np

logger = logging.getLogger(__name__)

# Forward pass


def _forward(params, states):
    activations = states
    for (W, b) in params[:-1]:
        activations = np.maximum(activations @ W + b, 0.0)
    W, b = params[-1]
    return activations @ W + b


@jit
def q_values(params, states):
    logger.debug(
        "Tracing q_values for layers %s and input %s",
        [W.shape for (W, _) in params],
        states.shape,
    )
    return _forward(params, states)


@jit
def greedy_actions(params, states):
    # argmax picks the first maximum, so ties go to the lowest index
    return np.argmax(_forward(params, states), axis=-1)


# Semi-gradient TD loss: targets are constants


def td_loss(params, states, actions, targets):
    predictions = _forward(params, states)
    taken = np.take_along_axis(predictions, actions[:, None], axis=1)[:, 0]
    return np.mean((targets - taken) ** 2)


td_loss_and_grad = jit(value_and_grad(td_loss))


# Optimizer step


@partial(jit, static_argnums=(0, 1))
def optimizer_step(update_fun, get_params, step, opt_state, states, actions, targets):
    logger.debug(
        "Tracing optimizer_step for batch of %d states of width %d",
        states.shape[0],
        states.shape[1],
    )
    loss, grads = value_and_grad(td_loss)(
        get_params(opt_state), states, actions, targets
    )
    return loss, update_fun(step, grads, opt_state)
