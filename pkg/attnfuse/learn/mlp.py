# -*- coding: utf-8 -*-

# Copyright © 2023-2024 the attnfuse authors.

# Permission is hereby granted, free of charge, to any
# person obtaining a copy of this software and associated
# documentation files (the "Software"), to deal in the
# Software without restriction, including without limitation
# the rights to use, copy, modify, merge, publish,
# distribute, sublicense, and/or sell copies of the
# Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice
# shall be included in all copies or substantial portions of
# the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY
# KIND, EXPRESS OR IMPLIED, INCLUDING BUT NOT LIMITED TO THE
# WARRANTIES OF MERCHANTABILITY, FITNESS FOR A PARTICULAR
# PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE AUTHORS
# OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR
# OTHER LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR
# OTHERWISE, ARISING FROM, OUT OF OR IN CONNECTION WITH THE
# SOFTWARE OR THE USE OR OTHER DEALINGS IN THE SOFTWARE.

"""The score fusion network: inputs -> 16 ReLU -> 8 ReLU -> 1 sigmoid."""

import dataclasses
import typing

import numpy as np

from ..errors import DivergedLoss, SingleClassInput, WrongArity
from ..log import stage_logger
from .svm import as_signs

__all__ = (
    'HIDDEN_UNITS',
    'MlpFusionModel',
    'init_mlp',
    'mlp_forward',
    'loss_and_gradients',
    'train_mlp',
)

LOGGER = stage_logger('learn')

HIDDEN_UNITS = (16, 8)
PARAMETER_NAMES = ('W1', 'b1', 'W2', 'b2', 'W3', 'b3')


@dataclasses.dataclass(eq=False)
class MlpFusionModel:
    """Weights are stored as (fan_out, fan_in) matrices."""

    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    W3: np.ndarray
    b3: np.ndarray
    dropout_rate: float = 0.5
    seed: int = 0
    loss_history: typing.List[float] = dataclasses.field(default_factory=list)

    @property
    def n_inputs(self) -> int:
        return self.W1.shape[1]

    @property
    def parameters(self) -> typing.Dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PARAMETER_NAMES}

    @property
    def parameter_count(self) -> int:
        return sum(p.size for p in self.parameters.values())

    def copy(self):
        return dataclasses.replace(self, loss_history=list(self.loss_history),
                                   **{k: v.copy() for k, v in self.parameters.items()})

    def as_dict(self):
        data = dict(self.parameters)
        data.update(dropout_rate=self.dropout_rate, seed=self.seed)
        return data

    @classmethod
    def from_dict(cls, data):
        params = {name: np.array(data[name], dtype=float) for name in PARAMETER_NAMES}
        return cls(dropout_rate=float(data['dropout_rate']), seed=int(data['seed']), **params)


def init_mlp(n_inputs: int = 7, seed: int = 0, dropout_rate: float = 0.5) -> MlpFusionModel:
    """Glorot-uniform weights drawn from ``seed``, zero biases."""
    rng = np.random.default_rng(seed)
    sizes = (n_inputs,) + HIDDEN_UNITS + (1,)
    params = {}
    for k, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:]), start=1):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        params['W{0}'.format(k)] = rng.uniform(-limit, limit, size=(fan_out, fan_in))
        params['b{0}'.format(k)] = np.zeros(fan_out)
    return MlpFusionModel(dropout_rate=dropout_rate, seed=seed, **params)


def _sigmoid(z):
    return np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))), np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))


def _check_arity(model, S):
    if S.shape[-1] != model.n_inputs:
        raise WrongArity('expected {0} scores, got {1}'.format(model.n_inputs, S.shape[-1]), stage='fuse')


def _dropout_masks(model, n, rng):
    keep = 1.0 - model.dropout_rate
    masks = []
    for units in HIDDEN_UNITS:
        if model.dropout_rate <= 0:
            masks.append(np.ones((n, units)))
        else:
            masks.append((rng.random((n, units)) < keep) / keep)
    return masks


def _forward(model, S, masks=None):
    z1 = S @ model.W1.T + model.b1
    h1 = np.maximum(z1, 0.0)
    if masks is not None:
        h1 = h1 * masks[0]
    z2 = h1 @ model.W2.T + model.b2
    h2 = np.maximum(z2, 0.0)
    if masks is not None:
        h2 = h2 * masks[1]
    z3 = h2 @ model.W3.T + model.b3
    return (z1, h1, z2, h2, z3[:, 0])


def mlp_forward(model: MlpFusionModel, s, train_mode: bool = False, rng=None):
    """Fused score in (0, 1) for one score vector or a batch of them.

    With ``train_mode`` dropout is applied (inverted, rate
    ``model.dropout_rate``) using ``rng``.
    """
    S = np.asarray(s, dtype=float)
    single = S.ndim == 1
    S = np.atleast_2d(S)
    _check_arity(model, S)
    masks = None
    if train_mode:
        rng = rng if rng is not None else np.random.default_rng(model.seed)
        masks = _dropout_masks(model, len(S), rng)
    out = _sigmoid(_forward(model, S, masks)[-1])
    return float(out[0]) if single else out


def loss_and_gradients(model: MlpFusionModel, S, y, masks=None):
    """Mean binary cross-entropy and its gradient for every parameter.

    ``y`` holds 0/1 targets (or +-1 / Label values).
    """
    S = np.atleast_2d(np.asarray(S, dtype=float))
    _check_arity(model, S)
    t = (as_signs(y) > 0).astype(float)
    n = len(S)
    z1, h1, z2, h2, z3 = _forward(model, S, masks)
    # log(1 + exp(-z)) and log(1 + exp(z)) without overflow
    loss = float(np.mean(t * np.logaddexp(0.0, -z3) + (1.0 - t) * np.logaddexp(0.0, z3)))

    d3 = (_sigmoid(z3) - t)[:, None] / n
    grads = {'W3': d3.T @ h2, 'b3': d3.sum(axis=0)}
    d2 = d3 @ model.W3
    if masks is not None:
        d2 = d2 * masks[1]
    d2 = d2 * (z2 > 0)
    grads['W2'] = d2.T @ h1
    grads['b2'] = d2.sum(axis=0)
    d1 = d2 @ model.W2
    if masks is not None:
        d1 = d1 * masks[0]
    d1 = d1 * (z1 > 0)
    grads['W1'] = d1.T @ S
    grads['b1'] = d1.sum(axis=0)
    return loss, grads


def train_mlp(S, y, lr: float = 0.05, epochs: int = 500, seed: int = 0,
              dropout_rate: float = 0.5) -> MlpFusionModel:
    """Full-batch gradient descent on the cross-entropy, from a seeded init."""
    S = np.atleast_2d(np.asarray(S, dtype=float))
    signs = as_signs(y)
    if not (np.any(signs > 0) and np.any(signs < 0)):
        raise SingleClassInput('fusion training data holds a single class', stage='learn')
    model = init_mlp(S.shape[1], seed, dropout_rate)
    # dropout draws come after the initial weights, from their own stream
    rng = np.random.default_rng([seed, 1])
    for epoch in range(epochs):
        masks = _dropout_masks(model, len(S), rng) if dropout_rate > 0 else None
        loss, grads = loss_and_gradients(model, S, signs, masks)
        if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads.values()):
            raise DivergedLoss('loss became non-finite at epoch {0}'.format(epoch), stage='learn')
        for name, grad in grads.items():
            setattr(model, name, getattr(model, name) - lr * grad)
        model.loss_history.append(loss)
    if epochs:
        LOGGER.debug('fusion network trained for {0} epochs, final loss {1:.5f}'.format(
            epochs, model.loss_history[-1]))
    return model
