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

"""Linear soft-margin SVM trained by dual coordinate descent.

The offset is learned as the weight of a constant extra feature, so the
problem is ``min 1/2 (|w|^2 + b^2) + C sum(hinge)`` and its dual has box
constraints only: ``min 1/2 a'Qa - sum(a)`` with ``0 <= a <= C`` and
``Q_ij = y_i y_j z_i.z_j``. The primal ``w`` is maintained alongside the
dual variables, so a coordinate step costs O(features). The solver stops
when the largest projected gradient drops below the tolerance. Inputs are
standardized with the training mean and std.
"""

import dataclasses
import typing

import natsort
import numpy as np

from ..errors import NonFiniteFeature, SingleClassInput
from ..log import stage_logger
from ..window import Label

__all__ = (
    'DEFAULT_GRID',
    'LinearSvmModel',
    'ScoreNormalizer',
    'GridSearchResult',
    'as_signs',
    'train_linear_svm',
    'grid_search_c',
    'svm_score',
    'normalize_score',
)

LOGGER = stage_logger('learn')

DEFAULT_GRID = tuple(10.0 ** k for k in range(-8, 3))
BIAS_FEATURE = 1.0


def as_signs(labels) -> np.ndarray:
    """Map labels (Label members, booleans, 0/1 or +-1) to +-1 floats."""
    if not isinstance(labels, np.ndarray):
        labels = list(labels)
        if labels and isinstance(labels[0], Label):
            return np.array([lab.sign for lab in labels], dtype=float)
    return np.where(np.asarray(labels, dtype=float) > 0, 1.0, -1.0)


@dataclasses.dataclass(eq=False)
class LinearSvmModel:
    """A trained linear SVM.

    ``score(x) = w . (x - feature_means) / feature_stds + b``.
    """

    w: np.ndarray
    b: float
    C: float
    feature_means: np.ndarray
    feature_stds: np.ndarray
    n_iter: int = 0
    converged: bool = True
    objective_trace: typing.Optional[typing.List[float]] = None

    def standardize(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.feature_means) / self.feature_stds

    def decision_function(self, X) -> np.ndarray:
        """Raw scores for the rows of X."""
        return self.standardize(np.atleast_2d(X)) @ self.w + self.b

    def predict(self, X) -> np.ndarray:
        """+1 (High) where the score is positive, -1 otherwise."""
        return np.where(self.decision_function(X) > 0, 1.0, -1.0)

    def primal_objective(self, X, y) -> float:
        """Return 1/2 (|w|^2 + b^2) + C sum(hinge) on standardized X."""
        margins = as_signs(y) * self.decision_function(X)
        return float(0.5 * (self.w @ self.w + self.b * self.b)
                     + self.C * np.maximum(0.0, 1.0 - margins).sum())

    def as_dict(self):
        return {
            'w': self.w,
            'b': self.b,
            'C': self.C,
            'feature_means': self.feature_means,
            'feature_stds': self.feature_stds,
            'n_iter': self.n_iter,
            'converged': self.converged,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            w=np.array(data['w'], dtype=float),
            b=float(data['b']),
            C=float(data['C']),
            feature_means=np.array(data['feature_means'], dtype=float),
            feature_stds=np.array(data['feature_stds'], dtype=float),
            n_iter=int(data.get('n_iter', 0)),
            converged=bool(data.get('converged', True)),
        )


@dataclasses.dataclass(frozen=True)
class ScoreNormalizer:
    """Min-max map of raw scores onto [0, 1], fitted on training scores."""

    low: float
    high: float

    @classmethod
    def fit(cls, train_scores):
        scores = np.asarray(train_scores, dtype=float)
        return cls(float(scores.min()), float(scores.max()))

    def __call__(self, scores):
        scores = np.asarray(scores, dtype=float)
        if self.high == self.low:
            # all training scores equal: no ordering information
            return np.full(scores.shape, 0.5) if scores.ndim else 0.5
        result = np.clip((scores - self.low) / (self.high - self.low), 0.0, 1.0)
        return result if result.ndim else float(result)

    def as_dict(self):
        return {'low': self.low, 'high': self.high}

    @classmethod
    def from_dict(cls, data):
        return cls(float(data['low']), float(data['high']))


def _check_inputs(X, y):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError('expected a samples x features matrix, got shape {0}'.format(X.shape))
    if not np.all(np.isfinite(X)):
        raise NonFiniteFeature('feature matrix holds NaN or infinite values', stage='learn')
    signs = as_signs(y)
    if len(signs) != len(X):
        raise ValueError('{0} labels for {1} samples'.format(len(signs), len(X)))
    if not (np.any(signs > 0) and np.any(signs < 0)):
        raise SingleClassInput('training data holds a single class', stage='learn')
    return X, signs


def _solve(Z, y, C, tol, max_iter, alpha=None, trace=False):
    """Dual coordinate descent; ``Z`` carries the constant feature as its last column.

    A pass visits, in a seeded random order, the coordinates whose projected
    gradient is nonzero; the others are at their bound and stay there.
    """
    alpha = np.zeros(len(y)) if alpha is None else np.clip(np.asarray(alpha, dtype=float), 0.0, C)
    w = Z.T @ (alpha * y)
    diag = np.einsum('ij,ij->i', Z, Z)
    rng = np.random.default_rng(0)
    objective = [] if trace else None
    converged = False
    passes = 0
    while True:
        if trace:
            objective.append(float(0.5 * w @ w - alpha.sum()))
        G = y * (Z @ w) - 1.0
        PG = np.where(alpha <= 0, np.minimum(G, 0.0), np.where(alpha >= C, np.maximum(G, 0.0), G))
        if np.max(np.abs(PG)) < tol:
            converged = True
            break
        if passes >= max_iter:
            break
        active = np.flatnonzero(PG != 0)
        for i in active[rng.permutation(len(active))]:
            z_i = Z[i]
            old = alpha[i]
            new = min(max(old - (y[i] * (w @ z_i) - 1.0) / diag[i], 0.0), C)
            if new != old:
                alpha[i] = new
                w += (new - old) * y[i] * z_i
        passes += 1
    if not converged:
        LOGGER.warning('SVM solver stopped at the pass cap ({0}) with C={1:g}'.format(max_iter, C))
    return alpha, w, passes, converged, objective


def _standardization(X):
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    stds = np.where(stds > 0, stds, 1.0)
    return means, stds


def train_linear_svm(X, y, C: float = 1.0, tol: float = 1e-3, max_iter: int = 100000,
                     trace: bool = False, alpha=None, return_alpha=False):
    """Train a linear SVM on X (samples x features) with labels y.

    ``max_iter`` caps the coordinate passes and ``alpha`` warm-starts the
    dual variables. With ``trace`` the dual objective before every pass is
    kept in ``objective_trace``; it never increases.
    """
    X, signs = _check_inputs(X, y)
    means, stds = _standardization(X)
    Z = np.hstack([(X - means) / stds, np.full((len(X), 1), BIAS_FEATURE)])
    alpha, w, n_iter, converged, objective = _solve(Z, signs, float(C), tol, max_iter, alpha, trace)
    model = LinearSvmModel(w=w[:-1].copy(), b=float(w[-1] * BIAS_FEATURE), C=float(C),
                           feature_means=means, feature_stds=stds, n_iter=n_iter,
                           converged=converged, objective_trace=objective)
    if return_alpha:
        return model, alpha
    return model


@dataclasses.dataclass(frozen=True)
class GridSearchResult:
    """Inner validation accuracy per C and the chosen value."""

    grid: typing.Tuple[float, ...]
    accuracies: typing.Tuple[float, ...]
    best_c: float
    split: str

    def as_dict(self):
        return {'grid': list(self.grid), 'accuracies': list(self.accuracies),
                'best_c': self.best_c, 'split': self.split}


def _inner_split(signs, groups, fraction, seed):
    """Return (train mask, validation mask, kind) for C selection."""
    rng = np.random.default_rng(seed)
    n = len(signs)
    if groups is not None:
        users = natsort.natsorted(set(groups))
        if len(users) >= 2:
            order = rng.permutation(len(users))
            n_val = min(max(1, int(round(fraction * len(users)))), len(users) - 1)
            held = {users[k] for k in order[:n_val]}
            val = np.array([g in held for g in groups])
            if _both_classes(signs[~val]) and _both_classes(signs[val]):
                return ~val, val, 'users'
    val = np.zeros(n, dtype=bool)
    for cls in (-1.0, 1.0):
        members = np.flatnonzero(signs == cls)
        if len(members) < 2:
            return np.ones(n, dtype=bool), np.ones(n, dtype=bool), 'resubstitution'
        picked = rng.permutation(members)[:max(1, int(round(fraction * len(members))))]
        val[picked] = True
    return ~val, val, 'samples'


def _both_classes(signs):
    return bool(np.any(signs > 0) and np.any(signs < 0))


def grid_search_c(X, y, groups=None, grid=DEFAULT_GRID, split_seed: int = 0, tol: float = 1e-3,
                  max_iter: int = 100000, inner_fraction: float = 0.2):
    """Pick C by inner validation accuracy, then refit on all of X.

    The validation part holds out ``inner_fraction`` of the users in
    ``groups``; without usable groups it falls back to a stratified sample
    split. Ties go to the smallest C. Returns ``(C, model, GridSearchResult)``.
    """
    X, signs = _check_inputs(X, y)
    grid = tuple(sorted(float(c) for c in grid))
    train, val, kind = _inner_split(signs, list(groups) if groups is not None else None,
                                    inner_fraction, split_seed)
    if kind == 'resubstitution':
        LOGGER.warning('too few samples for an inner split; choosing C on the training data')
    accuracies = []
    alpha = None
    previous_c = None
    for c in grid:
        if alpha is not None:
            alpha = alpha * (c / previous_c)
        model, alpha = train_linear_svm(X[train], signs[train], c, tol, max_iter, alpha=alpha,
                                        return_alpha=True)
        previous_c = c
        accuracies.append(float(np.mean(model.predict(X[val]) == signs[val])))
    best = int(np.argmax(accuracies))
    best_c = grid[best]
    LOGGER.debug('C={0:g} chosen with inner accuracy {1:.4f} ({2} split)'.format(best_c, accuracies[best], kind))
    model = train_linear_svm(X, signs, best_c, tol, max_iter)
    return best_c, model, GridSearchResult(grid, tuple(accuracies), best_c, kind)


def svm_score(model: LinearSvmModel, x) -> float:
    """Raw score of one sample."""
    return float(model.decision_function(np.asarray(x, dtype=float)[None, :])[0])


def normalize_score(model: LinearSvmModel, train_scores, s):
    """Min-max normalize a raw score against the model's training scores."""
    return ScoreNormalizer.fit(train_scores)(s)
