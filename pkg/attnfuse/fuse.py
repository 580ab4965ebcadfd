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

"""Combining facial feature categories: score sum, fusion network, DP selection."""

import dataclasses
import enum
import itertools
import math
import typing

import numpy as np

from .errors import ConfigError, MissingCategory, SingleClassInput, WrongArity
from .globalfeat import FEATURE_NAMES
from .ingest import CATEGORIES, CATEGORY_DIMENSIONS
from .learn.mlp import MlpFusionModel, mlp_forward
from .learn.svm import as_signs

__all__ = (
    'Strategy',
    'FeatureMode',
    'FusionSpec',
    'DpStats',
    'DP_CAP',
    'score_sum',
    'nn_fuse',
    'dp_rank',
    'dp_select',
    'select_count',
    'global_feature_names',
    'category_subsets',
    'score_sum_batch',
    'nn_fuse_batch',
)

# Score of features whose classes do not vary internally but differ in mean.
DP_CAP = 1e12


class Strategy(enum.Enum):
    """How category information is combined."""

    SUM = 'sum'
    NEURAL_NET = 'nn'
    DP_SELECT = 'dp'
    NONE = 'none'


class FeatureMode(enum.Enum):
    """Which window representation feeds the classifiers."""

    LOCAL = 'local'
    GLOBAL = 'global'


@dataclasses.dataclass(frozen=True)
class FusionSpec:
    """What to fuse and how.

    ``NONE`` evaluates a single category on its own.
    """

    strategy: Strategy
    categories: typing.Tuple[str, ...]
    feature_mode: FeatureMode = FeatureMode.LOCAL
    dp_fraction: float = 0.10

    def __post_init__(self):
        if not self.categories:
            raise ConfigError('at least one category is required', stage='fuse')
        unknown = [c for c in self.categories if c not in CATEGORIES]
        if unknown:
            raise ConfigError('unknown categories: {0}'.format(', '.join(unknown)), stage='fuse')
        if len(set(self.categories)) != len(self.categories):
            raise ConfigError('categories repeat', stage='fuse')
        if self.strategy is Strategy.DP_SELECT and self.feature_mode is not FeatureMode.GLOBAL:
            raise ConfigError('DP selection works on global features', stage='fuse')
        if self.strategy is Strategy.NONE and len(self.categories) != 1:
            raise ConfigError('fusion "none" takes exactly one category', stage='fuse')
        if not 0 < self.dp_fraction <= 1:
            raise ConfigError('DP fraction must lie in (0, 1]', stage='fuse')

    @classmethod
    def validated(cls, strategy, categories, feature_mode=FeatureMode.LOCAL, dp_fraction=0.10):
        """Build a spec, putting categories in canonical order."""
        categories = tuple(c for c in CATEGORIES if c in set(categories)) + \
            tuple(c for c in categories if c not in CATEGORIES)
        return cls(Strategy(strategy), categories, FeatureMode(feature_mode), float(dp_fraction))

    def as_dict(self):
        return {
            'strategy': self.strategy.value,
            'categories': list(self.categories),
            'feature_mode': self.feature_mode.value,
            'dp_fraction': self.dp_fraction,
        }


@dataclasses.dataclass(frozen=True, eq=False)
class DpStats:
    """Per-feature class separation and the selected feature indices."""

    inter: np.ndarray
    intra: np.ndarray
    dp: np.ndarray
    selected: typing.Tuple[int, ...]


def score_sum(scores: typing.Mapping[str, float], categories=None) -> float:
    """Fuse normalized scores by their mean.

    The mean keeps the fused score in [0, 1] whatever the subset size.
    """
    categories = tuple(scores) if categories is None else tuple(categories)
    missing = [c for c in categories if c not in scores]
    if missing:
        raise MissingCategory('no score for {0}'.format(', '.join(missing)), stage='fuse')
    if not categories:
        raise MissingCategory('no categories to fuse', stage='fuse')
    return float(math.fsum(float(scores[c]) for c in sorted(categories)) / len(categories))


def nn_fuse(model: MlpFusionModel, scores) -> float:
    """Fused score of the network for one score vector.

    A mapping is ordered by the canonical category order first.
    """
    if isinstance(scores, typing.Mapping):
        scores = [scores[c] for c in CATEGORIES if c in scores]
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 1 or len(scores) != model.n_inputs:
        raise WrongArity('expected {0} scores, got {1}'.format(model.n_inputs, scores.size), stage='fuse')
    return mlp_forward(model, scores, train_mode=False)


def select_count(n_features: int, fraction: float) -> int:
    """Number of features kept: ceil(fraction * n), at least one."""
    # rounding first keeps 0.1 * 730 at 73
    return max(1, min(n_features, math.ceil(round(fraction * n_features, 9))))


def dp_rank(X, y, fraction: float = 0.10) -> DpStats:
    """Inter- over intra-class variance per feature, class-count weighted.

    0/0 gives 0; a zero intra-class variance with distinct means gives
    ``DP_CAP``.
    """
    X = np.asarray(X, dtype=float)
    signs = as_signs(y)
    n = len(X)
    classes = [signs > 0, signs < 0]
    if not all(mask.any() for mask in classes):
        raise SingleClassInput('DP needs both classes', stage='fuse')
    mean = X.mean(axis=0)
    inter = np.zeros(X.shape[1])
    intra = np.zeros(X.shape[1])
    for mask in classes:
        part = X[mask]
        class_mean = part.mean(axis=0)
        inter += len(part) * (class_mean - mean) ** 2
        intra += ((part - class_mean) ** 2).sum(axis=0)
    inter /= n
    intra /= n
    dp = np.where(intra > 0, inter / np.where(intra > 0, intra, 1.0), np.where(inter > 0, DP_CAP, 0.0))
    k = select_count(X.shape[1], fraction)
    order = np.lexsort((np.arange(len(dp)), -dp))
    return DpStats(inter=inter, intra=intra, dp=dp, selected=tuple(int(i) for i in np.sort(order[:k])))


def dp_select(X, y, fraction: float = 0.10):
    """Keep the top ``fraction`` of features by DP; returns (indices, reduced X)."""
    stats = dp_rank(X, y, fraction)
    indices = np.array(stats.selected, dtype=int)
    return indices, np.asarray(X, dtype=float)[:, indices]


def global_feature_names(categories=CATEGORIES) -> typing.List[str]:
    """Names of the concatenated global features, e.g. ``Exp[3].std_v``."""
    names = []
    for category in categories:
        for channel in range(CATEGORY_DIMENSIONS[category]):
            names.extend('{0}[{1}].{2}'.format(category, channel, f) for f in FEATURE_NAMES)
    return names


def category_subsets(categories) -> typing.List[typing.Tuple[str, ...]]:
    """Every non-empty subset, smaller subsets first."""
    ordered = [c for c in CATEGORIES if c in categories]
    return [subset for size in range(1, len(ordered) + 1)
            for subset in itertools.combinations(ordered, size)]


def score_sum_batch(scores: typing.Mapping[str, np.ndarray], categories) -> np.ndarray:
    """Row-wise ``score_sum`` over arrays of normalized scores."""
    categories = [c for c in CATEGORIES if c in set(categories)]
    missing = [c for c in categories if c not in scores]
    if missing or not categories:
        raise MissingCategory('no scores for {0}'.format(', '.join(missing) or 'any category'), stage='fuse')
    return np.sum([np.asarray(scores[c], dtype=float) for c in categories], axis=0) / len(categories)


def nn_fuse_batch(model: MlpFusionModel, matrix) -> np.ndarray:
    """Fused network scores for the rows of a windows x categories matrix."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    if matrix.shape[1] != model.n_inputs:
        raise WrongArity('expected {0} scores, got {1}'.format(model.n_inputs, matrix.shape[1]), stage='fuse')
    return mlp_forward(model, matrix, train_mode=False)
