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

"""Leave-one-user-out evaluation, decision thresholds and ROC curves.

For every user with labeled windows, classifiers are trained on the other
users only and the held-out user's windows are scored. Two decision
thresholds are reported: the held-out threshold, chosen on the training
users' fused scores, and the oracle threshold, chosen on the scores being
evaluated.
"""

import concurrent.futures
import dataclasses
import typing

import numpy as np
from blinker import signal

from . import utils
from .dataset import REFERENCE_WINDOW_COUNTS, FeatureBank, ThresholdPlan
from .errors import InsufficientUsers, LeakageError, SingleClassInput
from .fuse import (FusionSpec, Strategy, category_subsets, dp_select, global_feature_names,
                   nn_fuse_batch, score_sum_batch)
from .learn.mlp import MlpFusionModel, train_mlp
from .learn.svm import DEFAULT_GRID, GridSearchResult, LinearSvmModel, ScoreNormalizer, as_signs, grid_search_c
from .log import stage_logger

__all__ = (
    'LoocvSettings',
    'CategoryModel',
    'FoldModels',
    'FoldResult',
    'EvalReport',
    'max_accuracy_threshold',
    'roc',
    'accuracy_at',
    'check_leakage',
    'train_fold',
    'score_fold',
    'fold_thresholds',
    'evaluable_users',
    'train_folds',
    'loocv',
)

LOGGER = stage_logger('eval')

fold_evaluated = signal('fold_evaluated')
fold_skipped = signal('fold_skipped')


def _sweep(scores, signs) -> typing.Tuple[float, float]:
    """Best threshold over -inf, midpoints of distinct scores and +inf.

    High is predicted for scores above the threshold; ties go to the
    smallest threshold. Works with a single class.
    """
    scores = np.asarray(scores, dtype=float)
    signs = np.asarray(signs, dtype=float)
    n = len(scores)
    if n == 0:
        raise SingleClassInput('no scores to threshold', stage='eval')
    values, inverse = np.unique(scores, return_inverse=True)
    high = np.bincount(inverse, weights=(signs > 0).astype(float), minlength=len(values))
    low = np.bincount(inverse, weights=(signs < 0).astype(float), minlength=len(values))
    # correct[k]: thresholds just above the k-th distinct value (k = -1 for -inf)
    correct = np.concatenate([[high.sum()], high.sum() - np.cumsum(high) + np.cumsum(low)])
    best = int(np.argmax(correct))
    if best == 0:
        tau = -np.inf
    elif best == len(values):
        tau = np.inf
    else:
        tau = (values[best - 1] + values[best]) / 2.0
    return float(tau), float(correct[best] / n)


def _require_both(signs):
    if not (np.any(signs > 0) and np.any(signs < 0)):
        raise SingleClassInput('both labels are needed', stage='eval')


def max_accuracy_threshold(scores, labels) -> typing.Tuple[float, float]:
    """Return the threshold with the highest accuracy, and that accuracy."""
    signs = as_signs(labels)
    _require_both(signs)
    return _sweep(scores, signs)


def accuracy_at(scores, labels, tau: float) -> float:
    """Accuracy of predicting High for scores above ``tau``."""
    signs = as_signs(labels)
    predicted = np.where(np.asarray(scores, dtype=float) > tau, 1.0, -1.0)
    return float(np.mean(predicted == signs))


def roc(scores, labels):
    """ROC points from (0, 0) to (1, 1) and the area under them.

    Equal scores enter the curve together, as one diagonal step.
    """
    signs = as_signs(labels)
    _require_both(signs)
    scores = np.asarray(scores, dtype=float)
    order = np.argsort(-scores, kind='stable')
    ordered, positive = scores[order], signs[order] > 0
    tp = np.cumsum(positive)
    fp = np.cumsum(~positive)
    # last index of every run of equal scores
    ends = np.flatnonzero(np.concatenate([ordered[1:] != ordered[:-1], [True]]))
    tpr = np.concatenate([[0.0], tp[ends] / positive.sum()])
    fpr = np.concatenate([[0.0], fp[ends] / (~positive).sum()])
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))
    return [(float(f), float(t)) for f, t in zip(fpr, tpr)], auc


def _json_threshold(tau):
    if np.isfinite(tau):
        return tau
    return 'inf' if tau > 0 else '-inf'


def _threshold_from_json(value):
    return float(value)


@dataclasses.dataclass(frozen=True)
class LoocvSettings:
    """Training and protocol settings shared by all folds."""

    seed: int = 0
    c_grid: typing.Tuple[float, ...] = DEFAULT_GRID
    svm_tolerance: float = 1e-3
    svm_max_iter: int = 100000
    inner_fraction: float = 0.2
    mlp_learning_rate: float = 0.05
    mlp_epochs: int = 500
    mlp_dropout: float = 0.5
    threads: int = 1
    strict_leakage: bool = False
    exhaustive_subsets: bool = False

    @classmethod
    def from_config(cls, config):
        return cls(
            seed=config.seed,
            c_grid=config.c_grid,
            svm_tolerance=config.svm_tolerance,
            svm_max_iter=config.svm_max_iter,
            inner_fraction=config.inner_validation_fraction,
            mlp_learning_rate=config.mlp_learning_rate,
            mlp_epochs=config.mlp_epochs,
            mlp_dropout=config.mlp_dropout,
            threads=config.threads,
            strict_leakage=config.strict_leakage,
            exhaustive_subsets=config.exhaustive_subsets,
        )


@dataclasses.dataclass(eq=False)
class CategoryModel:
    """SVM, score normalizer and held-out threshold of one feature set."""

    svm: LinearSvmModel
    normalizer: ScoreNormalizer
    threshold: float
    grid: typing.Optional[GridSearchResult] = None

    def normalized(self, X) -> typing.Tuple[np.ndarray, np.ndarray]:
        raw = self.svm.decision_function(X)
        return raw, self.normalizer(raw)

    def as_dict(self):
        return {'svm': self.svm, 'normalizer': self.normalizer,
                'threshold': _json_threshold(self.threshold), 'grid': self.grid}

    @classmethod
    def from_dict(cls, data):
        grid = data.get('grid')
        if grid is not None:
            grid = GridSearchResult(tuple(grid['grid']), tuple(grid['accuracies']),
                                    float(grid['best_c']), grid['split'])
        return cls(LinearSvmModel.from_dict(data['svm']), ScoreNormalizer.from_dict(data['normalizer']),
                   _threshold_from_json(data['threshold']), grid)


def _fit_category(X, signs, groups, settings, seed) -> typing.Tuple[CategoryModel, np.ndarray]:
    _, svm, grid = grid_search_c(X, signs, groups, settings.c_grid, seed, settings.svm_tolerance,
                                 settings.svm_max_iter, settings.inner_fraction)
    raw = svm.decision_function(X)
    normalizer = ScoreNormalizer.fit(raw)
    normalized = normalizer(raw)
    tau, _ = _sweep(normalized, signs)
    return CategoryModel(svm, normalizer, tau, grid), normalized


@dataclasses.dataclass(eq=False)
class FoldModels:
    """Everything trained for one held-out user."""

    held_out_user: str
    spec: FusionSpec
    label_thresholds: typing.Optional[typing.Tuple[float, float]]
    categories: typing.Dict[str, CategoryModel]
    threshold: float
    n_train: int
    mlp: typing.Optional[MlpFusionModel] = None
    dp_model: typing.Optional[CategoryModel] = None
    dp_selected: typing.Optional[typing.Tuple[int, ...]] = None
    subset_thresholds: typing.Dict[str, float] = dataclasses.field(default_factory=dict)

    def as_dict(self):
        return {
            'held_out_user': self.held_out_user,
            'spec': self.spec,
            'label_thresholds': list(self.label_thresholds) if self.label_thresholds else None,
            'categories': self.categories,
            'threshold': _json_threshold(self.threshold),
            'n_train': self.n_train,
            'mlp': self.mlp,
            'dp_model': self.dp_model,
            'dp_selected': list(self.dp_selected) if self.dp_selected is not None else None,
            'subset_thresholds': {k: _json_threshold(v) for k, v in self.subset_thresholds.items()},
        }

    @classmethod
    def from_dict(cls, data):
        spec = data['spec']
        return cls(
            held_out_user=data['held_out_user'],
            spec=FusionSpec.validated(spec['strategy'], spec['categories'], spec['feature_mode'],
                                      spec['dp_fraction']),
            label_thresholds=tuple(data['label_thresholds']) if data['label_thresholds'] else None,
            categories={c: CategoryModel.from_dict(m) for c, m in data['categories'].items()},
            threshold=_threshold_from_json(data['threshold']),
            n_train=int(data['n_train']),
            mlp=MlpFusionModel.from_dict(data['mlp']) if data.get('mlp') else None,
            dp_model=CategoryModel.from_dict(data['dp_model']) if data.get('dp_model') else None,
            dp_selected=tuple(data['dp_selected']) if data.get('dp_selected') is not None else None,
            subset_thresholds={k: _threshold_from_json(v) for k, v in data.get('subset_thresholds', {}).items()},
        )


def _subset_key(subset):
    return '+'.join(subset)


def _fold_labels(bank: FeatureBank, thresholds):
    return bank.labels_under(thresholds) if thresholds is not None else bank.labels


def _fused_scores(spec, models, bank, rows, normalized):
    if spec.strategy is Strategy.SUM:
        return score_sum_batch(normalized, spec.categories)
    if spec.strategy is Strategy.NONE:
        return normalized[spec.categories[0]]
    if spec.strategy is Strategy.NEURAL_NET:
        return nn_fuse_batch(models.mlp, np.column_stack([normalized[c] for c in spec.categories]))
    X = bank.matrix(spec.categories)[rows][:, list(models.dp_selected)]
    return models.dp_model.normalized(X)[1]


def check_leakage(plan: typing.Optional[ThresholdPlan], user_id):
    """Fail when the training labels of the fold holding out ``user_id`` used its attention."""
    if plan is None:
        raise LeakageError('stored labels have no threshold plan to check', stage='eval', record=user_id)
    sources = plan.source_users(user_id)
    if sources is None:
        raise LeakageError('label thresholds of fold {0} do not record their source users; '
                           'rebuild the windows with --refresh'.format(user_id), stage='eval', record=user_id)
    if user_id in sources:
        raise LeakageError('label thresholds of fold {0} were computed with its own attention '
                           '({1} thresholds)'.format(user_id, plan.scope), stage='eval', record=user_id)


def train_fold(bank: FeatureBank, spec: FusionSpec, user_id, settings: LoocvSettings,
               thresholds=None, plan: typing.Optional[ThresholdPlan] = None) -> FoldModels:
    """Train the category SVMs and the fusion model without ``user_id``.

    ``plan`` is where ``thresholds`` came from; strict leakage checks need it.
    """
    if settings.strict_leakage:
        check_leakage(plan, user_id)
    labels = _fold_labels(bank, thresholds)
    rows = np.flatnonzero((bank.users != user_id) & (labels != 0))
    signs = labels[rows]
    groups = list(bank.users[rows])
    if not (np.any(signs > 0) and np.any(signs < 0)):
        raise SingleClassInput('training windows of fold {0} hold a single class'.format(user_id), stage='eval')

    categories = {}
    normalized = {}
    for category in spec.categories:
        model, scores = _fit_category(bank.features[category][rows], signs, groups, settings,
                                      utils.derive_seed(settings.seed, user_id, category))
        categories[category] = model
        normalized[category] = scores

    models = FoldModels(user_id, spec, tuple(thresholds) if thresholds is not None else None,
                        categories, 0.0, len(rows))
    if spec.strategy is Strategy.NEURAL_NET:
        models.mlp = train_mlp(np.column_stack([normalized[c] for c in spec.categories]), signs,
                               settings.mlp_learning_rate, settings.mlp_epochs,
                               utils.derive_seed(settings.seed, user_id, 'mlp'), settings.mlp_dropout)
    elif spec.strategy is Strategy.DP_SELECT:
        selected, reduced = dp_select(bank.matrix(spec.categories)[rows], signs, spec.dp_fraction)
        models.dp_selected = tuple(int(i) for i in selected)
        models.dp_model, _ = _fit_category(reduced, signs, groups, settings,
                                           utils.derive_seed(settings.seed, user_id, 'dp'))
    fused = _fused_scores(spec, models, bank, rows, normalized)
    models.threshold, _ = _sweep(fused, signs)
    if settings.exhaustive_subsets:
        for subset in category_subsets(spec.categories):
            models.subset_thresholds[_subset_key(subset)] = _sweep(score_sum_batch(normalized, subset), signs)[0]
    return models


@dataclasses.dataclass(eq=False)
class FoldResult:
    """Scores of one held-out user's windows."""

    held_out_user: str
    window_ids: typing.List[str]
    labels: np.ndarray
    fused: np.ndarray
    raw: typing.Dict[str, np.ndarray]
    normalized: typing.Dict[str, np.ndarray]
    models: FoldModels
    threshold: float
    accuracy: float
    oracle_threshold: float
    oracle_accuracy: float
    roc_points: typing.Optional[list] = None
    auc: typing.Optional[float] = None

    @property
    def n_windows(self) -> int:
        return len(self.window_ids)


def score_fold(bank: FeatureBank, models: FoldModels, thresholds=None) -> FoldResult:
    """Score the held-out user's windows with the fold's models."""
    user_id = models.held_out_user
    spec = models.spec
    labels = _fold_labels(bank, thresholds)
    rows = np.flatnonzero((bank.users == user_id) & (labels != 0))
    signs = labels[rows]
    raw, normalized = {}, {}
    for category, model in models.categories.items():
        raw[category], normalized[category] = model.normalized(bank.features[category][rows])
    fused = _fused_scores(spec, models, bank, rows, normalized)
    oracle_tau, oracle_accuracy = _sweep(fused, signs)
    points, auc = (None, None)
    if np.any(signs > 0) and np.any(signs < 0):
        points, auc = roc(fused, signs)
    return FoldResult(
        held_out_user=user_id,
        window_ids=[bank.window_ids[k] for k in rows],
        labels=signs,
        fused=np.asarray(fused, dtype=float),
        raw=raw,
        normalized=normalized,
        models=models,
        threshold=models.threshold,
        accuracy=accuracy_at(fused, signs, models.threshold),
        oracle_threshold=oracle_tau,
        oracle_accuracy=oracle_accuracy,
        roc_points=points,
        auc=auc,
    )


@dataclasses.dataclass(eq=False)
class EvalReport:
    """Fold results and everything derived from them."""

    spec: FusionSpec
    seed: int
    folds: typing.List[FoldResult]
    skipped: typing.List[dict]
    window_length: typing.Optional[int] = None
    candidates: typing.Optional[dict] = None
    thresholds: typing.Optional[ThresholdPlan] = None
    config: typing.Optional[dict] = None
    config_hash: typing.Optional[str] = None
    exhaustive_subsets: bool = False

    def pooled(self):
        """Return (scores, labels) of every scored window, fold by fold."""
        scores = np.concatenate([f.fused for f in self.folds])
        labels = np.concatenate([f.labels for f in self.folds])
        return scores, labels

    def pooled_metrics(self) -> dict:
        scores, labels = self.pooled()
        oracle_tau, oracle_accuracy = _sweep(scores, labels)
        correct = sum(f.accuracy * f.n_windows for f in self.folds)
        metrics = {
            'n_windows': len(scores),
            'oracle_threshold': _json_threshold(oracle_tau),
            'oracle_accuracy': oracle_accuracy,
            'held_out_accuracy': correct / len(scores),
            'majority_fraction': float(max(np.mean(labels > 0), np.mean(labels < 0))),
            'auc': None,
        }
        if np.any(labels > 0) and np.any(labels < 0):
            metrics['auc'] = roc(scores, labels)[1]
        return metrics

    def roc_points(self):
        scores, labels = self.pooled()
        if not (np.any(labels > 0) and np.any(labels < 0)):
            return []
        return roc(scores, labels)[0]

    def unimodal(self) -> dict:
        labels = self.pooled()[1]
        result = {}
        for category in self.spec.categories:
            scores = np.concatenate([f.normalized[category] for f in self.folds])
            correct = sum(accuracy_at(f.normalized[category], f.labels, f.models.categories[category].threshold)
                          * f.n_windows for f in self.folds)
            entry = {
                'oracle_accuracy': _sweep(scores, labels)[1],
                'held_out_accuracy': correct / len(labels),
                'auc': None,
            }
            if np.any(labels > 0) and np.any(labels < 0):
                entry['auc'] = roc(scores, labels)[1]
            result[category] = entry
        return result

    def subsets(self) -> typing.List[dict]:
        """Score-sum results of every category subset, best first."""
        labels = self.pooled()[1]
        rows = []
        for subset in category_subsets(self.spec.categories):
            key = _subset_key(subset)
            scores = np.concatenate([score_sum_batch(f.normalized, subset) for f in self.folds])
            correct = sum(accuracy_at(score_sum_batch(f.normalized, subset), f.labels,
                                      f.models.subset_thresholds[key]) * f.n_windows for f in self.folds)
            rows.append({
                'categories': list(subset),
                'oracle_accuracy': _sweep(scores, labels)[1],
                'held_out_accuracy': correct / len(labels),
                'auc': roc(scores, labels)[1] if np.any(labels > 0) and np.any(labels < 0) else None,
            })
        rows.sort(key=lambda r: -r['oracle_accuracy'])
        return rows

    def dp_summary(self) -> typing.Optional[dict]:
        if self.spec.strategy is not Strategy.DP_SELECT or not self.folds:
            return None
        names = global_feature_names(self.spec.categories)
        per_fold = {}
        for f in self.folds:
            selected = list(f.models.dp_selected)
            per_category = {c: 0 for c in self.spec.categories}
            for k in selected:
                per_category[names[k].split('[', 1)[0]] += 1
            per_fold[f.held_out_user] = {
                'selected': selected,
                'names': [names[k] for k in selected],
                'per_category': per_category,
            }
        return {
            'n_features': len(names),
            'n_selected': len(self.folds[0].models.dp_selected),
            'fraction': self.spec.dp_fraction,
            'per_fold': per_fold,
        }

    def window_counts(self) -> dict:
        labels = self.pooled()[1]
        counts = {
            'total': int(len(labels)),
            'per_label': {'High': int(np.sum(labels > 0)), 'Low': int(np.sum(labels < 0))},
            'per_user': {f.held_out_user: f.n_windows for f in self.folds},
            'fold_total': int(sum(f.n_windows for f in self.folds)),
        }
        if self.window_length is not None:
            counts['reference_count'] = REFERENCE_WINDOW_COUNTS.get(self.window_length)
        if self.candidates is not None:
            counts['candidates'] = dict(self.candidates)
        return counts

    def as_dict(self) -> dict:
        """Deterministic report content (no timing)."""
        per_user = {}
        for f in self.folds:
            per_user[f.held_out_user] = {
                'n_windows': f.n_windows,
                'n_train': f.models.n_train,
                'threshold': _json_threshold(f.threshold),
                'accuracy': f.accuracy,
                'oracle_threshold': _json_threshold(f.oracle_threshold),
                'oracle_accuracy': f.oracle_accuracy,
                'auc': f.auc,
                'label_thresholds': list(f.models.label_thresholds) if f.models.label_thresholds else None,
                'selected_c': {c: m.svm.C for c, m in f.models.categories.items()},
            }
        accuracies = [f.accuracy for f in self.folds]
        oracle = [f.oracle_accuracy for f in self.folds]
        report = {
            'fusion': self.spec.as_dict(),
            'seed': self.seed,
            'config': self.config,
            'config_hash': self.config_hash,
            'window_length': self.window_length,
            'label_thresholds': self.thresholds.as_dict() if self.thresholds else None,
            'pooled': self.pooled_metrics(),
            'per_user': per_user,
            'mean_user_accuracy': float(np.mean(accuracies)),
            'mean_user_oracle_accuracy': float(np.mean(oracle)),
            'unimodal': self.unimodal(),
            'windows': self.window_counts(),
            'skipped_folds': self.skipped,
            'dp': self.dp_summary(),
        }
        if self.exhaustive_subsets:
            report['subsets'] = self.subsets()
        return report

    def score_rows(self):
        """Rows (window id, category, raw, normalized, fused, label) for every window."""
        for f in self.folds:
            for k, window_id in enumerate(f.window_ids):
                label = 'High' if f.labels[k] > 0 else 'Low'
                for category in self.spec.categories:
                    yield (window_id, category, float(f.raw[category][k]), float(f.normalized[category][k]),
                           float(f.fused[k]), label)


def fold_thresholds(plan: typing.Optional[ThresholdPlan], user_id):
    """Label thresholds of the fold holding out ``user_id``; None keeps stored labels."""
    if plan is not None and plan.fold:
        return plan.fold.get(user_id, plan.pooled)
    return None


def evaluable_users(bank: FeatureBank, users=None, plan: typing.Optional[ThresholdPlan] = None):
    """Split users into those with labeled windows and skipped ones.

    Returns ``(evaluable, skipped)``; skipped entries name the reason.
    """
    users = utils.sort_users(set(users or []) | set(bank.users))
    evaluable = []
    skipped = []
    for user_id in users:
        labels = _fold_labels(bank, fold_thresholds(plan, user_id))
        if np.any((bank.users == user_id) & (labels != 0)):
            evaluable.append(user_id)
        else:
            skipped.append({'user_id': user_id, 'reason': 'no labeled windows'})
            fold_skipped.send('eval', user_id=user_id, reason='no labeled windows')
    if len(evaluable) < 2:
        raise InsufficientUsers('{0} user(s) with labeled windows, at least 2 needed'.format(len(evaluable)),
                                stage='eval')
    return evaluable, skipped


def _in_order(function, users, threads):
    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(function, users))
    return [function(u) for u in users]


def train_folds(bank: FeatureBank, spec: FusionSpec, settings: LoocvSettings,
                plan: typing.Optional[ThresholdPlan] = None, users=None) -> typing.Dict[str, FoldModels]:
    """Train the models of every fold, keyed by held-out user."""
    evaluable, _ = evaluable_users(bank, users, plan)
    trained = _in_order(lambda u: train_fold(bank, spec, u, settings, fold_thresholds(plan, u), plan),
                        evaluable, settings.threads)
    return dict(zip(evaluable, trained))


def loocv(bank: FeatureBank, spec: FusionSpec, seed: int = 0, settings: typing.Optional[LoocvSettings] = None,
          plan: typing.Optional[ThresholdPlan] = None, users=None,
          fold_models: typing.Optional[typing.Mapping[str, FoldModels]] = None) -> EvalReport:
    """Evaluate ``spec`` with one fold per user.

    ``plan`` supplies per-fold label thresholds; without fold thresholds
    the windows keep their stored labels. ``users`` lists every user of the
    dataset, so users without labeled windows show up as skipped folds.
    Trained models found in ``fold_models`` are used instead of training.
    """
    settings = settings or LoocvSettings(seed=seed)
    if settings.seed != seed:
        settings = dataclasses.replace(settings, seed=seed)
    fold_models = fold_models or {}
    evaluable, skipped = evaluable_users(bank, users, plan)

    def run(user_id):
        thresholds = fold_thresholds(plan, user_id)
        if settings.strict_leakage:
            check_leakage(plan, user_id)
        models = fold_models.get(user_id)
        if models is None:
            models = train_fold(bank, spec, user_id, settings, thresholds, plan)
        result = score_fold(bank, models, thresholds)
        fold_evaluated.send('eval', user_id=user_id, n_windows=result.n_windows, accuracy=result.accuracy)
        return result

    folds = _in_order(run, evaluable, settings.threads)
    return EvalReport(spec=spec, seed=seed, folds=folds, skipped=skipped, thresholds=plan,
                      exhaustive_subsets=settings.exhaustive_subsets)
