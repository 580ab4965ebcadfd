"""
Decision thresholds, ROC curves and leave-one-user-out evaluation.
"""

import json

import numpy as np
import pytest
from scipy.stats import norm

from attnfuse import utils
from attnfuse.dataset import FeatureBank, ThresholdPlan
from attnfuse.errors import InsufficientUsers, LeakageError, SingleClassInput
from attnfuse.evaluation import (FoldModels, LoocvSettings, accuracy_at,
                                 check_leakage,
                                 evaluable_users, fold_evaluated,
                                 fold_thresholds, loocv,
                                 max_accuracy_threshold, roc, train_folds)
from attnfuse.fuse import FeatureMode, FusionSpec

from .helper import make_bank

QUICK = LoocvSettings(c_grid=(0.01, 1.0), mlp_epochs=30)


def _brute_force_accuracy(scores, labels):
    values = sorted(set(scores))
    candidates = [-np.inf, np.inf] + [(a + b) / 2 for a, b in zip(values, values[1:])]
    return max(np.mean([(1 if s > t else -1) == y for s, y in zip(scores, labels)]) for t in candidates)


def test_threshold_between_the_classes():
    assert max_accuracy_threshold([0.1, 0.4, 0.6, 0.9], [-1, -1, 1, 1]) == (0.5, 1.0)


def test_equal_scores_predict_the_majority():
    tau, accuracy = max_accuracy_threshold([0.5] * 4, [1, -1, 1, 1])
    assert tau == -np.inf
    assert accuracy == 0.75


def test_reversed_scores_fall_back_to_the_smallest_threshold():
    assert max_accuracy_threshold([0.9, 0.8, 0.1, 0.2], [-1, -1, 1, 1]) == (-np.inf, 0.5)


def test_sweep_matches_brute_force(rng):
    for _ in range(20):
        scores = np.round(rng.random(30), 1)
        labels = np.where(rng.random(30) > 0.5, 1, -1)
        labels[:2] = [1, -1]
        tau, accuracy = max_accuracy_threshold(scores, labels)
        assert accuracy == pytest.approx(_brute_force_accuracy(scores, labels))
        assert accuracy_at(scores, labels, tau) == pytest.approx(accuracy)


def test_threshold_needs_both_classes():
    with pytest.raises(SingleClassInput):
        max_accuracy_threshold([0.1, 0.2], [1, 1])


def test_accuracy_at():
    assert accuracy_at([0.2, 0.7, 0.5], [-1, 1, 1], 0.5) == pytest.approx(2 / 3)


def test_roc_extremes():
    labels = [-1, -1, 1, 1]
    assert roc([0.1, 0.2, 0.8, 0.9], labels)[1] == 1.0
    assert roc([0.9, 0.8, 0.2, 0.1], labels)[1] == 0.0
    points, auc = roc([0.5] * 4, labels)
    assert points == [(0.0, 0.0), (1.0, 1.0)]
    assert auc == 0.5


def test_roc_of_random_scores(rng):
    scores = rng.random(20000)
    labels = np.where(rng.random(20000) > 0.5, 1, -1)
    points, auc = roc(scores, labels)

    assert abs(auc - 0.5) <= 0.02
    assert points[0] == (0.0, 0.0)
    assert points[-1] == (1.0, 1.0)
    assert all(p[0] <= q[0] and p[1] <= q[1] for p, q in zip(points, points[1:]))


def test_one_fold_per_user():
    bank = make_bank(n_users=3)
    report = loocv(bank, FusionSpec.validated("sum", ["EB", "Exp"]), settings=QUICK)

    assert [f.held_out_user for f in report.folds] == ["user1", "user2", "user3"]
    assert report.skipped == []
    for fold in report.folds:
        assert fold.models.n_train == 80
        assert fold.oracle_accuracy >= fold.accuracy
    metrics = report.pooled_metrics()
    assert metrics["n_windows"] == 120
    assert metrics["held_out_accuracy"] > 0.8
    assert metrics["oracle_accuracy"] >= metrics["held_out_accuracy"] - 1e-12


def test_users_without_windows_are_skipped():
    bank = make_bank(n_users=3)
    evaluable, skipped = evaluable_users(bank, ["user1", "user2", "user3", "user9"])
    assert evaluable == ["user1", "user2", "user3"]
    assert skipped == [{"user_id": "user9", "reason": "no labeled windows"}]


def test_fewer_than_two_users():
    with pytest.raises(InsufficientUsers):
        loocv(make_bank(n_users=1), FusionSpec.validated("sum", ["EB"]), settings=QUICK)


def test_folds_are_announced():
    seen = []

    def receiver(sender, **kwargs):
        seen.append(kwargs["user_id"])

    with fold_evaluated.connected_to(receiver):
        loocv(make_bank(n_users=2), FusionSpec.validated("none", ["EB"]), settings=QUICK)
    assert sorted(seen) == ["user1", "user2"]


def test_threads_do_not_change_the_report():
    bank = make_bank(n_users=4)
    spec = FusionSpec.validated("nn", ["EB", "Exp"])
    single = loocv(bank, spec, settings=QUICK)
    pooled = loocv(bank, spec, settings=LoocvSettings(c_grid=(0.01, 1.0), mlp_epochs=30, threads=4))
    assert single.as_dict() == pooled.as_dict()


def test_stored_models_give_the_same_report():
    bank = make_bank(n_users=3)
    spec = FusionSpec.validated("nn", ["EB", "Exp"])
    trained = train_folds(bank, spec, QUICK)
    stored = {u: FoldModels.from_dict(json.loads(json.dumps(m, cls=utils.CustomEncoder)))
              for u, m in trained.items()}

    assert loocv(bank, spec, settings=QUICK, fold_models=stored).as_dict() == \
        loocv(bank, spec, settings=QUICK).as_dict()


def test_dp_selection_report():
    bank = make_bank(n_users=3, shifts={"EB": 1.0}, width=28, mode=FeatureMode.GLOBAL)
    spec = FusionSpec.validated("dp", ["EB"], "global", 0.1)
    dp = loocv(bank, spec, settings=QUICK).as_dict()["dp"]

    assert dp["n_features"] == 28
    assert dp["n_selected"] == 3
    assert all(entry["per_category"] == {"EB": 3} for entry in dp["per_fold"].values())


def test_exhaustive_subsets():
    settings = LoocvSettings(c_grid=(0.01, 1.0), exhaustive_subsets=True)
    report = loocv(make_bank(n_users=3), FusionSpec.validated("sum", ["EB", "Exp"]), settings=settings)
    subsets = report.as_dict()["subsets"]

    assert sorted(tuple(row["categories"]) for row in subsets) == [("EB",), ("EB", "Exp"), ("Exp",)]
    accuracies = [row["oracle_accuracy"] for row in subsets]
    assert accuracies == sorted(accuracies, reverse=True)


def test_fold_thresholds():
    plan = ThresholdPlan("fold", (10.0, 90.0), {"user1": (12.0, 88.0)})
    assert fold_thresholds(plan, "user1") == (12.0, 88.0)
    assert fold_thresholds(plan, "user2") == (10.0, 90.0)
    assert fold_thresholds(ThresholdPlan("pooled", (10.0, 90.0)), "user1") is None
    assert fold_thresholds(None, "user1") is None


def _fold_plan(users, skip=None):
    fold = {u: (20.0, 80.0) for u in users if u != skip}
    sources = {u: tuple(v for v in users if v != u) for u in fold}
    return ThresholdPlan("fold", (10.0, 90.0), fold, sources=sources, pooled_sources=tuple(users))


STRICT = LoocvSettings(c_grid=(0.01, 1.0), strict_leakage=True)
USERS = ("user1", "user2", "user3")


def test_strict_leakage_accepts_thresholds_without_the_held_out_user():
    report = loocv(make_bank(n_users=3), FusionSpec.validated("sum", ["EB"]), settings=STRICT,
                   plan=_fold_plan(USERS))
    assert [f.held_out_user for f in report.folds] == list(USERS)


def test_strict_leakage_rejects_pooled_thresholds():
    plan = ThresholdPlan("pooled", (10.0, 90.0), pooled_sources=USERS)
    with pytest.raises(LeakageError) as excinfo:
        loocv(make_bank(n_users=3), FusionSpec.validated("sum", ["EB"]), settings=STRICT, plan=plan)
    assert excinfo.value.exit_code == 1
    assert "own attention" in str(excinfo.value)


def test_strict_leakage_rejects_a_fold_falling_back_to_pooled_thresholds():
    # user2 has no fold thresholds, so its labels come from the pool including user2
    plan = _fold_plan(USERS, skip="user2")
    check_leakage(plan, "user1")
    with pytest.raises(LeakageError):
        check_leakage(plan, "user2")
    with pytest.raises(LeakageError):
        train_folds(make_bank(n_users=3), FusionSpec.validated("sum", ["EB"]), STRICT, plan)


def test_strict_leakage_needs_recorded_sources():
    with pytest.raises(LeakageError):
        check_leakage(ThresholdPlan("fold", (10.0, 90.0), {"user1": (20.0, 80.0)}), "user1")
    with pytest.raises(LeakageError):
        check_leakage(None, "user1")
    check_leakage(ThresholdPlan("fold", (30.0, 70.0), None, True, None, ()), "user1")


def test_lenient_runs_ignore_pooled_thresholds():
    plan = ThresholdPlan("pooled", (10.0, 90.0), pooled_sources=USERS)
    report = loocv(make_bank(n_users=3), FusionSpec.validated("sum", ["EB"]), settings=QUICK, plan=plan)
    assert len(report.folds) == 3


def _attention_bank(n_users, per_user, coupling, noise, width=4, seed=0):
    """Windows whose features follow the band attention, High above 90 and Low below 10."""
    rng = np.random.default_rng(seed)
    n = n_users * per_user
    users = np.array(["user{0}".format(k // per_user + 1) for k in range(n)], dtype=object)
    labels = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    band = np.where(labels > 0, rng.uniform(90.0, 100.0, n), rng.uniform(0.0, 10.0, n))
    columns = coupling * (band[:, None] - 50.0) / 50.0 * np.arange(1, width + 1)
    features = {"EB": columns + noise * rng.normal(size=(n, width))}
    return FeatureBank(
        window_ids=["{0}/session1/{1}".format(u, k) for k, u in enumerate(users)],
        users=users,
        band=band,
        labels=labels,
        features=features,
        mode=FeatureMode.LOCAL,
    )


def test_noiseless_signal_is_classified_perfectly():
    report = loocv(_attention_bank(4, 40, 1.0, 0.0), FusionSpec.validated("sum", ["EB"]), settings=QUICK)
    metrics = report.pooled_metrics()

    assert metrics["oracle_accuracy"] == 1.0
    assert metrics["held_out_accuracy"] == 1.0
    assert report.unimodal()["EB"]["oracle_accuracy"] == 1.0


@pytest.mark.slow
def test_signal_independent_of_attention_is_a_coin_flip():
    report = loocv(_attention_bank(5, 1000, 0.0, 1.0), FusionSpec.validated("sum", ["EB"]), settings=QUICK)
    metrics = report.pooled_metrics()

    assert metrics["n_windows"] == 5000
    assert abs(metrics["held_out_accuracy"] - 0.5) <= 0.03


@pytest.mark.slow
def test_pooled_accuracy_reaches_the_bayes_rate():
    shift = norm.ppf(0.80)
    bank = make_bank(n_users=10, per_user=500, shifts={"H": shift}, width=1, seed=3)
    metrics = loocv(bank, FusionSpec.validated("sum", ["H"]), settings=QUICK).pooled_metrics()

    assert abs(metrics["oracle_accuracy"] - 0.80) <= 0.03


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(5))
def test_score_sum_beats_either_channel(seed):
    # each channel alone has a Bayes accuracy of 0.70, together about 0.77
    shift = norm.ppf(0.70)
    bank = make_bank(n_users=5, per_user=1000, shifts={"EB": shift, "Exp": shift}, width=1, seed=seed)
    report = loocv(bank, FusionSpec.validated("sum", ["EB", "Exp"]), settings=QUICK)

    fused = report.pooled_metrics()["oracle_accuracy"]
    best_single = max(entry["oracle_accuracy"] for entry in report.unimodal().values())
    assert abs(best_single - 0.70) <= 0.03
    assert fused >= best_single + 0.02
