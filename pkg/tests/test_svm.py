"""
The linear SVM solver, C selection and score normalization.
"""

import numpy as np
import pytest
from scipy import optimize

from attnfuse.errors import NonFiniteFeature, SingleClassInput
from attnfuse.learn.svm import (DEFAULT_GRID, ScoreNormalizer, as_signs,
                                grid_search_c, normalize_score, svm_score,
                                train_linear_svm)
from attnfuse.window import Label


def _gaussian(rng, n=200, noise=0.3):
    X = rng.normal(size=(n, 3))
    y = np.where(X @ np.array([1.0, -1.0, 0.5]) + rng.normal(0, noise, n) > 0, 1.0, -1.0)
    return X, y


def _dual_optimum(Z, y, C):
    """Solve the box-constrained dual with a general-purpose optimizer.

    The offset is the weight of a constant column appended to ``Z``.
    """
    Z = np.hstack([Z, np.ones((len(Z), 1))])
    Q = (y[:, None] * Z) @ (y[:, None] * Z).T
    result = optimize.minimize(
        lambda a: 0.5 * a @ Q @ a - a.sum(),
        np.zeros(len(y)),
        jac=lambda a: Q @ a - 1.0,
        bounds=[(0.0, C)] * len(y),
        method="L-BFGS-B",
        options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 10000},
    )
    return result.fun


def _fuzz_instance(k):
    """Eight points in the plane, four per class."""
    rng = np.random.default_rng(1000 + k)
    X = rng.normal(size=(8, 2))
    y = np.array([1.0, -1.0] * 4)
    C = 10.0 ** rng.uniform(-1, 1)
    return X, y, C


def test_separable_line():
    X = np.array([[-2.0], [-1.0], [1.0], [2.0]])
    y = np.array([-1.0, -1.0, 1.0, 1.0])
    model = train_linear_svm(X, y, C=10.0)

    assert model.w[0] > 0
    assert model.predict(X).tolist() == y.tolist()
    assert model.converged


def test_xor_is_not_linear():
    X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
    y = np.array([1.0, 1.0, -1.0, -1.0])
    model = train_linear_svm(X, y)
    assert np.mean(model.predict(X) == y) <= 0.75


@pytest.mark.parametrize("k", range(50))
def test_matches_dual_optimum_on_small_sets(k):
    X, y, C = _fuzz_instance(k)
    model = train_linear_svm(X, y, C=C, tol=1e-8)
    optimum = _dual_optimum(model.standardize(X), y, C)
    # strong duality: the primal at the solver's solution meets the dual optimum
    assert model.primal_objective(X, y) == pytest.approx(-optimum, rel=1e-3, abs=1e-6)


def test_separable_sets_are_fit_exactly(rng):
    for _ in range(5):
        X = rng.normal(size=(120, 4))
        margin = X @ rng.normal(size=4)
        keep = np.abs(margin) > 0.5
        X, y = X[keep], np.where(margin[keep] > 0, 1.0, -1.0)
        model = train_linear_svm(X, y, C=100.0)
        assert np.mean(model.predict(X) == y) == 1.0


def test_dual_objective_never_increases(rng):
    X, y = _gaussian(rng)
    trace = train_linear_svm(X, y, C=1.0, trace=True).objective_trace
    assert len(trace) > 2
    assert all(later <= earlier + 1e-9 * max(1.0, abs(earlier)) for earlier, later in zip(trace, trace[1:]))


def test_warm_start_from_the_solution_needs_no_pass(rng):
    X, y = _gaussian(rng)
    cold, alpha = train_linear_svm(X, y, C=0.5, return_alpha=True)
    warm = train_linear_svm(X, y, C=0.5, alpha=alpha)

    assert cold.n_iter > 0
    assert warm.n_iter == 0
    assert warm.converged
    assert warm.w == pytest.approx(cold.w)
    assert warm.b == pytest.approx(cold.b)


def test_pass_cap_stops_the_solver(rng):
    X, y = _gaussian(rng, noise=2.0)
    model = train_linear_svm(X, y, C=100.0, tol=1e-12, max_iter=2)
    assert model.n_iter == 2
    assert not model.converged


def test_learns_a_noisy_plane(rng):
    X, y = _gaussian(rng)
    model = train_linear_svm(X, y)
    assert np.mean(model.predict(X) == y) > 0.85
    assert svm_score(model, X[0]) == pytest.approx(model.decision_function(X[:1])[0])


def test_default_grid():
    assert len(DEFAULT_GRID) == 11
    assert DEFAULT_GRID[0] == pytest.approx(1e-8)
    assert DEFAULT_GRID[-1] == pytest.approx(100.0)


def test_grid_ties_go_to_the_smallest_c(rng):
    X = np.vstack([rng.normal(-5, 0.5, size=(40, 2)), rng.normal(5, 0.5, size=(40, 2))])
    y = np.array([-1.0] * 40 + [1.0] * 40)
    best_c, model, result = grid_search_c(X, y, grid=(100.0, 1.0, 10.0))

    assert result.grid == (1.0, 10.0, 100.0)
    assert result.accuracies == (1.0, 1.0, 1.0)
    assert best_c == 1.0 == model.C


def test_grid_holds_out_users(rng):
    X, y = _gaussian(rng, n=120)
    groups = ["user{0}".format(k % 6) for k in range(120)]
    _, _, result = grid_search_c(X, y, groups=groups, grid=(0.01, 1.0))
    assert result.split == "users"
    _, _, result = grid_search_c(X, y, grid=(0.01, 1.0))
    assert result.split == "samples"


def test_normalizer_endpoints_and_clipping():
    normalize = ScoreNormalizer.fit([-2.0, 0.0, 2.0])
    assert normalize(-2.0) == 0.0
    assert normalize(2.0) == 1.0
    assert normalize(0.0) == 0.5
    assert normalize(np.array([5.0, -9.0])).tolist() == [1.0, 0.0]


def test_normalizer_of_equal_scores():
    assert ScoreNormalizer.fit([3.0, 3.0])(7.0) == 0.5


def test_feature_scale_does_not_matter(rng):
    X, y = _gaussian(rng)
    base = train_linear_svm(X, y)
    scaled = train_linear_svm(X * 1000.0, y)
    assert np.mean(base.predict(X) == scaled.predict(X * 1000.0)) >= 0.99


def test_training_is_deterministic(rng):
    X, y = _gaussian(rng)
    first = train_linear_svm(X, y)
    second = train_linear_svm(X, y)
    assert first.w.tolist() == second.w.tolist()
    assert first.b == second.b


def test_single_class():
    with pytest.raises(SingleClassInput):
        train_linear_svm(np.ones((4, 2)), [1, 1, 1, 1])


def test_non_finite_feature():
    X = np.array([[0.0, 1.0], [np.nan, 2.0]])
    with pytest.raises(NonFiniteFeature):
        train_linear_svm(X, [1, -1])


def test_label_forms():
    assert as_signs([Label.HIGH, Label.LOW]).tolist() == [1.0, -1.0]
    assert as_signs([True, False]).tolist() == [1.0, -1.0]
    assert as_signs(np.array([1, 0])).tolist() == [1.0, -1.0]


def test_normalize_score_against_training_scores(rng):
    X, y = _gaussian(rng)
    model = train_linear_svm(X, y)
    train_scores = model.decision_function(X)
    top = train_scores.max()

    assert normalize_score(model, train_scores, top) == 1.0
    assert normalize_score(model, train_scores, top + 10.0) == 1.0
    assert 0.0 <= normalize_score(model, train_scores, svm_score(model, X[3])) <= 1.0
