"""
Per-second averaging, label thresholds and window extraction.
"""

import numpy as np
import pytest

from attnfuse.errors import (ConfigError, DegenerateDistribution,
                             EmptySession, SessionSpanMismatch,
                             WindowLongerThanSession)
from attnfuse.ingest import AttentionSeries, FeatureTrack
from attnfuse.window import (Label, LabelingConfig, WindowSample,
                             candidate_count, compute_label_thresholds,
                             dump_windows, extract_windows, label_for,
                             load_windows, per_second_average, relabel,
                             sort_windows)


def _track(category, timestamps, values, valid=None):
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    timestamps = np.asarray(timestamps, dtype=float)
    valid = np.ones(len(timestamps), dtype=bool) if valid is None else np.asarray(valid)
    return FeatureTrack("u1", "s1", category, timestamps, values, valid)


def _session(seconds, rng, categories=("EB", "H")):
    timestamps = np.arange(seconds * 2) / 2.0
    return {c: per_second_average(_track(c, timestamps, rng.random(len(timestamps))), seconds)
            for c in categories}


def test_mean_of_one_second():
    series = per_second_average(_track("EB", [0.1, 0.6], [0.8, 1.0]))
    assert series.matrix.tolist() == [[0.9]]
    assert series.counts.tolist() == [2]


def test_empty_second_carries_last_value():
    series = per_second_average(_track("EB", [0.2, 2.5], [0.7, 0.1]))
    assert series.matrix[0].tolist() == [0.7, 0.7, 0.1]
    assert series.missing.tolist() == [False, True, False]


def test_leading_empty_seconds_take_first_value():
    series = per_second_average(_track("EB", [2.0], [0.4]), 4)
    assert series.matrix[0].tolist() == [0.4, 0.4, 0.4, 0.4]
    assert series.missing.tolist() == [True, True, False, True]


def test_invalid_frames_are_skipped():
    series = per_second_average(_track("EB", [0.1, 0.2], [0.2, 0.9], valid=[True, False]))
    assert series.matrix.tolist() == [[0.2]]


def test_no_valid_frames():
    with pytest.raises(EmptySession):
        per_second_average(_track("EB", [0.1], [0.5], valid=[False]))


def test_uniform_percentiles():
    assert compute_label_thresholds(np.arange(101.0), LabelingConfig()) == (10.0, 90.0)


def test_constant_pool():
    with pytest.raises(DegenerateDistribution):
        compute_label_thresholds(np.full(100, 55.0), LabelingConfig())


def _sorted_percentile(values, p):
    ordered = sorted(values)
    rank = p / 100 * (len(ordered) - 1)
    low = int(rank)
    high = min(low + 1, len(ordered) - 1)
    return ordered[low] + (rank - low) * (ordered[high] - ordered[low])


def test_percentiles_match_sorted_interpolation():
    pool = list(range(10)) + [50] * 80 + list(range(91, 101))
    expected = (_sorted_percentile(pool, 10), _sorted_percentile(pool, 90))
    assert compute_label_thresholds(pool, LabelingConfig()) == pytest.approx(expected)


def test_pool_of_several_users():
    pool = [np.arange(50.0), np.arange(50.0, 101.0)]
    assert compute_label_thresholds(pool, LabelingConfig()) == (10.0, 90.0)


@pytest.mark.parametrize("kwargs", [
    {"low_percentile": 90, "high_percentile": 10},
    {"window_length": 0},
    {"max_missing_fraction": 1.5},
])
def test_bad_labeling_config(kwargs):
    with pytest.raises(ConfigError):
        LabelingConfig(**kwargs)


def test_label_for_boundaries():
    assert label_for(30.0, (30.0, 70.0)) is Label.LOW
    assert label_for(70.0, (30.0, 70.0)) is Label.HIGH
    assert label_for(50.0, (30.0, 70.0)) is None


def test_candidate_windows(rng):
    attention = AttentionSeries("u1", rng.uniform(0, 100, 120), "s1")
    windows = extract_windows(_session(120, rng), attention, LabelingConfig(30), (100.0, 200.0))

    assert candidate_count(120, 30) == 91
    assert len(windows) == 91
    assert [w.start_second for w in windows] == list(range(91))
    assert windows[0].local["EB"].shape == (1, 30)


def test_constant_attention_gives_no_windows(rng):
    attention = AttentionSeries("u1", np.full(120, 50.0), "s1")
    assert extract_windows(_session(120, rng), attention, LabelingConfig(30), (30.0, 70.0)) == []


def test_window_longer_than_session(rng):
    attention = AttentionSeries("u1", np.full(20, 50.0), "s1")
    with pytest.raises(WindowLongerThanSession):
        extract_windows(_session(20, rng), attention, LabelingConfig(30), (30.0, 70.0))


def test_series_must_cover_the_session(rng):
    attention = AttentionSeries("u1", np.full(60, 50.0), "s1")
    with pytest.raises(SessionSpanMismatch):
        extract_windows(_session(50, rng), attention, LabelingConfig(30), (30.0, 70.0))


def test_local_vector_shapes(rng):
    attention = AttentionSeries("u1", np.zeros(40), "s1")
    series = _session(40, rng, ("EB", "EAR", "Exp"))
    series["EAR"] = per_second_average(_track("EAR", np.arange(80) / 2.0, rng.random((80, 2))), 40)
    series["Exp"] = per_second_average(_track("Exp", np.arange(80) / 2.0, rng.random((80, 16))), 40)
    window = extract_windows(series, attention, LabelingConfig(30), (10.0, 90.0))[0]

    assert {c: v.shape for c, v in window.local.items()} == {"EB": (1, 30), "EAR": (2, 30), "Exp": (16, 30)}
    np.testing.assert_array_equal(window.local["EAR"], series["EAR"].matrix[:, :30])


def test_labels_agree_with_band_attention(rng):
    values = np.clip(np.cumsum(rng.normal(0, 3, 600)) + 50, 0, 100)
    attention = AttentionSeries("u1", values, "s1")
    config = LabelingConfig(30)
    thresholds = compute_label_thresholds(values, config)
    windows = extract_windows(_session(600, rng), attention, config, thresholds)

    assert windows
    for w in windows:
        band = values[w.start_second:w.start_second + 30].mean()
        assert w.band_attention == pytest.approx(band)
        assert w.label is label_for(band, thresholds)


def test_shifting_attention_keeps_the_windows(rng):
    values = np.clip(np.cumsum(rng.normal(0, 3, 600)) + 40, 0, 80)
    session = _session(600, rng)
    config = LabelingConfig(60)

    def cut(v):
        thresholds = compute_label_thresholds(v, config)
        windows = extract_windows(session, AttentionSeries("u1", v, "s1"), config, thresholds)
        return thresholds, [(w.start_second, w.label) for w in windows]

    base_thresholds, base = cut(values)
    shifted_thresholds, shifted = cut(values + 12.5)
    assert shifted_thresholds == pytest.approx((base_thresholds[0] + 12.5, base_thresholds[1] + 12.5))
    assert shifted == base


def test_windows_with_missing_seconds_are_dropped(rng):
    timestamps = np.array([t / 2.0 for t in range(120) if not 80 <= t < 90])
    series = {"EB": per_second_average(_track("EB", timestamps, rng.random(len(timestamps))), 60)}
    attention = AttentionSeries("u1", np.zeros(60), "s1")
    windows = extract_windows(series, attention, LabelingConfig(30, max_missing_fraction=0.1), (10.0, 90.0))

    # seconds 40-44 are missing: a window may hold at most three of them
    assert all(w.missing_fraction <= 0.1 for w in windows)
    assert [w.start_second for w in windows] == list(range(14))


def test_labeled_fraction_matches_monte_carlo(rng):
    values = rng.uniform(0, 100, 10000)
    config = LabelingConfig(30)
    thresholds = compute_label_thresholds(values, config)
    session = {"EB": per_second_average(_track("EB", np.arange(10000.0), np.zeros(10000)), 10000)}
    windows = extract_windows(session, AttentionSeries("u1", values, "s1"), config, thresholds)
    fraction = len(windows) / candidate_count(10000, 30)

    trials = rng.uniform(0, 100, (100000, 30)).mean(axis=1)
    expected = np.mean((trials <= thresholds[0]) | (trials >= thresholds[1]))
    assert abs(fraction - expected) <= 0.02


def _window(user, start, label=Label.HIGH, band=80.0):
    return WindowSample(user, "s1", start, {"EB": np.array([[0.1, 1 / 3, 2.0, 1e-17]])}, label, band)


def test_relabel_drops_unlabeled():
    windows = [_window("u1", 0, band=80.0), _window("u1", 1, band=50.0), _window("u1", 2, Label.LOW, 20.0)]
    result = relabel(windows, (25.0, 75.0))
    assert [(w.start_second, w.label) for w in result] == [(0, Label.HIGH), (2, Label.LOW)]
    assert relabel(windows, (85.0, 90.0))[0].label is Label.LOW


def test_natural_order():
    windows = [_window("u10", 0), _window("u2", 5), _window("u2", 1)]
    assert [w.window_id for w in sort_windows(windows)] == ["u2/s1/1", "u2/s1/5", "u10/s1/0"]


def test_window_dump_is_exact(tmp_path):
    windows = [_window("u1", 0), _window("u2", 3, Label.LOW, 1 / 7)]
    path = str(tmp_path / "cache" / "w.jsonl")
    dump_windows(windows, path, {"key": "abc"})
    header, loaded = load_windows(path)

    assert header == {"key": "abc"}
    for a, b in zip(windows, loaded):
        assert a.window_id == b.window_id
        assert a.label is b.label
        assert a.band_attention == b.band_attention
        assert np.array_equal(a.local["EB"], b.local["EB"])
