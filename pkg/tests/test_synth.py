"""
The synthetic dataset generator.
"""

import io
import json
import os

import numpy as np
import pytest

from attnfuse.dataset import DatasetLayout, load_session
from attnfuse.errors import InvalidSpec
from attnfuse.evaluation import max_accuracy_threshold
from attnfuse.ingest import parse_attention_stream, parse_frame_features
from attnfuse.synth import (CategorySignal, SynthSpec, attention_walk,
                            bayes_accuracy, combined_bayes_accuracy,
                            generate, monte_carlo_accuracy, session_traces,
                            truth_for)

from .helper import small_spec


def _tree(root):
    files = {}
    for folder, _, names in os.walk(str(root)):
        for name in names:
            path = os.path.join(folder, name)
            with io.open(path, "rb") as inf:
                files[os.path.relpath(path, str(root))] = inf.read()
    return files


def test_same_seed_same_bytes(tmp_path):
    generate(small_spec(), 7, tmp_path / "a")
    generate(small_spec(), 7, tmp_path / "b", threads=3)
    first, second = _tree(tmp_path / "a"), _tree(tmp_path / "b")

    assert sorted(first) == sorted(second)
    assert first == second


def test_other_seed_other_data(tmp_path):
    generate(small_spec(n_users=2), 1, tmp_path / "a")
    generate(small_spec(n_users=2), 2, tmp_path / "b")
    assert _tree(tmp_path / "a") != _tree(tmp_path / "b")


def test_files_parse(tmp_path):
    result = generate(small_spec(n_users=3, seconds=100), 0, tmp_path)
    layout = DatasetLayout(tmp_path)

    assert result.users == ("user1", "user2", "user3")
    assert layout.sessions() == [("user1", "session1"), ("user2", "session1"), ("user3", "session1")]
    for user_id in result.users:
        attention = parse_attention_stream(layout.attention_path(user_id, "session1"), user_id, "session1")
        assert attention.seconds == 100
        assert attention.values.min() >= 0 and attention.values.max() <= 100
        stream = parse_frame_features(layout.features_path(user_id, "session1"))
        assert stream.categories(user_id, "session1") == ["EB", "Exp"]
        assert len(stream.get(user_id, "session1", "EB")) == 200


def test_truth_file(tmp_path):
    result = generate(small_spec(n_users=2), 3, tmp_path)
    with io.open(str(tmp_path / "truth.json"), encoding="utf-8") as inf:
        truth = json.load(inf)

    assert truth == json.loads(json.dumps(result.truth))
    assert truth["seed"] == 3
    assert truth["users"] == ["user1", "user2"]
    assert set(truth["bayes_accuracy"]) == {"EB", "Exp"}
    for accuracies in truth["ideal_accuracy"].values():
        assert 0.5 <= accuracies["30"] <= accuracies["60"] <= accuracies["120"] <= 1.0
    assert truth["combined_ideal_accuracy"]["60"] >= max(a["60"] for a in truth["ideal_accuracy"].values())
    for accuracies in truth["bayes_accuracy"].values():
        assert all(a is None or 0.5 <= a <= 1.0 for a in accuracies.values())
    assert truth["replicates"] == 10


def test_truth_replays_the_generator(tmp_path):
    spec = small_spec(n_users=3)
    result = generate(spec, 11, tmp_path)
    assert json.loads(json.dumps(truth_for(spec, 11))) == json.loads(json.dumps(result.truth))


def test_user_ids_are_padded():
    assert SynthSpec(n_users=10).user_ids()[:2] == ["user01", "user02"]
    assert SynthSpec(n_users=3).user_ids() == ["user1", "user2", "user3"]


@pytest.mark.parametrize("kwargs", [
    {"n_users": 0},
    {"frame_rate": 0.0},
    {"drop_rate": 1.0},
    {"session_seconds": 100, "session_seconds_max": 50},
    {"signals": {"XYZ": CategorySignal()}},
    {"signals": {}},
])
def test_invalid_spec(kwargs, tmp_path):
    with pytest.raises(InvalidSpec):
        generate(SynthSpec(**kwargs), 0, tmp_path)


def test_spec_from_mapping_solves_for_accuracy():
    spec = SynthSpec.from_dict({"FRAME_RATE": 5.0, "signals": {"EB": {"accuracy": 0.7}, "H": {"coupling": 0.1}}})
    assert spec.categories == ["EB", "H"]
    assert bayes_accuracy(spec.signals["EB"], "EB", 5.0, 60) == pytest.approx(0.7)
    assert spec.signals["H"].coupling == 0.1


def test_spec_from_mapping_rejects_unknown_keys():
    with pytest.raises(InvalidSpec):
        SynthSpec.from_dict({"n_userz": 3})


def test_combined_accuracy_adds_evidence():
    signal = CategorySignal.for_accuracy(0.8, "EB", 5.0)
    single = bayes_accuracy(signal, "EB", 5.0, 60)
    assert combined_bayes_accuracy({"EB": signal, "H": signal}, 5.0, 60) > single
    assert bayes_accuracy(CategorySignal(0.0, 0.0, 1.0), "EB", 5.0, 60) == 0.5


def test_attention_walk_stays_in_range(rng):
    values = attention_walk(5000, rng, step=20.0)
    assert len(values) == 5000
    assert values.min() >= 0.0 and values.max() <= 100.0


def test_session_lengths_vary(tmp_path):
    spec = SynthSpec(n_users=4, session_seconds=60, session_seconds_max=90, frame_rate=1.0,
                     sessions_per_user=2, signals={"H": CategorySignal(0.5, 0.1, 0.2)})
    generate(spec, 0, tmp_path)
    layout = DatasetLayout(tmp_path)
    lengths = [parse_attention_stream(layout.attention_path(u, s)).seconds for u, s in layout.sessions()]

    assert len(lengths) == 8
    assert all(60 <= n <= 90 for n in lengths)


def test_landmark_mode(tmp_path):
    signals = {"EAR": CategorySignal(0.3, 0.0, 0.0), "HS": CategorySignal(180.0, 2.0, 5.0),
               "H": CategorySignal(0.5, 0.0, 0.1)}
    spec = SynthSpec(n_users=2, session_seconds=60, frame_rate=2.0, landmarks=True, signals=signals)
    generate(spec, 0, tmp_path)
    layout = DatasetLayout(tmp_path)

    assert os.path.exists(layout.landmarks_path("user1", "session1"))
    stream = parse_frame_features(layout.features_path("user1", "session1"))
    assert stream.categories("user1", "session1") == ["H"]
    session = load_session(layout, "user1", "session1")
    assert set(session.series) == {"EAR", "HS", "NS", "H"}
    np.testing.assert_allclose(session.series["EAR"].matrix, 0.3, atol=1e-9)


def _empirical_accuracy(root, users, window, thresholds, direction):
    """Best threshold accuracy of the window mean of the written EB values."""
    layout = DatasetLayout(root)
    scores, labels = [], []
    for user_id in users:
        attention = parse_attention_stream(layout.attention_path(user_id, "session1")).values
        track = parse_frame_features(layout.features_path(user_id, "session1")).get(user_id, "session1", "EB")
        second = np.floor(track.timestamps).astype(int)
        sums = np.bincount(second, weights=track.values[:, 0], minlength=len(attention))
        counts = np.bincount(second, minlength=len(attention))
        for start in range(len(attention) - window + 1):
            band = attention[start:start + window].mean()
            if thresholds[0] < band < thresholds[1]:
                continue
            scores.append(direction * sums[start:start + window].sum() / counts[start:start + window].sum())
            labels.append(1 if band >= thresholds[1] else -1)
    return max_accuracy_threshold(scores, labels)[1]


@pytest.mark.slow
def test_truth_matches_the_empirical_threshold_accuracy(tmp_path):
    # a mean near 1 clips a third of the blink values
    signal = CategorySignal.for_accuracy(0.75, "EB", 2.0, 30, mean=0.9, noise=0.2, direction=-1)
    spec = SynthSpec(n_users=20, session_seconds=1800, frame_rate=2.0, signals={"EB": signal})
    result = generate(spec, 4, tmp_path)
    truth = result.truth

    empirical = _empirical_accuracy(tmp_path, result.users, 30, truth["label_thresholds"]["30"], -1.0)
    assert truth["bayes_accuracy"]["EB"]["30"] == pytest.approx(empirical, abs=0.06)


def test_noiseless_and_uncoupled_truths():
    spec = SynthSpec(n_users=4, session_seconds=900, frame_rate=1.0,
                     signals={"H": CategorySignal(0.5, 0.1, 0.0), "Exp": CategorySignal(0.0, 0.0, 0.5)})
    traces = session_traces(spec, 2)
    estimate = monte_carlo_accuracy(spec, traces, 60, 2)

    assert estimate["categories"]["H"] >= 0.99
    assert estimate["combined"] >= 0.99
    # no coupling: the best threshold can only predict the majority class
    windows = estimate["windows"]
    majority = max(windows.values()) / (windows["High"] + windows["Low"])
    assert estimate["categories"]["Exp"] == pytest.approx(majority)
    assert [len(t.attention) for t in traces] == [900] * 4
    assert all(t.frame_counts.tolist() == [1] * 900 for t in traces)
