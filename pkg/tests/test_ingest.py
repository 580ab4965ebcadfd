"""
Parsing and writing of frame features, attention files and landmarks.
"""

import io

import numpy as np
import pytest

from attnfuse.errors import (DimensionMismatch, EmptyStream, MalformedRow,
                             NonMonotonicTimestamp, OutOfRange)
from attnfuse.ingest import (AttentionSeries, FeatureTrack,
                             FrameFeatureStream, parse_attention_stream,
                             parse_frame_features, parse_landmarks,
                             write_attention, write_frame_features,
                             write_landmarks)

from .helper import write_file

HEADER = "user_id,session_id,timestamp,category,v1\n"


def test_single_eb_row(tmp_path):
    path = write_file(tmp_path / "f.csv", HEADER + "u01,s01,0.033,EB,0.92\n")
    stream = parse_frame_features(path)

    records = list(stream.records())
    assert len(records) == 1
    assert records[0].category == "EB"
    assert records[0].values == (0.92,)


def test_exp_row_has_sixteen_values(tmp_path):
    values = ",".join(str(k / 10) for k in range(16))
    path = write_file(tmp_path / "f.csv", "u01,s01,0.033,Exp,{0}\n".format(values))
    track = parse_frame_features(path).get("u01", "s01", "Exp")

    assert track.dimension == 16
    assert len(track) == 1


def test_dimension_mismatch(tmp_path):
    path = write_file(tmp_path / "f.csv", HEADER + "u01,s01,0.033,EB,0.9,0.1\n")
    with pytest.raises(DimensionMismatch) as excinfo:
        parse_frame_features(path)
    assert excinfo.value.line == 2


def test_eb_outside_unit_interval(tmp_path):
    path = write_file(tmp_path / "f.csv", "u01,s01,0.0,EB,1.5\n")
    with pytest.raises(OutOfRange):
        parse_frame_features(path)


def test_timestamps_must_increase_per_category(tmp_path):
    text = HEADER + "u01,s01,0.1,EB,0.5\nu01,s01,0.1,H,0.5\nu01,s01,0.1,EB,0.4\n"
    path = write_file(tmp_path / "f.csv", text)
    with pytest.raises(NonMonotonicTimestamp) as excinfo:
        parse_frame_features(path)
    assert excinfo.value.line == 4
    assert excinfo.value.exit_code == 2


@pytest.mark.parametrize(
    "row",
    [
        "u01,s01,abc,EB,0.5",
        "u01,s01,0.1,XYZ,0.5",
        "u01,s01,0.1,EB,nan",
        "u01,s01,0.1",
        ",s01,0.1,EB,0.5",
    ],
)
def test_malformed_rows(tmp_path, row):
    path = write_file(tmp_path / "f.csv", HEADER + row + "\n")
    with pytest.raises(MalformedRow) as excinfo:
        parse_frame_features(path)
    assert "f.csv:2" in excinfo.value.describe()


def test_empty_feature_file(tmp_path):
    path = write_file(tmp_path / "f.csv", HEADER)
    with pytest.raises(EmptyStream):
        parse_frame_features(path)


def test_category_names_are_case_insensitive(tmp_path):
    path = write_file(tmp_path / "f.csv", "u01,s01,0.0,eb,0.5\nu01,s01,0.0,exp," + ",".join(["0"] * 16) + "\n")
    stream = parse_frame_features(path)
    assert stream.categories("u01", "s01") == ["EB", "Exp"]


def test_attention_lines(tmp_path):
    series = parse_attention_stream(write_file(tmp_path / "u7" / "s3.txt", "55\n60\n48\n"))

    assert len(series) == 3
    assert series.values.tolist() == [55.0, 60.0, 48.0]
    assert (series.user_id, series.session_id) == ("u7", "s3")


def test_attention_header_and_blank_lines(tmp_path):
    series = parse_attention_stream(write_file(tmp_path / "a.txt", "attention\n\n10\n\n20.5\n"), "u1", "s1")
    assert series.values.tolist() == [10.0, 20.5]


def test_attention_out_of_range(tmp_path):
    with pytest.raises(OutOfRange):
        parse_attention_stream(write_file(tmp_path / "a.txt", "50\n101\n"))


def test_attention_empty(tmp_path):
    with pytest.raises(EmptyStream):
        parse_attention_stream(write_file(tmp_path / "a.txt", ""))


def _landmark_row(user, ts, valid="1", ncoords=28):
    coords = []
    for k in range((ncoords + 1) // 2):
        coords += [str(10 + k), str(20 + (k % 3))]
    return ",".join([user, str(ts), valid] + coords[:ncoords])


def test_landmark_file_of_thirty_rows(tmp_path):
    rows = [_landmark_row("u1", k / 30) for k in range(30)]
    frames = parse_landmarks(write_file(tmp_path / "l.csv", "\n".join(rows) + "\n"))

    assert len(frames) == 30
    assert frames[0].points.shape == (14, 2)
    assert all(f.valid for f in frames)


def test_landmark_row_with_27_coordinates(tmp_path):
    text = _landmark_row("u1", 0.0) + "\n" + _landmark_row("u1", 0.1, ncoords=27) + "\n"
    with pytest.raises(MalformedRow):
        parse_landmarks(write_file(tmp_path / "l.csv", text))


def test_landmark_duplicate_timestamp(tmp_path):
    text = _landmark_row("u1", 0.5) + "\n" + _landmark_row("u1", 0.5) + "\n"
    with pytest.raises(NonMonotonicTimestamp):
        parse_landmarks(write_file(tmp_path / "l.csv", text))


def test_invalid_landmark_frames_are_kept(tmp_path):
    text = _landmark_row("u1", 0.0) + "\n" + _landmark_row("u1", 0.1, valid="0") + "\n"
    frames = parse_landmarks(write_file(tmp_path / "l.csv", text))
    assert [f.valid for f in frames] == [True, False]


def test_feature_file_round_trip(tmp_path):
    text = HEADER.replace("v1", "v1,v2") + (
        "u01,s01,0,EB,0.5\n"
        "u01,s01,0,EAR,0.25,0.3\n"
        "u01,s01,0.2,EB,1\n"
        "u01,s01,0.2,EAR,0.125,0.375\n"
    )
    source = write_file(tmp_path / "in.csv", text)
    target = str(tmp_path / "out.csv")
    write_frame_features(parse_frame_features(source), target)

    with io.open(target, encoding="utf-8") as inf:
        assert inf.read() == text


def test_attention_and_landmark_round_trip(tmp_path):
    series = AttentionSeries("u1", np.array([1.5, 2.0, 99.25]), "s1")
    write_attention(series, str(tmp_path / "a.txt"))
    again = parse_attention_stream(str(tmp_path / "a.txt"), "u1", "s1")
    assert again.values.tolist() == series.values.tolist()

    rows = [_landmark_row("u1", k / 10) for k in range(5)]
    frames = parse_landmarks(write_file(tmp_path / "l.csv", "\n".join(rows) + "\n"))
    write_landmarks(frames, str(tmp_path / "l2.csv"))
    frames2 = parse_landmarks(str(tmp_path / "l2.csv"))
    assert [f.timestamp for f in frames2] == [f.timestamp for f in frames]
    assert all(np.array_equal(a.points, b.points) for a, b in zip(frames, frames2))


def test_parsing_is_deterministic(tmp_path):
    path = write_file(tmp_path / "f.csv", HEADER + "u2,s1,0,EB,0.5\nu1,s1,0,EB,0.25\nu2,s1,1,EB,0.75\n")
    first = list(parse_frame_features(path).records())
    second = list(parse_frame_features(path).records())
    assert first == second
    assert [r.user_id for r in first] == ["u2", "u1", "u2"]


def test_feature_header_after_blank_lines(tmp_path):
    path = write_file(tmp_path / "f.csv", "\n \n" + HEADER + "u01,s01,0.033,EB,0.92\n")
    records = list(parse_frame_features(path).records())
    assert [(r.user_id, r.values) for r in records] == [("u01", (0.92,))]


def test_feature_header_only_on_the_first_row(tmp_path):
    path = write_file(tmp_path / "f.csv", "u01,s01,0,EB,0.5\n" + HEADER)
    with pytest.raises(MalformedRow) as excinfo:
        parse_frame_features(path)
    assert excinfo.value.line == 2


def test_attention_header_after_blank_lines(tmp_path):
    series = parse_attention_stream(write_file(tmp_path / "a.txt", "\n\nattention\n10\n"), "u1", "s1")
    assert series.values.tolist() == [10.0]
    with pytest.raises(MalformedRow):
        parse_attention_stream(write_file(tmp_path / "b.txt", "10\nattention\n"))


def test_landmark_header_after_blank_lines(tmp_path):
    header = ",".join(["user_id", "timestamp", "valid"] + ["p{0}{1}".format(k, a) for k in range(14) for a in "xy"])
    rows = [_landmark_row("u1", k / 10) for k in range(3)]
    frames = parse_landmarks(write_file(tmp_path / "l.csv", "\n\n" + header + "\n" + "\n".join(rows) + "\n"))
    assert [f.timestamp for f in frames] == [0.0, 0.1, 0.2]


def test_writing_keeps_the_file_order(tmp_path):
    text = HEADER.replace("v1", "v1,v2") + (
        "u01,s01,0,EAR,0.25,0.3\n"
        "u01,s01,0.2,EAR,0.125,0.375\n"
        "u01,s01,0,EB,0.5\n"
        "u01,s01,0.2,EB,1\n"
    )
    target = str(tmp_path / "out.csv")
    write_frame_features(parse_frame_features(write_file(tmp_path / "in.csv", text)), target)

    with io.open(target, encoding="utf-8") as inf:
        assert inf.read() == text


def test_streams_built_in_memory_write_by_timestamp_then_category():
    def track(category, values):
        values = np.array(values, dtype=float).reshape(2, -1)
        return FeatureTrack("u1", "s1", category, np.array([0.0, 1.0]), values, np.ones(2, dtype=bool))

    stream = FrameFeatureStream((track("EAR", [[0.1, 0.2], [0.3, 0.4]]), track("EB", [0.5, 0.6])))
    records = list(stream.records())
    assert [(r.timestamp, r.category) for r in records] == [(0.0, "EB"), (0.0, "EAR"), (1.0, "EB"), (1.0, "EAR")]
