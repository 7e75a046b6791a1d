import math

import numpy as np
import pytest

from swinglab.errors import (
    AllMissingError,
    EmptyFileError,
    ManifestError,
    MissingColumnError,
    NonMonotoneTimeError,
    RecordingLoadError,
)
from swinglab.ingest import (
    CleaningPolicy,
    ColumnMap,
    DatasetManifest,
    Handedness,
    ImuFrame,
    ManifestEntry,
    Recording,
    Session,
    Skill,
    clean,
    frames_to_csv,
    load_dataset,
    parse_sensor_csv,
)

HEADER = "loggingTime,motionYaw(rad),motionRoll(rad),motionPitch(rad)\n"


def test_skill_enum_labels():
    assert int(Skill.BEGINNER) == 0
    assert int(Skill.INTERMEDIATE) == 1
    assert Skill.INTERMEDIATE.label == "intermediate"
    assert Skill.from_label("beginner") is Skill.BEGINNER
    with pytest.raises(ManifestError):
        Skill.from_label("expert")


def test_session_enum_properties():
    assert Session.FOREHAND_10A.is_forehand
    assert not Session.BACKHAND_10B.is_forehand
    assert Session.FOREHAND_20.planned_swings == 20
    assert Session.BACKHAND_10A.planned_swings == 10


def test_parse_rebases_time_to_zero():
    text = HEADER + "12.00,0.1,0.2,0.3\n12.10,0.4,0.5,0.6\n"
    frames = parse_sensor_csv(text)
    assert len(frames) == 2
    assert frames[0].t == 0.0
    assert abs(frames[1].t - 0.1) < 1e-9
    assert frames[0].yaw == 0.1 and frames[1].pitch == 0.6


def test_parse_accepts_iso_timestamps():
    text = HEADER + (
        "2024-05-01T13:04:55.000+00:00,0,0,0\n"
        "2024-05-01T13:04:55.020+00:00,0,0,0\n"
    )
    frames = parse_sensor_csv(text)
    assert frames[0].t == 0.0
    # epoch-scale stamps leave ~1e-7 of subtraction noise
    assert abs(frames[1].t - 0.02) < 1e-6


def test_parse_accepts_space_before_utc_offset():
    # SensorLog exports look like "2024-05-01 13:04:55.000 +0200"
    text = HEADER + (
        "2024-05-01 13:04:55.000 +0200,0,0,0\n"
        "2024-05-01 13:04:55.100 +0200,0,0,0\n"
    )
    frames = parse_sensor_csv(text)
    assert frames[0].t == 0.0
    assert abs(frames[1].t - 0.1) < 1e-6


def test_parse_missing_column_and_empty_file():
    with pytest.raises(MissingColumnError, match="motionYaw"):
        parse_sensor_csv("loggingTime,motionRoll(rad),motionPitch(rad)\n1,0,0\n")
    with pytest.raises(EmptyFileError):
        parse_sensor_csv("")
    with pytest.raises(EmptyFileError):
        parse_sensor_csv(HEADER)


def test_parse_rejects_nonmonotone_time():
    text = HEADER + "1.0,0,0,0\n0.5,0,0,0\n"
    with pytest.raises(NonMonotoneTimeError):
        parse_sensor_csv(text)
    # equal stamps are non-monotone too
    text = HEADER + "1.0,0,0,0\n1.0,0,0,0\n"
    with pytest.raises(NonMonotoneTimeError):
        parse_sensor_csv(text)


def test_parse_warns_on_out_of_range_angles():
    text = HEADER + f"0.0,{math.pi + 0.5},0,0\n0.1,0,0,{math.pi / 2 + 0.2}\n"
    with pytest.warns(UserWarning, match="outside"):
        frames = parse_sensor_csv(text)
    # values are kept, not clipped
    assert frames[0].yaw == pytest.approx(math.pi + 0.5)


def test_parse_unparseable_cells_become_nan():
    text = HEADER + "0.0,abc,0.2,0.3\n0.1,,0.5,0.6\n"
    frames = parse_sensor_csv(text)
    assert math.isnan(frames[0].yaw) and math.isnan(frames[1].yaw)
    assert not frames[0].is_complete()


def test_custom_column_map():
    cmap = ColumnMap(time="t", yaw="y", roll="r", pitch="p")
    frames = parse_sensor_csv("t,y,r,p\n0,1,2,3\n", cmap)
    assert frames[0].roll == 2.0


def _frames(vals, dt=0.1):
    return [
        ImuFrame(t=i * dt, yaw=v, roll=0.0, pitch=0.0) for i, v in enumerate(vals)
    ]


def test_clean_interpolates_single_gap():
    frames = _frames([1.0, math.nan, 3.0])
    out = clean(frames, CleaningPolicy(max_gap=1, smooth=False))
    assert [f.yaw for f in out] == [1.0, 2.0, 3.0]
    assert [f.t for f in out] == [0.0, 0.1, 0.2]


def test_clean_drops_gap_longer_than_max():
    frames = _frames([1.0, math.nan, math.nan, 4.0])
    out = clean(frames, CleaningPolicy(max_gap=1, smooth=False))
    assert [f.yaw for f in out] == [1.0, 4.0]
    # with max_gap=2 the same gap is filled linearly
    out = clean(frames, CleaningPolicy(max_gap=2, smooth=False))
    assert [f.yaw for f in out] == [1.0, 2.0, 3.0, 4.0]


def test_clean_drops_edge_gaps_regardless_of_length():
    frames = _frames([math.nan, 2.0, 3.0, math.nan])
    out = clean(frames, CleaningPolicy(max_gap=5, smooth=False))
    assert [f.yaw for f in out] == [2.0, 3.0]


def test_clean_is_idempotent_without_smoothing():
    rng = np.random.default_rng(3)
    vals = rng.normal(size=40)
    vals[[5, 6, 20]] = math.nan
    frames = _frames(list(vals))
    pol = CleaningPolicy(max_gap=2, smooth=False)
    once = clean(frames, pol)
    twice = clean(once, pol)
    assert once == twice


def test_clean_smoothing_averages_neighbourhood():
    frames = _frames([0.0, 0.0, 10.0, 0.0, 0.0])
    out = clean(frames, CleaningPolicy(smooth=True, smooth_window=5))
    # center sees the full window, edges a truncated one
    assert out[2].yaw == pytest.approx(2.0)
    assert out[0].yaw == pytest.approx(10.0 / 3.0)


def test_clean_all_missing_channel_raises():
    frames = _frames([math.nan, math.nan])
    with pytest.raises(AllMissingError, match="yaw"):
        clean(frames)


def test_cleaning_policy_validation():
    with pytest.raises(ValueError):
        CleaningPolicy(smooth_window=4)
    with pytest.raises(ValueError):
        CleaningPolicy(max_gap=-1)


def test_csv_round_trip_is_exact():
    rng = np.random.default_rng(11)
    frames = [
        ImuFrame(t=float(i) * 0.02, yaw=float(a), roll=float(b), pitch=float(c))
        for i, (a, b, c) in enumerate(rng.normal(size=(25, 3)))
    ]
    back = parse_sensor_csv(frames_to_csv(frames))
    # repr round-trips doubles exactly, so equality is not approximate
    assert back == frames


def _entry(pid="p1", skill=Skill.BEGINNER, hand=Handedness.RIGHT,
           session=Session.FOREHAND_10A, path="p1_a.csv"):
    return ManifestEntry(
        participant_id=pid, skill=skill, handedness=hand, session=session, csv_path=path
    )


def test_manifest_rejects_duplicate_paths():
    with pytest.raises(ManifestError, match="duplicate"):
        DatasetManifest(entries=(_entry(), _entry(session=Session.FOREHAND_10B)))


def test_manifest_rejects_conflicting_skill():
    e1 = _entry()
    e2 = _entry(skill=Skill.INTERMEDIATE, session=Session.FOREHAND_10B, path="p1_b.csv")
    with pytest.raises(ManifestError, match="conflicting"):
        DatasetManifest(entries=(e1, e2))


def test_manifest_json_round_trip():
    m = DatasetManifest(entries=(
        _entry(),
        _entry(pid="p2", skill=Skill.INTERMEDIATE, path="p2_a.csv"),
    ))
    again = DatasetManifest.from_json(m.to_json())
    assert again == m
    assert m.participants() == ["p1", "p2"]
    with pytest.raises(ManifestError):
        DatasetManifest.from_json("{}")


def test_load_dataset_forehand_filter_and_errors(tmp_path):
    text = HEADER + "0.0,0.1,0.2,0.3\n0.1,0.2,0.3,0.4\n"
    (tmp_path / "a.csv").write_text(text)
    (tmp_path / "b.csv").write_text(text)
    m = DatasetManifest(entries=(
        _entry(path="a.csv"),
        _entry(session=Session.BACKHAND_10A, path="b.csv"),
    ))
    recs = load_dataset(m, tmp_path)
    assert [r.session for r in recs] == [Session.FOREHAND_10A]
    recs = load_dataset(m, tmp_path, forehand_only=False)
    assert len(recs) == 2

    missing = DatasetManifest(entries=(_entry(path="nope.csv"),))
    with pytest.raises(RecordingLoadError, match="nope.csv"):
        load_dataset(missing, tmp_path)


def test_recording_channel_matrix_shape():
    rec = Recording(
        participant_id="p1",
        skill=Skill.BEGINNER,
        handedness=Handedness.RIGHT,
        session=Session.FOREHAND_10A,
        frames=tuple(_frames([0.1, 0.2, 0.3])),
    )
    M = rec.channel_matrix()
    assert M.shape == (3, 3)
    assert list(M[:, 0]) == [0.1, 0.2, 0.3]
    assert list(rec.times()) == [0.0, 0.1, 0.2]
