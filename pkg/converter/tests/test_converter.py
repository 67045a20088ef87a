import re

import h5py
import numpy as np
import pytest

from vsfconvert.convert import ConvertError, convert
from vsfconvert.vsf import VSF_MAGIC

from vidsum.dataio import read_vsf


def add_video(h5, key, n=12, d=6, annotators=3, seed=0,
              scores_at_picks=True, with_change_points=True, extras=(),
              **override):
    """One group in the mirrored benchmark layout, f32 payloads.

    Keyword overrides replace a field's dataset; None drops it.
    """
    rng = np.random.default_rng(seed)
    n_frames = 15 * n
    if isinstance(override.get("n_frames"), (int, np.integer)):
        n_frames = int(override["n_frames"])
    g = h5.create_group(key)
    fields = {
        "features": rng.standard_normal((n, d)).astype(np.float32),
        "picks": np.arange(n, dtype=np.int64) * 15,
        "n_frames": np.int64(n_frames),
        "user_scores": rng.random(
            (annotators, n if scores_at_picks else n_frames)
        ).astype(np.float32),
    }
    if with_change_points:
        starts = np.array([0, n // 3, (2 * n) // 3], dtype=np.int64) * 15
        ends = np.append(starts[1:] - 1, n_frames - 1)
        fields["change_points"] = np.stack([starts, ends], axis=1)
    fields.update(override)
    for name, value in fields.items():
        if value is not None:
            g.create_dataset(name, data=value)
    for name in extras:
        g.create_dataset(name, data=np.zeros(3, dtype=np.float32))
    return fields


def make_source(path, n_videos=3, **kw):
    with h5py.File(path, "w") as h5:
        return [add_video(h5, f"video_{i + 1}", seed=i, **kw)
                for i in range(n_videos)]


def test_round_trip_counts_and_values(tmp_path):
    src = tmp_path / "src.h5"
    out = tmp_path / "out.vsf"
    originals = make_source(src, n_videos=3)
    report = convert(src, out, "tvsum")

    records = read_vsf(out)
    assert len(records) == 3
    assert len(report.rows) == 3
    for rec, orig in zip(records, originals):
        assert rec.features.shape == orig["features"].shape
        assert rec.annotations.shape == orig["user_scores"].shape
        # f32 -> f64 widening is exact, so equality here is bitwise
        assert np.array_equal(rec.features,
                              orig["features"].astype(np.float64))
        assert rec.features.tobytes() == \
            orig["features"].astype("<f8").tobytes()
        assert np.array_equal(rec.annotations,
                              orig["user_scores"].astype(np.float64))
        assert np.array_equal(rec.picks, orig["picks"])
        assert rec.n_original == int(orig["n_frames"])
        assert np.array_equal(rec.change_points,
                              orig["change_points"][1:, 0])


def test_report_rows(tmp_path):
    src = tmp_path / "src.h5"
    make_source(src, n_videos=2, n=10, d=4, annotators=5)
    report = convert(src, tmp_path / "out.vsf", "summe")
    assert report.rows[0] == ("video_1", 10, 4, 5, 150, 3)
    lines = report.lines()
    assert "video_2: N=10 d=4 A=5 frames=150 segments=3" in lines
    assert lines[-1].startswith("wrote 2 videos (summe)")


def test_frame_resolution_scores_sampled_at_picks(tmp_path):
    src = tmp_path / "src.h5"
    originals = make_source(src, n_videos=1, scores_at_picks=False)
    convert(src, tmp_path / "out.vsf", "tvsum")
    rec = read_vsf(tmp_path / "out.vsf")[0]
    expect = originals[0]["user_scores"].astype(np.float64)
    expect = expect[:, originals[0]["picks"]]
    assert np.array_equal(rec.annotations, expect)


def test_single_annotator(tmp_path):
    src = tmp_path / "src.h5"
    make_source(src, n_videos=1, annotators=1)
    convert(src, tmp_path / "out.vsf", "summe")
    rec = read_vsf(tmp_path / "out.vsf")[0]
    assert rec.annotations.shape[0] == 1


def test_no_change_points(tmp_path):
    src = tmp_path / "src.h5"
    make_source(src, n_videos=1, with_change_points=False)
    convert(src, tmp_path / "out.vsf", "tvsum")
    assert read_vsf(tmp_path / "out.vsf")[0].change_points is None


def test_empty_source_writes_header_only(tmp_path):
    src = tmp_path / "src.h5"
    with h5py.File(src, "w"):
        pass
    out = tmp_path / "out.vsf"
    report = convert(src, out, "tvsum")
    assert report.rows == []
    blob = out.read_bytes()
    assert blob[:4] == VSF_MAGIC and len(blob) == 12
    assert read_vsf(out) == []


def test_video_order_is_numeric(tmp_path):
    src = tmp_path / "src.h5"
    with h5py.File(src, "w") as h5:
        for i in (10, 2, 1):
            add_video(h5, f"video_{i}", seed=i)
    convert(src, tmp_path / "out.vsf", "tvsum")
    ids = [r.video_id for r in read_vsf(tmp_path / "out.vsf")]
    assert ids == ["video_1", "video_2", "video_10"]


def test_non_pattern_keys_sort_lexicographically(tmp_path):
    src = tmp_path / "src.h5"
    with h5py.File(src, "w") as h5:
        for key in ("clipB", "clipA"):
            add_video(h5, key)
    convert(src, tmp_path / "out.vsf", "tvsum")
    ids = [r.video_id for r in read_vsf(tmp_path / "out.vsf")]
    assert ids == ["clipA", "clipB"]


def test_determinism(tmp_path):
    src = tmp_path / "src.h5"
    make_source(src)
    convert(src, tmp_path / "a.vsf", "tvsum")
    convert(src, tmp_path / "b.vsf", "tvsum")
    assert (tmp_path / "a.vsf").read_bytes() == \
        (tmp_path / "b.vsf").read_bytes()


def test_unknown_fields_warn_but_convert(tmp_path):
    src = tmp_path / "src.h5"
    make_source(src, n_videos=1, extras=("gtscore", "n_frame_per_seg"))
    with pytest.warns(UserWarning,
                      match=r"video_1.*gtscore.*n_frame_per_seg"):
        convert(src, tmp_path / "out.vsf", "tvsum")
    assert len(read_vsf(tmp_path / "out.vsf")) == 1


def test_non_group_entry_warns(tmp_path):
    src = tmp_path / "src.h5"
    with h5py.File(src, "w") as h5:
        add_video(h5, "video_1")
        h5.create_dataset("video_names", data=np.zeros(2))
    with pytest.warns(UserWarning, match="video_names"):
        convert(src, tmp_path / "out.vsf", "tvsum")


def test_missing_field_names_key_and_field(tmp_path):
    for field in ("features", "user_scores", "picks", "n_frames"):
        src = tmp_path / f"missing_{field}.h5"
        make_source(src, n_videos=1, **{field: None})
        with pytest.raises(ConvertError,
                           match=rf"video_1.*{field}"):
            convert(src, tmp_path / "out.vsf", "tvsum")


def test_shape_mismatch_names_video(tmp_path):
    src = tmp_path / "src.h5"
    make_source(src, n_videos=1,
                picks=np.arange(5, dtype=np.int64) * 15)
    with pytest.raises(ConvertError, match=r"video_1.*picks length 5"):
        convert(src, tmp_path / "out.vsf", "tvsum")


def test_score_width_mismatch(tmp_path):
    src = tmp_path / "src.h5"
    make_source(src, n_videos=1,
                user_scores=np.zeros((3, 7), dtype=np.float32))
    with pytest.raises(ConvertError, match=r"video_1.*user_scores has 7"):
        convert(src, tmp_path / "out.vsf", "tvsum")


def test_unsupported_feature_dtype(tmp_path):
    src = tmp_path / "src.h5"
    make_source(src, n_videos=1,
                features=np.zeros((12, 6), dtype=np.float16))
    with pytest.raises(ConvertError, match="unsupported features dtype"):
        convert(src, tmp_path / "out.vsf", "tvsum")


def test_unsupported_change_point_layout(tmp_path):
    src = tmp_path / "src.h5"
    make_source(src, n_videos=1,
                change_points=np.array([15, 75], dtype=np.int64))
    with pytest.raises(ConvertError, match=r"change_points must be an "
                                           r"integer \[m, 2\]"):
        convert(src, tmp_path / "out.vsf", "tvsum")


def test_bad_picks(tmp_path):
    src = tmp_path / "non_ascending.h5"
    picks = np.arange(12, dtype=np.int64) * 15
    picks[5] = picks[4]
    make_source(src, n_videos=1, picks=picks)
    with pytest.raises(ConvertError, match="strictly ascending"):
        convert(src, tmp_path / "out.vsf", "tvsum")

    src = tmp_path / "out_of_range.h5"
    make_source(src, n_videos=1, n_frames=np.int64(100))
    with pytest.raises(ConvertError, match=r"picks must lie in 0\.\.99"):
        convert(src, tmp_path / "out.vsf", "tvsum")

    src = tmp_path / "float_picks.h5"
    make_source(src, n_videos=1,
                picks=np.linspace(0, 150, 12).astype(np.float32))
    with pytest.raises(ConvertError, match="picks must be an integer"):
        convert(src, tmp_path / "out.vsf", "tvsum")


def test_bad_kind_and_unreadable_source(tmp_path):
    src = tmp_path / "src.h5"
    make_source(src, n_videos=1)
    with pytest.raises(ConvertError, match="unknown dataset kind"):
        convert(src, tmp_path / "out.vsf", "other")
    junk = tmp_path / "junk.h5"
    junk.write_bytes(b"not hdf5 at all")
    with pytest.raises(ConvertError, match="not a readable HDF5 file"):
        convert(junk, tmp_path / "out.vsf", "tvsum")
