"""Read benchmark HDF5 feature files and emit VSF.

The supported source is the widely mirrored benchmark layout: one HDF5
group per video (video_1, video_2, ...), each holding

    features       [N, d]        float32/float64, one row per picked frame
    user_scores    [A, N] or [A, n_frames]   per-annotator scores
    picks          [N]           original frame index of each feature row
    n_frames       scalar        original frame count
    change_points  [m, 2]        per-segment (start, end), optional

Annotations given at original-frame resolution are sampled at the picks;
everything lands in the container as float64, and widening from float32
is exact, so values survive bit-for-bit. Fields outside this list are
ignored with a warning (public mirrors disagree on extras); layouts
outside it are errors.
"""

import re
import warnings

import h5py
import numpy as np

from .vsf import ConvertedVideo, write_vsf

KINDS = ("tvsum", "summe")
REQUIRED = ("features", "user_scores", "picks", "n_frames")
KNOWN = set(REQUIRED) | {"change_points"}

_FLOAT_SOURCES = (np.float32, np.float64)


class ConvertError(Exception):
    """Source file does not match the supported benchmark layout."""


class ConvertReport:
    """What was converted: one (key, N, d, A, n_frames, segments) row per
    video, plus the kind and output path."""

    def __init__(self, kind, out_path, rows):
        self.kind = kind
        self.out_path = str(out_path)
        self.rows = rows

    def lines(self):
        out = []
        for key, n, d, a, frames, segs in self.rows:
            out.append(f"{key}: N={n} d={d} A={a} frames={frames} "
                       f"segments={segs}")
        out.append(f"wrote {len(self.rows)} videos ({self.kind}) "
                   f"to {self.out_path}")
        return out


def _scalar_int(ds, key, field):
    arr = np.asarray(ds)
    if arr.size != 1 or not np.issubdtype(arr.dtype, np.integer):
        raise ConvertError(f"{key}: {field} must be an integer scalar, "
                           f"got shape {arr.shape} dtype {arr.dtype}")
    return int(arr.reshape(()))


def _load_video(group, key):
    for field in REQUIRED:
        if field not in group:
            raise ConvertError(f"{key}: missing field {field!r}")
    extras = sorted(set(group.keys()) - KNOWN)
    if extras:
        warnings.warn(f"{key}: ignoring unknown fields {extras}")

    feats = group["features"]
    if feats.ndim != 2:
        raise ConvertError(f"{key}: features must be 2-D, "
                           f"got shape {feats.shape}")
    if feats.dtype not in _FLOAT_SOURCES:
        raise ConvertError(f"{key}: unsupported features dtype "
                           f"{feats.dtype}; only float32/float64 sources "
                           f"are supported")
    features = np.asarray(feats).astype("<f8")  # widening f32 is exact
    n, d = features.shape

    picks_ds = np.asarray(group["picks"])
    if picks_ds.ndim != 1 or not np.issubdtype(picks_ds.dtype, np.integer):
        raise ConvertError(f"{key}: picks must be an integer vector, "
                           f"got shape {picks_ds.shape} dtype "
                           f"{picks_ds.dtype}")
    picks = picks_ds.astype(np.int64)
    if picks.size != n:
        raise ConvertError(f"{key}: picks length {picks.size} != feature "
                           f"rows {n}")
    if np.any(np.diff(picks) <= 0):
        raise ConvertError(f"{key}: picks must be strictly ascending")

    n_frames = _scalar_int(group["n_frames"], key, "n_frames")
    if picks[0] < 0 or picks[-1] >= n_frames:
        raise ConvertError(f"{key}: picks must lie in 0..{n_frames - 1}, "
                           f"got {int(picks[0])}..{int(picks[-1])}")

    scores = np.asarray(group["user_scores"])
    if scores.ndim != 2 or not (np.issubdtype(scores.dtype, np.floating)
                                or np.issubdtype(scores.dtype, np.integer)):
        raise ConvertError(f"{key}: user_scores must be a numeric "
                           f"annotator x frame matrix, got shape "
                           f"{scores.shape} dtype {scores.dtype}")
    if scores.shape[1] == n:
        annotations = scores.astype("<f8")
    elif scores.shape[1] == n_frames:
        annotations = scores.astype("<f8")[:, picks]
    else:
        raise ConvertError(f"{key}: user_scores has {scores.shape[1]} "
                           f"columns, expected {n} (picks) or {n_frames} "
                           f"(frames)")

    change_points = None
    if "change_points" in group:
        cp = np.asarray(group["change_points"])
        if cp.ndim != 2 or cp.shape[1] != 2 or \
                not np.issubdtype(cp.dtype, np.integer):
            raise ConvertError(f"{key}: change_points must be an integer "
                               f"[m, 2] matrix of segment (start, end) "
                               f"pairs, got shape {cp.shape} dtype "
                               f"{cp.dtype}")
        starts = cp[:, 0].astype(np.int64)
        if np.any(np.diff(starts) <= 0):
            raise ConvertError(f"{key}: change_points starts must be "
                               f"strictly ascending")
        interior = starts[1:]  # first segment start is the video start
        if interior.size:
            if interior[0] <= 0 or interior[-1] >= n_frames:
                raise ConvertError(f"{key}: change_points must be interior "
                                   f"to 0..{n_frames}")
            change_points = interior

    return ConvertedVideo(video_id=key, n_original=n_frames, picks=picks,
                          features=features, annotations=annotations,
                          change_points=change_points)


def _video_order(keys):
    pat = re.compile(r"video_(\d+)$")
    matches = [pat.fullmatch(k) for k in keys]
    if keys and all(matches):
        return sorted(keys, key=lambda k: int(pat.fullmatch(k).group(1)))
    return sorted(keys)


def convert(src_path, out_path, dataset_kind) -> ConvertReport:
    """Convert one benchmark file; returns the per-video shape report."""
    if dataset_kind not in KINDS:
        raise ConvertError(f"unknown dataset kind {dataset_kind!r}, want "
                           f"one of {KINDS}")
    try:
        src = h5py.File(src_path, "r")
    except OSError as e:
        raise ConvertError(f"{src_path}: not a readable HDF5 file ({e})")
    with src:
        groups = [k for k in src.keys() if isinstance(src[k], h5py.Group)]
        strays = sorted(set(src.keys()) - set(groups))
        if strays:
            warnings.warn(f"ignoring non-group top-level entries {strays}")
        videos = []
        rows = []
        for key in _video_order(groups):
            vid = _load_video(src[key], key)
            videos.append(vid)
            segs = 0 if vid.change_points is None \
                else vid.change_points.size + 1
            rows.append((key, vid.features.shape[0], vid.features.shape[1],
                         vid.annotations.shape[0], vid.n_original, segs))
    write_vsf(videos, out_path)
    return ConvertReport(dataset_kind, out_path, rows)
