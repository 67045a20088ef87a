"""Writer for the VSF video-dataset container.

Byte layout, all little-endian: magic "VSF1", u32 format version (1),
u32 video count, then per video: u16 id length + ascii id, u64 original
frame count, u64 pick count N, u64 feature dim d, u64 annotator count A,
N u64 picks, N*d f64 row-major features, A*N f64 annotations, a u8
change-point flag, and when the flag is 1 a u64 count followed by that
many u64 original-frame change points.

Written independently against the published layout; the consumer-side
reader lives in the summarization package and the test suite round-trips
through it.
"""

import struct
from dataclasses import dataclass

import numpy as np

VSF_MAGIC = b"VSF1"
VSF_FORMAT_VERSION = 1


@dataclass
class ConvertedVideo:
    video_id: str
    n_original: int
    picks: np.ndarray        # [N] int64, strictly ascending
    features: np.ndarray     # [N, d] float64
    annotations: np.ndarray  # [A, N] float64
    change_points: np.ndarray | None = None  # interior, original frames


def write_vsf(videos, path) -> None:
    """Serialise videos; identical input produces identical bytes."""
    blob = bytearray()
    blob += VSF_MAGIC
    blob += struct.pack("<II", VSF_FORMAT_VERSION, len(videos))
    for vid in videos:
        idb = vid.video_id.encode("ascii")
        n, d = vid.features.shape
        a = vid.annotations.shape[0]
        blob += struct.pack("<H", len(idb))
        blob += idb
        blob += struct.pack("<QQQQ", vid.n_original, n, d, a)
        blob += np.ascontiguousarray(vid.picks, dtype="<u8").tobytes()
        blob += np.ascontiguousarray(vid.features, dtype="<f8").tobytes()
        blob += np.ascontiguousarray(vid.annotations, dtype="<f8").tobytes()
        if vid.change_points is None:
            blob += struct.pack("<B", 0)
        else:
            blob += struct.pack("<BQ", 1, vid.change_points.size)
            blob += np.ascontiguousarray(vid.change_points,
                                         dtype="<u8").tobytes()
    with open(path, "wb") as f:
        f.write(bytes(blob))
