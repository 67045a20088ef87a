"""Dataset container, synthetic data, and run configuration.

The dataset format is a single little-endian binary file:

    magic "VSF1"
    u32  format version (currently 1)
    u32  video count
    per video:
      u16  id length, then that many ascii bytes
      u64  n_original   original frame count
      u64  N            subsampled (scored) frame count
      u64  d            feature dimension
      u64  A            annotator count (0 allowed)
      N    u64          picks: original index of each scored frame
      N*d  f64          features, row-major
      A*N  f64          annotations, row-major
      u8   has change points; if 1: u64 count, then count u64
           interior boundaries in original-frame units, ascending

Records validate on construction: picks strictly ascending and within
range, everything finite, annotation rows the same length as the features.

Synthetic videos are built from latent scenes: each scene has a feature-
space centre and a sharpness ramp; sharper frames have lower softmax
entropy, so entropy moves within scenes and jumps between them. The planted
per-frame salience is the normalised relative entropy change of the final
features (computed after generation, so it is exact); annotation row 0 is
that salience verbatim and the remaining rows add seeded noise.
"""

import math
import struct
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, DataError, ParseError
from .infotheory import entropy_profile
from .numerics import ByteReader
from .pretrain import PretrainConfig
from .reinforce import RLConfig

VSF_MAGIC = b"VSF1"
VSF_FORMAT_VERSION = 1


@dataclass
class VideoRecord:
    video_id: str
    n_original: int
    picks: np.ndarray        # [N] int64
    features: np.ndarray     # [N, d] float64
    annotations: np.ndarray  # [A, N] float64, A may be 0
    change_points: np.ndarray | None = None  # original-frame units

    def __post_init__(self):
        self.picks = np.asarray(self.picks, dtype=np.int64)
        self.features = np.asarray(self.features, dtype=np.float64)
        self.annotations = np.asarray(self.annotations, dtype=np.float64)
        vid = self.video_id
        if self.features.ndim != 2 or self.features.shape[0] < 1:
            raise DataError(f"{vid}: features must be [N >= 1, d], "
                            f"got {self.features.shape}")
        n = self.features.shape[0]
        if self.picks.shape != (n,):
            raise DataError(f"{vid}: picks shape {self.picks.shape} != "
                            f"({n},)")
        if np.any(np.diff(self.picks) <= 0):
            raise DataError(f"{vid}: picks must be strictly ascending")
        if self.picks[0] < 0 or self.picks[-1] >= self.n_original:
            raise DataError(f"{vid}: picks outside "
                            f"0..{self.n_original - 1}")
        if not np.all(np.isfinite(self.features)):
            raise DataError(f"{vid}: non-finite feature values")
        if self.annotations.size and self.annotations.ndim != 2:
            raise DataError(f"{vid}: annotations must be [A, N], "
                            f"got {self.annotations.shape}")
        if self.annotations.ndim == 2 and self.annotations.shape[1] != n:
            raise DataError(f"{vid}: annotation length "
                            f"{self.annotations.shape[1]} != {n}")
        if self.annotations.size and \
                not np.all(np.isfinite(self.annotations)):
            raise DataError(f"{vid}: non-finite annotation values")
        if self.annotations.size == 0:
            self.annotations = self.annotations.reshape(0, n)
        if self.change_points is not None:
            cp = np.asarray(self.change_points, dtype=np.int64)
            if cp.size:
                if np.any(np.diff(cp) <= 0):
                    raise DataError(f"{vid}: change points must be "
                                    f"strictly ascending")
                if cp[0] <= 0 or cp[-1] >= self.n_original:
                    raise DataError(f"{vid}: change points must be "
                                    f"interior to 0..{self.n_original}")
            self.change_points = cp

    @property
    def n_frames(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


def write_vsf(records, path) -> None:
    """Serialise records; byte-identical output for identical records."""
    blob = bytearray()
    blob += VSF_MAGIC
    blob += struct.pack("<II", VSF_FORMAT_VERSION, len(records))
    for rec in records:
        idb = rec.video_id.encode("ascii")
        n, d = rec.features.shape
        a = rec.annotations.shape[0]
        blob += struct.pack("<H", len(idb))
        blob += idb
        blob += struct.pack("<QQQQ", rec.n_original, n, d, a)
        blob += np.ascontiguousarray(rec.picks, dtype="<u8").tobytes()
        blob += np.ascontiguousarray(rec.features, dtype="<f8").tobytes()
        blob += np.ascontiguousarray(rec.annotations, dtype="<f8").tobytes()
        if rec.change_points is None:
            blob += struct.pack("<B", 0)
        else:
            blob += struct.pack("<BQ", 1, rec.change_points.size)
            blob += np.ascontiguousarray(rec.change_points,
                                         dtype="<u8").tobytes()
    with open(path, "wb") as f:
        f.write(bytes(blob))


def read_vsf(path) -> list[VideoRecord]:
    """Parse a dataset file; malformed input reports its byte offset."""
    with open(path, "rb") as f:
        r = ByteReader(f.read(), str(path))
    if r.take(4) != VSF_MAGIC:
        raise ParseError(f"{r.what}: bad magic at byte 0, "
                         f"expected {VSF_MAGIC!r}")
    version, count = r.unpack("<II")
    if version != VSF_FORMAT_VERSION:
        raise ParseError(f"{r.what}: unsupported format version {version}")
    records = []
    for _ in range(count):
        at = r.off
        (id_len,) = r.unpack("<H")
        video_id = r.take(id_len).decode("ascii", errors="replace")
        n_original, n, d, a = r.unpack("<QQQQ")
        if n < 1 or d < 1 or n > 1 << 40 or d > 1 << 32:
            raise ParseError(f"{r.what}: implausible dimensions "
                             f"N={n} d={d} at byte {at}")
        picks = np.frombuffer(r.take(8 * n), dtype="<u8").astype(np.int64)
        features = np.frombuffer(r.take(8 * n * d),
                                 dtype="<f8").reshape(n, d)
        annotations = np.frombuffer(r.take(8 * a * n),
                                    dtype="<f8").reshape(a, n)
        (has_cp,) = r.unpack("<B")
        change_points = None
        if has_cp == 1:
            (cp_count,) = r.unpack("<Q")
            change_points = np.frombuffer(r.take(8 * cp_count),
                                          dtype="<u8").astype(np.int64)
        elif has_cp != 0:
            raise ParseError(f"{r.what}: change-point flag must be 0 or 1, "
                             f"got {has_cp} before byte {r.off}")
        try:
            records.append(VideoRecord(
                video_id=video_id, n_original=int(n_original), picks=picks,
                features=features, annotations=annotations,
                change_points=change_points))
        except DataError as e:
            raise ParseError(f"{r.what}: record starting at byte {at} "
                             f"invalid: {e}") from e
    if not r.done:
        raise ParseError(f"{r.what}: {len(r.data) - r.off} trailing bytes "
                         f"at byte {r.off}")
    return records


def boundaries_to_pick_units(picks: np.ndarray,
                             change_points: np.ndarray) -> np.ndarray:
    """Map original-frame boundaries to boundaries over the picked frames.

    A boundary at original frame b splits the picks into those before b
    and those at or after it; duplicates and ends are dropped.
    """
    picks = np.asarray(picks, dtype=np.int64)
    cp = np.asarray(change_points, dtype=np.int64)
    pos = np.searchsorted(picks, cp)
    pos = np.unique(pos)
    return pos[(pos > 0) & (pos < picks.size)]


def synth_dataset(n_videos: int = 8, n_frames: int = 64, dim: int = 16,
                  seed: int = 0, scene_count: tuple[int, int] = (3, 6),
                  annotators: int = 3, pick_stride: int = 15,
                  noise: float = 0.02, center_scale: float = 2.0,
                  sharp_range: tuple[float, float] = (0.3, 8.0)
                  ) -> list[VideoRecord]:
    """Scene-structured synthetic videos with known per-frame salience.

    Every video is independent given (seed, index). Scene boundaries are
    stored as change points in original-frame units; picks are a regular
    stride, n_original = n_frames * pick_stride.
    """
    if n_videos < 1 or n_frames < 4 or dim < 2:
        raise DataError(f"need n_videos >= 1, n_frames >= 4, dim >= 2; got "
                        f"{n_videos}, {n_frames}, {dim}")
    if annotators < 1:
        raise DataError(f"need at least 1 annotator, got {annotators}")
    lo, hi = scene_count
    if not (1 <= lo <= hi):
        raise DataError(f"bad scene count range {scene_count}")
    records = []
    for v in range(n_videos):
        rng = np.random.default_rng(np.random.SeedSequence([seed, v]))
        n_scenes = int(rng.integers(lo, hi + 1))
        n_scenes = min(n_scenes, max(1, n_frames // 4))
        min_len = max(2, n_frames // (4 * n_scenes))
        extra = rng.multinomial(n_frames - n_scenes * min_len,
                                np.full(n_scenes, 1.0 / n_scenes))
        lengths = min_len + extra
        bounds = np.cumsum(lengths)[:-1]

        x = np.empty((n_frames, dim))
        start = 0
        for s_len in lengths:
            center = rng.normal(0.0, 1.0, size=dim)
            center *= center_scale / max(float(np.linalg.norm(center)),
                                         1e-9)
            a, b = rng.uniform(sharp_range[0], sharp_range[1], size=2)
            ramp = np.linspace(a, b, s_len)
            jitter = rng.normal(0.0, 0.05, size=(s_len, dim))
            x[start:start + s_len] = ramp[:, None] * (center + jitter)
            start += s_len

        profile = entropy_profile(x)
        peak = float(profile.deltas.max())
        salience = profile.deltas / peak if peak > 0 else \
            np.zeros_like(profile.deltas)
        ann = np.empty((annotators, n_frames))
        ann[0] = salience
        for row in range(1, annotators):
            ann[row] = salience + noise * rng.normal(size=n_frames)

        picks = np.arange(n_frames, dtype=np.int64) * pick_stride
        records.append(VideoRecord(
            video_id=f"synth{v:03d}",
            n_original=n_frames * pick_stride,
            picks=picks, features=x, annotations=ann,
            change_points=bounds * pick_stride))
    return records


def _parse_int(text: str) -> int:
    try:
        return int(text, 10)
    except ValueError:
        raise ConfigError(f"expected an integer, got {text!r}") from None


def _parse_float(text: str) -> float:
    try:
        val = float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}") from None
    if not math.isfinite(val):
        raise ConfigError(f"expected a finite number, got {text!r}")
    return val


def _parse_choice(options):
    def parse(text: str) -> str:
        if text not in options:
            raise ConfigError(f"expected one of {options}, got {text!r}")
        return text
    return parse


@dataclass
class RunConfig:
    """Everything a training or evaluation run needs besides the data."""

    seed: int = 0
    eval_mode: str = "per_annotator_mean"
    folds: int = 5
    runs: int = 10
    kts_penalty: float = 1.0
    kts_max_segments: int = 0   # 0 means the N/4 default
    pretrain: PretrainConfig = field(default_factory=PretrainConfig)
    rl: RLConfig = field(default_factory=RLConfig)

    def stage_configs(self) -> tuple[PretrainConfig, RLConfig]:
        """Stage configs with seeds derived from the master seed."""
        pre_seed = int(np.random.SeedSequence(
            [self.seed, 1]).generate_state(1)[0])
        rl_seed = int(np.random.SeedSequence(
            [self.seed, 2]).generate_state(1)[0])
        return (replace(self.pretrain, seed=pre_seed),
                replace(self.rl, seed=rl_seed))


# key -> (attribute path, value parser); the CLI mirrors these as flags
CONFIG_SCHEMA = {
    "seed": (("seed",), _parse_int),
    "eval.mode": (("eval_mode",),
                  _parse_choice(("per_annotator_mean", "vs_mean_gt"))),
    "eval.folds": (("folds",), _parse_int),
    "eval.runs": (("runs",), _parse_int),
    "kts.penalty": (("kts_penalty",), _parse_float),
    "kts.max_segments": (("kts_max_segments",), _parse_int),
    "pretrain.epochs": (("pretrain", "epochs"), _parse_int),
    "pretrain.lr": (("pretrain", "lr"), _parse_float),
    "pretrain.weight_decay": (("pretrain", "weight_decay"), _parse_float),
    "pretrain.nu": (("pretrain", "nu"), _parse_float),
    "pretrain.mask_lo": (("pretrain", "mask_lo"), _parse_float),
    "pretrain.mask_hi": (("pretrain", "mask_hi"), _parse_float),
    "rl.epochs": (("rl", "epochs"), _parse_int),
    "rl.lr": (("rl", "lr"), _parse_float),
    "rl.weight_decay": (("rl", "weight_decay"), _parse_float),
    "rl.lambda": (("rl", "lam"), _parse_float),
    "rl.lambda_on": (("rl", "lambda_on"), _parse_choice(("rep", "ptrim"))),
    "rl.beta": (("rl", "beta"), _parse_float),
    "rl.epsilon": (("rl", "epsilon"), _parse_float),
    "rl.episodes": (("rl", "episodes"), _parse_int),
    "rl.baseline_momentum": (("rl", "baseline_momentum"), _parse_float),
}


def _set_key(cfg: RunConfig, key: str, raw: str) -> RunConfig:
    if key not in CONFIG_SCHEMA:
        raise ConfigError(f"unknown config key {key!r}")
    path, parser = CONFIG_SCHEMA[key]
    value = parser(raw)
    if len(path) == 1:
        return replace(cfg, **{path[0]: value})
    sub = replace(getattr(cfg, path[0]), **{path[1]: value})
    return replace(cfg, **{path[0]: sub})


def apply_overrides(cfg: RunConfig, overrides: dict[str, str]) -> RunConfig:
    """Apply key -> raw-string settings; keys are CONFIG_SCHEMA keys."""
    for key in sorted(overrides):
        cfg = _set_key(cfg, key, overrides[key])
    return cfg


def parse_config(path) -> RunConfig:
    """Read a key = value file; '#' starts a comment, blank lines skipped."""
    cfg = RunConfig()
    with open(path, "r", encoding="utf-8") as f:
        lines = f.readlines()
    for no, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"{path}:{no}: expected 'key = value', "
                              f"got {line.strip()!r}")
        key, _, raw = text.partition("=")
        try:
            cfg = _set_key(cfg, key.strip(), raw.strip())
        except ConfigError as e:
            raise ConfigError(f"{path}:{no}: {e}") from None
    return cfg
