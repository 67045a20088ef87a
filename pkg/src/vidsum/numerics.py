"""Layer primitives, exact backpropagation, Adam, and weight file I/O.

Everything is float64 numpy. There is no autodiff tape: the scorer network
has a fixed four-layer shape (conv1d -> fc -> fc -> fc), so the reverse pass
is written out layer by layer and checked against central finite differences
in the tests. Gradients, Adam moments, and weights all share the same
container type so update rules can be written once.
"""

from dataclasses import dataclass
import struct

import numpy as np

from .errors import NumericError, ParseError, ShapeError, StateError

MODEL_MAGIC = b"TRMW"
MODEL_FORMAT_VERSION = 1

CONV_WIDTH = 3  # kernel taps; padding is fixed at 1 so length is preserved

TENSOR_NAMES = (
    "conv_w", "conv_b",
    "fc1_w", "fc1_b",
    "fc2_w", "fc2_b",
    "fc3_w", "fc3_b",
)


@dataclass
class ScorerParams:
    """The eight tensors of the frame scorer.

    Doubles as the container for anything shape-congruent with the weights:
    gradients and Adam moment estimates are ScorerParams too.
    """

    conv_w: np.ndarray  # [h1, d, 3]
    conv_b: np.ndarray  # [h1]
    fc1_w: np.ndarray   # [h2, h1]
    fc1_b: np.ndarray   # [h2]
    fc2_w: np.ndarray   # [h3, h2]
    fc2_b: np.ndarray   # [h3]
    fc3_w: np.ndarray   # [1, h3]
    fc3_b: np.ndarray   # [1]

    @property
    def input_dim(self) -> int:
        return self.conv_w.shape[1]

    def tensors(self):
        """Ordered (name, array) pairs; the order is the file order."""
        return [(name, getattr(self, name)) for name in TENSOR_NAMES]

    def copy(self) -> "ScorerParams":
        return ScorerParams(*(t.copy() for _, t in self.tensors()))

    def zeros_like(self) -> "ScorerParams":
        return ScorerParams(*(np.zeros_like(t) for _, t in self.tensors()))


@dataclass
class ForwardCache:
    """Intermediate activations kept by a forward pass for the reverse pass."""

    xp: np.ndarray  # zero-padded input, [N+2, d]
    z0: np.ndarray  # conv pre-activation, [N, h1]
    a0: np.ndarray
    z1: np.ndarray
    a1: np.ndarray
    z2: np.ndarray
    a2: np.ndarray
    p: np.ndarray   # sigmoid outputs, [N]


def default_hidden(dim: int) -> tuple[int, int, int]:
    """Halving ladder d/2, d/4, d/8 with a floor of 1 per layer."""
    return max(1, dim // 2), max(1, dim // 4), max(1, dim // 8)


def init_params(dim: int = 2048, hidden: tuple[int, int, int] | None = None,
                seed: int = 0) -> ScorerParams:
    """Seeded uniform init, U[-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer.

    Biases of the relu layers start in [0, bound] instead: at the tiny
    widths the tests use (down to 1 or 2 units), a symmetric bias makes a
    whole layer starting dead (all relus off for every frame, constant
    scores, no gradient) uncomfortably likely.
    """
    if dim < 1:
        raise ShapeError(f"feature dimension must be >= 1, got {dim}")
    h1, h2, h3 = default_hidden(dim) if hidden is None else hidden
    if min(h1, h2, h3) < 1:
        raise ShapeError(f"hidden sizes must be >= 1, got {(h1, h2, h3)}")
    rng = np.random.default_rng(seed)

    def uni(fan_in, *shape, positive=False):
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(0.0 if positive else -bound, bound, size=shape)

    return ScorerParams(
        conv_w=uni(CONV_WIDTH * dim, h1, dim, CONV_WIDTH),
        conv_b=uni(CONV_WIDTH * dim, h1, positive=True),
        fc1_w=uni(h1, h2, h1), fc1_b=uni(h1, h2, positive=True),
        fc2_w=uni(h2, h3, h2), fc2_b=uni(h2, h3, positive=True),
        fc3_w=uni(h3, 1, h3), fc3_b=uni(h3, 1),
    )


def _check_2d(x: np.ndarray, what: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError(f"{what} must be 2-dimensional, got shape {x.shape}")
    return x


def conv1d_forward(x: np.ndarray, kernel: np.ndarray,
                   bias: np.ndarray) -> np.ndarray:
    """Temporal conv over frames: x [N, d], kernel [c_out, d, 3] -> [N, c_out].

    Zero padding of 1 frame at each end keeps the sequence length. The three
    taps are applied as three mat-muls over shifted slices of the padded
    input, which is exact (no FFT) and fast enough for every grid used here.
    """
    x = _check_2d(x, "conv input")
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.ndim != 3 or kernel.shape[2] != CONV_WIDTH:
        raise ShapeError(f"kernel must be [c_out, d, {CONV_WIDTH}], "
                         f"got shape {kernel.shape}")
    if kernel.shape[1] != x.shape[1]:
        raise ShapeError(f"kernel expects {kernel.shape[1]} channels, "
                         f"input has {x.shape[1]}")
    n = x.shape[0]
    xp = np.zeros((n + 2, x.shape[1]))
    xp[1:n + 1] = x
    z = np.asarray(bias, dtype=np.float64) + sum(
        xp[w:w + n] @ kernel[:, :, w].T for w in range(CONV_WIDTH))
    return z


def layer_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray,
                  activation: str = "none") -> np.ndarray:
    """Dense layer x @ w.T + b with activation in {none, relu, sigmoid}."""
    x = _check_2d(x, "layer input")
    w = _check_2d(w, "weight")
    if w.shape[1] != x.shape[1]:
        raise ShapeError(f"weight expects {w.shape[1]} inputs, "
                         f"got {x.shape[1]}")
    z = x @ w.T + np.asarray(b, dtype=np.float64)
    if activation == "none":
        return z
    if activation == "relu":
        return np.maximum(z, 0.0)
    if activation == "sigmoid":
        return 1.0 / (1.0 + np.exp(-z))
    raise ShapeError(f"unknown activation {activation!r}")


def forward_scores(params: ScorerParams, x: np.ndarray,
                   want_cache: bool = False):
    """Full scorer chain. Returns p [N] in (0, 1), plus the cache if asked."""
    x = _check_2d(x, "features")
    if x.shape[1] != params.input_dim:
        raise ShapeError(f"scorer expects dimension {params.input_dim}, "
                         f"features have {x.shape[1]}")
    n = x.shape[0]
    xp = np.zeros((n + 2, x.shape[1]))
    xp[1:n + 1] = x
    z0 = params.conv_b + sum(
        xp[w:w + n] @ params.conv_w[:, :, w].T for w in range(CONV_WIDTH))
    a0 = np.maximum(z0, 0.0)
    z1 = a0 @ params.fc1_w.T + params.fc1_b
    a1 = np.maximum(z1, 0.0)
    z2 = a1 @ params.fc2_w.T + params.fc2_b
    a2 = np.maximum(z2, 0.0)
    z3 = a2 @ params.fc3_w.T + params.fc3_b
    p = (1.0 / (1.0 + np.exp(-z3))).ravel()
    if not want_cache:
        return p
    return p, ForwardCache(xp=xp, z0=z0, a0=a0, z1=z1, a1=a1,
                           z2=z2, a2=a2, p=p)


def backward(params: ScorerParams, cache: ForwardCache,
             dloss_dp: np.ndarray) -> ScorerParams:
    """Exact reverse pass; dloss_dp is dL/dp per frame, shape [N].

    ReLU uses subgradient 0 at exactly 0. Returns gradients in a
    ScorerParams with the same shapes as the weights.
    """
    if cache is None:
        raise StateError("backward called without a forward cache")
    dloss_dp = np.asarray(dloss_dp, dtype=np.float64)
    n = cache.p.shape[0]
    if dloss_dp.shape != (n,):
        raise ShapeError(f"dloss_dp must have shape ({n},), "
                         f"got {dloss_dp.shape}")

    dz3 = (dloss_dp * cache.p * (1.0 - cache.p))[:, None]
    dw3 = dz3.T @ cache.a2
    db3 = dz3.sum(axis=0)
    da2 = dz3 @ params.fc3_w

    dz2 = da2 * (cache.z2 > 0.0)
    dw2 = dz2.T @ cache.a1
    db2 = dz2.sum(axis=0)
    da1 = dz2 @ params.fc2_w

    dz1 = da1 * (cache.z1 > 0.0)
    dw1 = dz1.T @ cache.a0
    db1 = dz1.sum(axis=0)
    da0 = dz1 @ params.fc1_w

    dz0 = da0 * (cache.z0 > 0.0)
    dkernel = np.empty_like(params.conv_w)
    for w in range(CONV_WIDTH):
        dkernel[:, :, w] = dz0.T @ cache.xp[w:w + n]
    dconv_b = dz0.sum(axis=0)

    return ScorerParams(conv_w=dkernel, conv_b=dconv_b,
                        fc1_w=dw1, fc1_b=db1,
                        fc2_w=dw2, fc2_b=db2,
                        fc3_w=dw3, fc3_b=db3)


@dataclass
class AdamState:
    """Adam with bias correction and decoupled weight decay."""

    lr: float
    weight_decay: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: ScorerParams | None = None
    v: ScorerParams | None = None


def init_adam(params: ScorerParams, lr: float,
              weight_decay: float = 0.0) -> AdamState:
    return AdamState(lr=lr, weight_decay=weight_decay,
                     m=params.zeros_like(), v=params.zeros_like())


def adam_step(params: ScorerParams, grads: ScorerParams,
              state: AdamState) -> None:
    """One update, in place on params and state.

    theta -= lr * (mhat / (sqrt(vhat) + eps) + wd * theta); the decay term
    is decoupled, i.e. not part of the gradient fed to the moments.
    """
    if state.m is None or state.v is None:
        raise StateError("AdamState not initialised; use init_adam")
    state.step += 1
    b1c = 1.0 - state.beta1 ** state.step
    b2c = 1.0 - state.beta2 ** state.step
    for name in TENSOR_NAMES:
        g = getattr(grads, name)
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient in {name}")
        m = getattr(state.m, name)
        v = getattr(state.v, name)
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * np.square(g)
        theta = getattr(params, name)
        update = (m / b1c) / (np.sqrt(v / b2c) + state.eps)
        if state.weight_decay != 0.0:
            update = update + state.weight_decay * theta
        theta -= state.lr * update


def finite_diff_check(loss_and_grad, params: ScorerParams,
                      h: float = 1e-5) -> dict[str, float]:
    """Central-difference check of an analytic gradient.

    loss_and_grad(params) must return (loss, ScorerParams gradients) and be
    deterministic. Every element of every tensor is perturbed by +-h. The
    relative error uses a 1e-6 floor in the denominator so near-zero
    gradients do not blow the ratio up. Returns {tensor name: max rel err}.
    """
    base_loss, analytic = loss_and_grad(params)
    if not np.isfinite(base_loss):
        raise NumericError("loss is non-finite at the starting point")
    report: dict[str, float] = {}
    work = params.copy()
    for name in TENSOR_NAMES:
        theta = getattr(work, name)
        grad = getattr(analytic, name)
        worst = 0.0
        it = np.nditer(theta, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            keep = theta[idx]
            theta[idx] = keep + h
            lp, _ = loss_and_grad(work)
            theta[idx] = keep - h
            lm, _ = loss_and_grad(work)
            theta[idx] = keep
            fd = (lp - lm) / (2.0 * h)
            a = grad[idx]
            rel = abs(fd - a) / max(abs(fd), abs(a), 1e-6)
            if rel > worst:
                worst = rel
        report[name] = worst
    return report


def save_params(params: ScorerParams, path) -> None:
    """Write weights to the binary model format.

    Layout, all little-endian: magic "TRMW", u32 format version, then per
    tensor (file order = TENSOR_NAMES): u16 name length, name bytes (ascii),
    u32 rank, rank u64 dims, float64 payload in C order.
    """
    blob = bytearray()
    blob += MODEL_MAGIC
    blob += struct.pack("<I", MODEL_FORMAT_VERSION)
    for name, t in params.tensors():
        if not np.all(np.isfinite(t)):
            raise NumericError(f"refusing to save non-finite tensor {name}")
        nb = name.encode("ascii")
        blob += struct.pack("<H", len(nb))
        blob += nb
        blob += struct.pack("<I", t.ndim)
        blob += struct.pack(f"<{t.ndim}Q", *t.shape)
        blob += np.ascontiguousarray(t, dtype="<f8").tobytes()
    with open(path, "wb") as f:
        f.write(bytes(blob))


_EXPECTED_RANK = {
    "conv_w": 3, "conv_b": 1,
    "fc1_w": 2, "fc1_b": 1,
    "fc2_w": 2, "fc2_b": 1,
    "fc3_w": 2, "fc3_b": 1,
}


class ByteReader:
    """Byte cursor that reports the offset of whatever was malformed."""

    def __init__(self, data: bytes, what: str):
        self.data = data
        self.off = 0
        self.what = what

    def take(self, n: int) -> bytes:
        if self.off + n > len(self.data):
            raise ParseError(f"{self.what}: truncated at byte {self.off}, "
                             f"needed {n} more bytes")
        out = self.data[self.off:self.off + n]
        self.off += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    @property
    def done(self) -> bool:
        return self.off == len(self.data)


def load_params(path) -> ScorerParams:
    """Read a model file written by save_params, validating shapes."""
    with open(path, "rb") as f:
        r = ByteReader(f.read(), str(path))
    if r.take(4) != MODEL_MAGIC:
        raise ParseError(f"{r.what}: bad magic at byte 0, "
                         f"expected {MODEL_MAGIC!r}")
    (version,) = r.unpack("<I")
    if version != MODEL_FORMAT_VERSION:
        raise ParseError(f"{r.what}: unsupported model format "
                         f"version {version}")
    found: dict[str, np.ndarray] = {}
    while not r.done:
        at = r.off
        (name_len,) = r.unpack("<H")
        name = r.take(name_len).decode("ascii", errors="replace")
        (rank,) = r.unpack("<I")
        if rank > 8:
            raise ParseError(f"{r.what}: implausible rank {rank} "
                             f"at byte {at}")
        dims = r.unpack(f"<{rank}Q") if rank else ()
        count = 1
        for d in dims:
            count *= d
        payload = r.take(8 * count)
        if name in found:
            raise ParseError(f"{r.what}: duplicate tensor {name!r} "
                             f"at byte {at}")
        found[name] = np.frombuffer(payload, dtype="<f8").reshape(dims).copy()
    missing = [n for n in TENSOR_NAMES if n not in found]
    if missing:
        raise ParseError(f"{r.what}: missing tensors {missing}")
    extra = [n for n in found if n not in TENSOR_NAMES]
    if extra:
        raise ParseError(f"{r.what}: unexpected tensors {extra}")
    for name, rank in _EXPECTED_RANK.items():
        if found[name].ndim != rank:
            raise ParseError(f"{r.what}: tensor {name!r} has rank "
                             f"{found[name].ndim}, expected {rank}")
    params = ScorerParams(**found)
    # cross-tensor consistency so a mangled file cannot produce a scorer
    # that fails deep inside a matmul instead
    h1, d, width = params.conv_w.shape
    checks = [
        (width == CONV_WIDTH, "conv width"),
        (params.conv_b.shape == (h1,), "conv bias"),
        (params.fc1_w.shape[1] == h1, "fc1 input"),
        (params.fc1_b.shape == (params.fc1_w.shape[0],), "fc1 bias"),
        (params.fc2_w.shape[1] == params.fc1_w.shape[0], "fc2 input"),
        (params.fc2_b.shape == (params.fc2_w.shape[0],), "fc2 bias"),
        (params.fc3_w.shape == (1, params.fc2_w.shape[0]), "fc3"),
        (params.fc3_b.shape == (1,), "fc3 bias"),
    ]
    for ok, what in checks:
        if not ok:
            raise ParseError(f"{r.what}: inconsistent shapes ({what})")
    return params
