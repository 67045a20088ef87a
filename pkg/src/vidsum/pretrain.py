"""Self-supervised pretraining of the scorer.

Two independently masked views of the same feature sequence are scored and
the scorer is trained to keep the two score vectors correlated while not
collapsing to a constant:

    loss = (1 - pearson(p1, p2)) + nu * (1/popstd(p1) + 1/popstd(p2))

Masking zeroes whole frames. Standard deviations are population (divide by
N) everywhere. Gradients are exact; the correlation term's gradient with
respect to p1 is -v/(Su*Sv) + r*u/Su^2 with u, v the centred vectors, which
the finite-difference tests confirm.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (ConfigError, DegenerateInputError, NumericError,
                     ShapeError)
from .numerics import (ScorerParams, adam_step, backward, forward_scores,
                       init_adam)

SD_FLOOR = 1e-12
SD_CLIP = 1e12


@dataclass
class PretrainConfig:
    epochs: int = 90
    lr: float = 1e-5
    weight_decay: float = 1e-5
    nu: float = 0.005
    mask_lo: float = 0.15
    mask_hi: float = 0.50
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError(f"pretrain.epochs must be >= 1, "
                              f"got {self.epochs}")
        if not (0.0 <= self.mask_lo <= self.mask_hi < 1.0):
            raise ConfigError(f"mask range must satisfy 0 <= lo <= hi < 1, "
                              f"got [{self.mask_lo}, {self.mask_hi}]")
        if self.nu < 0.0:
            raise ConfigError(f"pretrain.nu must be >= 0, got {self.nu}")
        if self.lr <= 0.0:
            raise ConfigError(f"pretrain.lr must be > 0, got {self.lr}")


def mask_augment(x: np.ndarray, m: float,
                 rng: np.random.Generator) -> np.ndarray:
    """Copy of x with round(m*N) frames zeroed, chosen without replacement.

    Capped at N-1 frames so at least one frame survives.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ShapeError(f"features must be [N >= 1, d], got {x.shape}")
    if not (0.0 <= m < 1.0):
        raise ShapeError(f"mask fraction must be in [0, 1), got {m}")
    n = x.shape[0]
    k = min(int(round(m * n)), n - 1)
    out = x.copy()
    if k > 0:
        idx = rng.choice(n, size=k, replace=False)
        out[idx] = 0.0
    return out


def _centred(p: np.ndarray):
    u = p - p.mean()
    return u, float(np.sqrt(np.sum(u * u)))


def corr_loss(p1: np.ndarray, p2: np.ndarray) -> float:
    """1 - pearson(p1, p2); raises if either side has zero variance."""
    loss, _, _ = corr_loss_grad(p1, p2)
    return loss


def corr_loss_grad(p1: np.ndarray, p2: np.ndarray):
    """Returns (loss, dloss/dp1, dloss/dp2)."""
    p1 = np.asarray(p1, dtype=np.float64)
    p2 = np.asarray(p2, dtype=np.float64)
    if p1.shape != p2.shape or p1.ndim != 1 or p1.shape[0] < 2:
        raise ShapeError(f"need two equal-length vectors of >= 2 scores, "
                         f"got {p1.shape} and {p2.shape}")
    u, su = _centred(p1)
    v, sv = _centred(p2)
    if su < SD_FLOOR or sv < SD_FLOOR:
        raise DegenerateInputError(
            "correlation undefined: a score vector is constant")
    r = float(np.dot(u, v)) / (su * sv)
    g1 = -v / (su * sv) + r * u / (su * su)
    g2 = -u / (su * sv) + r * v / (sv * sv)
    return 1.0 - r, g1, g2


def sd_loss(p: np.ndarray) -> float:
    """1 / popstd(p); a std under 1e-12 is clipped to the 1e12 ceiling."""
    loss, _ = sd_loss_grad(p)
    return loss


def sd_loss_grad(p: np.ndarray):
    """Returns (loss, dloss/dp). The clipped branch has zero gradient."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.shape[0] < 2:
        raise ShapeError(f"need a vector of >= 2 scores, got {p.shape}")
    n = p.shape[0]
    u = p - p.mean()
    sigma = float(np.sqrt(np.sum(u * u) / n))
    if sigma < SD_FLOOR:
        warnings.warn("score std below 1e-12; spread loss clipped",
                      RuntimeWarning, stacklevel=2)
        return SD_CLIP, np.zeros_like(p)
    return 1.0 / sigma, -u / (n * sigma ** 3)


def pretrain_loss_grad(params: ScorerParams, x1: np.ndarray, x2: np.ndarray,
                       nu: float):
    """Loss and parameter gradients for one pair of masked views.

    Returns (loss, grads, (corr_part, sd_part)). Deterministic given its
    inputs, which is what lets finite differences validate it end to end.
    """
    p1, c1 = forward_scores(params, x1, want_cache=True)
    p2, c2 = forward_scores(params, x2, want_cache=True)
    try:
        lc, g1, g2 = corr_loss_grad(p1, p2)
    except DegenerateInputError:
        # constant scores: correlation undefined, so contribute the
        # uncorrelated loss value with no gradient and keep training on
        # the other videos rather than aborting the run
        warnings.warn("constant score vector; correlation term skipped "
                      "this step", RuntimeWarning, stacklevel=2)
        lc = 1.0
        g1 = np.zeros_like(p1)
        g2 = np.zeros_like(p2)
    ls1, gs1 = sd_loss_grad(p1)
    ls2, gs2 = sd_loss_grad(p2)
    loss = lc + nu * (ls1 + ls2)
    ga = backward(params, c1, g1 + nu * gs1)
    gb = backward(params, c2, g2 + nu * gs2)
    grads = params.zeros_like()
    for name, t in grads.tensors():
        t += getattr(ga, name)
        t += getattr(gb, name)
    return loss, grads, (lc, ls1 + ls2)


def pretrain(params: ScorerParams, videos, cfg: PretrainConfig):
    """Train in place over epochs x videos; returns (params, loss trace).

    videos is a sequence of [N, d] float arrays, visited in order every
    epoch (no shuffling, so a fixed seed fixes every arithmetic operation).
    The trace holds the mean per-video loss of each epoch.
    """
    if len(videos) == 0:
        raise ShapeError("pretrain needs at least one video")
    rng = np.random.default_rng(cfg.seed)
    adam = init_adam(params, lr=cfg.lr, weight_decay=cfg.weight_decay)
    trace = np.empty(cfg.epochs)
    for epoch in range(cfg.epochs):
        total = 0.0
        for i, x in enumerate(videos):
            m1 = rng.uniform(cfg.mask_lo, cfg.mask_hi)
            m2 = rng.uniform(cfg.mask_lo, cfg.mask_hi)
            x1 = mask_augment(x, m1, rng)
            x2 = mask_augment(x, m2, rng)
            loss, grads, _ = pretrain_loss_grad(params, x1, x2, cfg.nu)
            if not np.isfinite(loss):
                raise NumericError(
                    f"epoch {epoch}, video {i}: non-finite loss {loss!r}")
            adam_step(params, grads, adam)
            total += loss
        trace[epoch] = total / len(videos)
    return params, trace
