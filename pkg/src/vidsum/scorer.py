"""The frame scorer as a model: build, score, persist.

The network maps a [N, d] feature sequence to N importance scores in (0, 1):

    conv1d(d -> d/2, width 3, pad 1) -> relu
    fc(d/2 -> d/4) -> relu
    fc(d/4 -> d/8) -> relu
    fc(d/8 -> 1)   -> sigmoid

Hidden sizes floor at 1 so tiny test dimensions still build. The conv layer
is the only place where neighbouring frames interact, so a frame's score
depends on exactly the frames within one step of it.
"""

import numpy as np

from .errors import ShapeError
from .numerics import (ScorerParams, forward_scores, init_params,
                       load_params, save_params)

__all__ = ["build_scorer", "score", "score_with_cache", "save_scorer",
           "load_scorer", "ScorerParams"]


def build_scorer(dim: int = 2048, seed: int = 0,
                 hidden: tuple[int, int, int] | None = None) -> ScorerParams:
    """Fresh scorer with seeded uniform init; see numerics.init_params."""
    return init_params(dim=dim, hidden=hidden, seed=seed)


def score(params: ScorerParams, features: np.ndarray) -> np.ndarray:
    """Score every frame; returns shape [N], each value strictly in (0, 1)."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] < 1:
        raise ShapeError(f"features must be [N >= 1, d], "
                         f"got shape {features.shape}")
    return forward_scores(params, features)


def score_with_cache(params: ScorerParams, features: np.ndarray):
    """Like score() but also returns the activations for backward()."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] < 1:
        raise ShapeError(f"features must be [N >= 1, d], "
                         f"got shape {features.shape}")
    return forward_scores(params, features, want_cache=True)


save_scorer = save_params
load_scorer = load_params
