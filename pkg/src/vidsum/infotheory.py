"""Per-frame entropy and its relative temporal change.

A frame's feature vector x_t is turned into a distribution with a softmax
(max-shifted before exponentiation, so adding a constant to every component
changes nothing), entropy is Shannon entropy in nats, and the profile tracks
how much the entropy moves between consecutive frames relative to its
current level:

    delta_t = |H_t - H_{t-1}| / max(H_t, 1e-12),   delta_1 = 0.

The denominator guard only matters for degenerate one-hot-like frames whose
entropy underflows to zero. delta is invariant to the log base, since a base
change rescales every H_t by the same factor.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError

ENTROPY_FLOOR = 1e-12


@dataclass
class EntropyProfile:
    """entropies[t] = H_t in nats; deltas[t] = relative change, deltas[0]=0."""

    entropies: np.ndarray
    deltas: np.ndarray

    def __len__(self) -> int:
        return self.entropies.shape[0]


def distribution(x: np.ndarray) -> np.ndarray:
    """Softmax of one feature vector; sums to 1, every component in (0, 1]."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] < 1:
        raise ShapeError(f"expected a non-empty vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError("feature vector has non-finite components")
    z = x - np.max(x)
    e = np.exp(z)
    return e / np.sum(e)


def entropy(d: np.ndarray) -> float:
    """Shannon entropy in nats; 0*log(0) is taken as 0."""
    d = np.asarray(d, dtype=np.float64)
    if d.ndim != 1 or d.shape[0] < 1:
        raise ShapeError(f"expected a non-empty vector, got shape {d.shape}")
    if np.any(d < 0.0):
        raise DomainError("distribution has a negative component")
    total = float(np.sum(d))
    if not np.isfinite(total) or abs(total - 1.0) > 1e-9:
        raise DomainError(f"distribution sums to {total!r}, not 1")
    mask = d > 0.0
    return float(-np.sum(d[mask] * np.log(d[mask])))


def entropy_profile(x: np.ndarray) -> EntropyProfile:
    """Profile of a whole sequence, x [N, d] with N >= 2.

    Row-vectorised but numerically identical in formula to calling
    distribution() then entropy() per frame.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError(f"features must be [N, d], got shape {x.shape}")
    if x.shape[0] < 2:
        raise ShapeError(f"need at least 2 frames, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise DomainError("features have non-finite components")
    z = x - np.max(x, axis=1, keepdims=True)
    e = np.exp(z)
    d = e / np.sum(e, axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(d > 0.0, d * np.log(d), 0.0)
    h = -np.sum(terms, axis=1)
    return profile_from_entropies(h)


def profile_from_entropies(h: np.ndarray) -> EntropyProfile:
    """Build the delta sequence from an entropy sequence."""
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 1 or h.shape[0] < 2:
        raise ShapeError(f"need an entropy vector of length >= 2, "
                         f"got shape {h.shape}")
    deltas = np.zeros_like(h)
    deltas[1:] = np.abs(h[1:] - h[:-1]) / np.maximum(h[1:], ENTROPY_FLOOR)
    return EntropyProfile(entropies=h, deltas=deltas)
