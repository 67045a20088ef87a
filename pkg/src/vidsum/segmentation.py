"""Temporal segmentation and budgeted segment selection.

Segmentation is kernel change-point detection with a linear kernel: the
within-segment scatter of every candidate span comes from cumulative sums
of the Gram matrix, dynamic programming finds the best split into k
segments for every k, and the segment count is chosen by minimising

    J_m + penalty * m * (ln(N / m) + 1)

over the number of interior boundaries m (m = 0 pays no penalty).

Selection packs segments into a 15% budget of the original frame count
with an exact 0/1 knapsack. Ties are broken deterministically: highest
total score, then fewest frames, then the lexicographically earliest
segment index set.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DataError, ShapeError
from .numerics import ScorerParams
from .scorer import score

SUMMARY_BUDGET_RATIO = 0.15


@dataclass
class SummarySelection:
    """A summary: which segments were kept and what that covers."""

    boundaries: np.ndarray       # interior boundaries, pick units
    segment_lengths: np.ndarray  # original frames represented per segment
    segment_scores: np.ndarray   # mean frame score per segment
    chosen: np.ndarray           # bool per segment
    budget: int                  # original-frame budget
    frame_mask: np.ndarray       # uint8 per original frame
    picks: np.ndarray            # original index of each scored frame


def _scatter_table(x: np.ndarray) -> np.ndarray:
    """J[i, j] = within-segment scatter of frames [i, j), +inf for i >= j.

    For a linear kernel the scatter of a span is
    sum ||x_t||^2 - (1/len) * (block sum of the Gram matrix), both of
    which come from cumulative sums. O(N^2 d) time, O(N^2) memory.
    """
    n = x.shape[0]
    gram = x @ x.T
    diag = np.zeros(n + 1)
    np.cumsum(np.diag(gram), out=diag[1:])
    blk = np.zeros((n + 1, n + 1))
    np.cumsum(np.cumsum(gram, axis=0), axis=1, out=blk[1:, 1:])
    i = np.arange(n + 1)[:, None]
    j = np.arange(n + 1)[None, :]
    length = j - i
    with np.errstate(invalid="ignore", divide="ignore"):
        block_sum = blk[j, j] - blk[i, j] - blk[j, i] + blk[i, i]
        scat = (diag[j] - diag[i]) - block_sum / length
    scat[length <= 0] = np.inf
    # tiny negatives from cancellation would confuse the DP's minimisation
    return np.where(length > 0, np.maximum(scat, 0.0), np.inf)


def kts_segment(features: np.ndarray, max_segments: int | None = None,
                penalty: float = 1.0) -> np.ndarray:
    """Interior boundaries (ascending, each in 1..N-1; possibly empty).

    max_segments bounds the number of segments considered (default
    ceil(N / 4), always capped at N). penalty scales the model-selection
    term; larger values favour fewer segments.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ShapeError(f"features must be [N >= 1, d], got {x.shape}")
    if penalty < 0.0:
        raise ShapeError(f"penalty must be >= 0, got {penalty}")
    n = x.shape[0]
    if max_segments is None:
        max_segments = math.ceil(n / 4)
    max_segments = max(1, min(int(max_segments), n))
    if n == 1 or max_segments == 1:
        return np.empty(0, dtype=np.int64)

    scat = _scatter_table(x)
    # cost[k - 1][j] = best scatter of frames [0, j) split into k segments
    cost = np.full((max_segments, n + 1), np.inf)
    arg = np.zeros((max_segments, n + 1), dtype=np.int64)
    cost[0] = scat[0]
    for k in range(1, max_segments):
        # candidate last-segment starts i; rows below k are unreachable
        m = cost[k - 1][:, None] + scat
        cost[k] = m.min(axis=0)
        arg[k] = m.argmin(axis=0)

    best_m, best_obj = 0, cost[0, n]
    for m_cp in range(1, max_segments):
        if not np.isfinite(cost[m_cp, n]):
            continue
        obj = cost[m_cp, n] + penalty * m_cp * (math.log(n / m_cp) + 1.0)
        if obj < best_obj:
            best_m, best_obj = m_cp, obj

    bounds = []
    j = n
    for k in range(best_m, 0, -1):
        j = int(arg[k, j])
        bounds.append(j)
    return np.array(bounds[::-1], dtype=np.int64)


def _lex_earlier(mask_a: int, mask_b: int) -> bool:
    """True if index set a sorts before b; sets must not be nested."""
    d = mask_a ^ mask_b
    low = d & -d
    return bool(mask_a & low)


def knapsack_select(lengths, values, budget: int) -> np.ndarray:
    """Exact 0/1 knapsack; returns chosen item indices, ascending.

    Maximises total value within the frame budget. Equal-value solutions
    prefer fewer total frames; still tied, the lexicographically earliest
    index set wins, so results are unique and reproducible.
    """
    lengths = np.asarray(lengths, dtype=np.int64)
    values = np.asarray(values, dtype=np.float64)
    if lengths.ndim != 1 or lengths.shape != values.shape:
        raise ShapeError(f"lengths {lengths.shape} and values "
                         f"{values.shape} must be equal-length vectors")
    if lengths.size and lengths.min() < 1:
        raise DataError("segment lengths must be positive")
    if not np.all(np.isfinite(values)):
        raise DataError("segment values must be finite")
    budget = int(budget)
    if budget < 0:
        raise DataError(f"budget must be >= 0, got {budget}")

    # cells indexed by exact total weight; value -inf marks unreachable
    val = [-math.inf] * (budget + 1)
    mask = [0] * (budget + 1)
    val[0] = 0.0
    for i, (w, v) in enumerate(zip(lengths.tolist(), values.tolist())):
        if w > budget:
            continue
        bit = 1 << i
        for c in range(budget, w - 1, -1):
            if val[c - w] == -math.inf:
                continue
            cand_v = val[c - w] + v
            cand_m = mask[c - w] | bit
            if (cand_v > val[c]
                    or (cand_v == val[c] and _lex_earlier(cand_m, mask[c]))):
                val[c] = cand_v
                mask[c] = cand_m

    best_c = 0
    for c in range(1, budget + 1):
        if val[c] == -math.inf:
            continue
        if val[c] > val[best_c]:
            best_c = c
        # equal value at higher weight never wins: fewer frames preferred
    chosen = [i for i in range(lengths.size) if mask[best_c] >> i & 1]
    return np.array(chosen, dtype=np.int64)


def pick_assignment_edges(picks: np.ndarray, n_original: int) -> np.ndarray:
    """edges[j]..edges[j+1] is the original-frame span nearest to pick j.

    Midpoint frames (exact ties) go to the earlier pick.
    """
    picks = np.asarray(picks, dtype=np.int64)
    if picks.ndim != 1 or picks.size < 1:
        raise ShapeError(f"picks must be a non-empty vector, "
                         f"got {picks.shape}")
    if np.any(np.diff(picks) <= 0):
        raise DataError("picks must be strictly ascending")
    if picks[0] < 0 or picks[-1] >= n_original:
        raise DataError(f"picks must lie in 0..{n_original - 1}")
    edges = np.empty(picks.size + 1, dtype=np.int64)
    edges[0] = 0
    edges[1:-1] = (picks[:-1] + picks[1:]) // 2 + 1
    edges[-1] = n_original
    return edges


def generate_summary(params: ScorerParams, features: np.ndarray,
                     n_original: int | None = None,
                     picks: np.ndarray | None = None,
                     boundaries: np.ndarray | None = None,
                     max_segments: int | None = None,
                     penalty: float = 1.0) -> SummarySelection:
    """Score, segment, and select a summary within the 15% frame budget.

    features are the scored (possibly subsampled) frames; picks maps them
    back to original frame indices (default: identity, n_original = N).
    boundaries, if given, are trusted pick-unit interior boundaries
    (e.g. precomputed change points); otherwise segmentation runs here.
    Segment value is the mean score of its picks; segment weight is the
    number of original frames nearest to those picks; the budget is
    floor(0.15 * n_original).
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ShapeError(f"features must be [N >= 1, d], got {x.shape}")
    n = x.shape[0]
    if picks is None:
        picks = np.arange(n, dtype=np.int64)
    picks = np.asarray(picks, dtype=np.int64)
    if picks.shape != (n,):
        raise DataError(f"picks must have shape ({n},), got {picks.shape}")
    if n_original is None:
        n_original = int(picks[-1]) + 1
    if boundaries is None:
        boundaries = kts_segment(x, max_segments=max_segments,
                                 penalty=penalty)
    boundaries = np.asarray(boundaries, dtype=np.int64)
    if boundaries.size:
        inside = (boundaries > 0) & (boundaries < n)
        if not (np.all(inside) and np.all(np.diff(boundaries) > 0)):
            raise DataError("boundaries must be ascending interior "
                            f"positions in 1..{n - 1}")

    p = score(params, x)
    edges = pick_assignment_edges(picks, n_original)
    starts = np.concatenate(([0], boundaries))
    ends = np.concatenate((boundaries, [n]))
    seg_scores = np.array([p[a:b].mean() for a, b in zip(starts, ends)])
    seg_lengths = edges[ends] - edges[starts]

    budget = int(math.floor(SUMMARY_BUDGET_RATIO * n_original))
    chosen_idx = knapsack_select(seg_lengths, seg_scores, budget)
    chosen = np.zeros(seg_scores.size, dtype=bool)
    chosen[chosen_idx] = True

    frame_mask = np.zeros(n_original, dtype=np.uint8)
    for i in chosen_idx:
        frame_mask[edges[starts[i]]:edges[ends[i]]] = 1

    return SummarySelection(boundaries=boundaries,
                            segment_lengths=seg_lengths,
                            segment_scores=seg_scores, chosen=chosen,
                            budget=budget, frame_mask=frame_mask,
                            picks=picks)
