import itertools
import math

import numpy as np
import pytest

from vidsum.dataio import synth_dataset
from vidsum.errors import DataError, ShapeError
from vidsum.scorer import build_scorer, score
from vidsum.segmentation import (SUMMARY_BUDGET_RATIO, _scatter_table,
                                 generate_summary, knapsack_select,
                                 kts_segment, pick_assignment_edges)


def span_scatter(x, i, j):
    # direct definition: sum of squared distances to the span mean
    seg = x[i:j]
    mu = seg.mean(axis=0)
    return float(np.sum((seg - mu) ** 2))


def segmentation_objective(x, bounds, penalty):
    n = x.shape[0]
    cuts = [0] + list(bounds) + [n]
    cost = sum(span_scatter(x, a, b) for a, b in zip(cuts[:-1], cuts[1:]))
    m = len(bounds)
    if m:
        cost += penalty * m * (math.log(n / m) + 1.0)
    return cost


def best_objective_exhaustive(x, max_segments, penalty):
    n = x.shape[0]
    best = math.inf
    for m in range(0, max_segments):
        for bounds in itertools.combinations(range(1, n), m):
            best = min(best, segmentation_objective(x, bounds, penalty))
    return best


def test_scatter_table_matches_direct_formula():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((7, 3))
    scat = _scatter_table(x)
    for i in range(8):
        for j in range(8):
            if i >= j:
                assert scat[i, j] == np.inf
            else:
                assert abs(scat[i, j] - span_scatter(x, i, j)) < 1e-9


def test_kts_matches_exhaustive_search():
    rng = np.random.default_rng(1)
    for trial in range(25):
        n = int(rng.integers(4, 13))
        x = rng.standard_normal((n, 3)) + rng.integers(-2, 3, size=(n, 1))
        penalty = float(rng.choice([0.25, 1.0, 4.0]))
        max_seg = int(rng.integers(2, 5))
        bounds = kts_segment(x, max_segments=max_seg, penalty=penalty)
        assert bounds.size < max_seg
        assert np.all((bounds > 0) & (bounds < n))
        assert np.all(np.diff(bounds) > 0)
        got = segmentation_objective(x, bounds, penalty)
        want = best_objective_exhaustive(x, max_seg, penalty)
        assert abs(got - want) < 1e-8, f"trial {trial}: {got} vs {want}"


def test_kts_prefers_fewer_segments_under_high_penalty():
    rng = np.random.default_rng(2)
    x = rng.standard_normal((16, 4))
    assert kts_segment(x, penalty=1e9).size == 0


def test_kts_recovers_planted_scene_change():
    hits = 0
    for seed in range(10):
        rec = synth_dataset(n_videos=1, n_frames=48, dim=16, seed=seed,
                            scene_count=(2, 2), sharp_range=(1.0, 1.4),
                            center_scale=3.0, noise=0.0)[0]
        true_b = rec.change_points[0] // 15  # original units -> pick units
        got = kts_segment(rec.features, max_segments=2)
        if got.size == 1 and abs(int(got[0]) - true_b) <= 1:
            hits += 1
    assert hits == 10


def test_kts_edge_cases():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((6, 2))
    assert kts_segment(x, max_segments=1).size == 0
    assert kts_segment(x[:1]).size == 0
    caps = kts_segment(x, max_segments=50)  # capped at n internally
    assert np.all((caps > 0) & (caps < 6))
    with pytest.raises(ShapeError):
        kts_segment(x, penalty=-1.0)
    with pytest.raises(ShapeError):
        kts_segment(np.ones(5))


def knapsack_oracle(lengths, values, budget):
    # exhaustive scan with the full tie-break comparator
    n = len(lengths)
    best_key, best_set = None, ()
    for bits in range(1 << n):
        s = [i for i in range(n) if bits >> i & 1]
        w = sum(lengths[i] for i in s)
        if w > budget:
            continue
        v = sum(values[i] for i in s)
        key = (-v, w, tuple(s))
        if best_key is None or key < best_key:
            best_key, best_set = key, tuple(s)
    return np.array(best_set, dtype=np.int64)


def test_knapsack_matches_exhaustive_with_ties():
    rng = np.random.default_rng(4)
    for _ in range(40):
        n = int(rng.integers(1, 11))
        lengths = rng.integers(1, 7, size=n).tolist()
        # quarter-integer values make exact float ties common
        values = (rng.integers(1, 8, size=n) * 0.25).tolist()
        budget = int(rng.integers(0, sum(lengths) + 2))
        got = knapsack_select(lengths, values, budget)
        want = knapsack_oracle(lengths, values, budget)
        assert np.array_equal(got, want), (lengths, values, budget)


def test_knapsack_hand_cases():
    # classic: both small items beat the single large one
    assert knapsack_select([3, 4, 5], [3.0, 4.0, 5.0], 7).tolist() == [0, 1]
    # value ties resolve to fewer frames
    assert knapsack_select([1, 3], [1.0, 1.0], 3).tolist() == [0]
    # full tie resolves to the lexicographically earliest set
    assert knapsack_select([2, 2], [1.0, 1.0], 2).tolist() == [0]
    # value beats frame count
    assert knapsack_select([5, 1], [2.0, 1.0], 5).tolist() == [0]
    assert knapsack_select([4, 4], [1.0, 1.0], 3).size == 0
    assert knapsack_select([2, 2], [1.0, 1.0], 0).size == 0
    assert knapsack_select([], [], 5).size == 0


def test_knapsack_validation():
    with pytest.raises(DataError):
        knapsack_select([0, 2], [1.0, 1.0], 3)
    with pytest.raises(DataError):
        knapsack_select([1, 2], [1.0, np.inf], 3)
    with pytest.raises(DataError):
        knapsack_select([1], [1.0], -1)
    with pytest.raises(ShapeError):
        knapsack_select([1, 2], [1.0], 3)


def test_pick_edges_hand_case():
    edges = pick_assignment_edges(np.array([0, 10, 20]), 30)
    assert edges.tolist() == [0, 6, 16, 30]
    # frame 5 is equidistant from picks 0 and 10 and must go to the earlier
    assert edges[1] == 6


def test_pick_edges_match_nearest_rule():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n_orig = int(rng.integers(10, 80))
        k = int(rng.integers(1, min(10, n_orig)))
        picks = np.sort(rng.choice(n_orig, size=k, replace=False))
        edges = pick_assignment_edges(picks, n_orig)
        assert edges[0] == 0 and edges[-1] == n_orig
        for f in range(n_orig):
            dists = np.abs(picks - f)
            nearest = int(np.argmin(dists))  # argmin takes the earliest tie
            j = int(np.searchsorted(edges, f, side="right")) - 1
            assert j == nearest, (picks.tolist(), n_orig, f)


def test_pick_edges_validation():
    with pytest.raises(DataError):
        pick_assignment_edges(np.array([3, 3]), 10)
    with pytest.raises(DataError):
        pick_assignment_edges(np.array([0, 12]), 10)
    with pytest.raises(ShapeError):
        pick_assignment_edges(np.array([], dtype=np.int64), 10)


def test_generate_summary_invariants():
    rec = synth_dataset(n_videos=1, n_frames=40, dim=16, seed=6)[0]
    params = build_scorer(dim=16, seed=0)
    out = generate_summary(params, rec.features,
                           n_original=rec.n_original, picks=rec.picks)
    assert out.budget == math.floor(SUMMARY_BUDGET_RATIO * rec.n_original)
    assert int(out.frame_mask.sum()) <= out.budget
    assert out.frame_mask.shape == (rec.n_original,)
    assert out.chosen.dtype == bool

    # the mask must be exactly the union of the chosen segments' spans
    edges = pick_assignment_edges(rec.picks, rec.n_original)
    starts = np.concatenate(([0], out.boundaries))
    ends = np.concatenate((out.boundaries, [rec.n_frames]))
    expect = np.zeros(rec.n_original, dtype=np.uint8)
    for i in np.flatnonzero(out.chosen):
        expect[edges[starts[i]]:edges[ends[i]]] = 1
    assert np.array_equal(out.frame_mask, expect)

    # segment weight, value, and choice are mutually consistent
    p = score(params, rec.features)
    for i, (a, b) in enumerate(zip(starts, ends)):
        assert abs(out.segment_scores[i] - p[a:b].mean()) < 1e-12
        assert out.segment_lengths[i] == edges[b] - edges[a]
    want = knapsack_select(out.segment_lengths, out.segment_scores,
                           out.budget)
    assert np.array_equal(np.flatnonzero(out.chosen), want)


def test_generate_summary_identity_picks_default():
    rng = np.random.default_rng(7)
    x = rng.standard_normal((30, 8))
    params = build_scorer(dim=8, seed=1)
    out = generate_summary(params, x)
    assert out.frame_mask.shape == (30,)
    assert np.array_equal(out.picks, np.arange(30))
    assert out.budget == math.floor(0.15 * 30)


def test_generate_summary_accepts_given_boundaries():
    rng = np.random.default_rng(8)
    x = rng.standard_normal((20, 6))
    params = build_scorer(dim=6, seed=2)
    out = generate_summary(params, x, boundaries=np.array([5, 12]))
    assert out.boundaries.tolist() == [5, 12]
    assert out.segment_lengths.tolist() == [5, 7, 8]


def test_generate_summary_rejects_bad_boundaries():
    rng = np.random.default_rng(9)
    x = rng.standard_normal((20, 6))
    params = build_scorer(dim=6, seed=3)
    for bad in ([12, 5], [0, 5], [5, 25]):
        with pytest.raises(DataError):
            generate_summary(params, x, boundaries=np.array(bad))
    with pytest.raises(DataError):
        generate_summary(params, x, picks=np.arange(19))
