import math
from types import SimpleNamespace

import numpy as np
import pytest

from vidsum.dataio import synth_dataset
from vidsum.errors import DataError, ShapeError
from vidsum.evaluation import (average_ranks, complexity_bench,
                               cross_validate, evaluate, kendall_tau,
                               random_baseline, spearman_rho, train_once)
from vidsum.pretrain import PretrainConfig
from vidsum.reinforce import RLConfig
from vidsum.scorer import build_scorer, score


def kendall_oracle(a, b):
    # O(N^2) pair scan; only the final division is float arithmetic, and it
    # is the same expression the fast path uses, so equality is exact
    n = len(a)
    conc = disc = ties_a = ties_b = 0
    for i in range(n):
        for j in range(i + 1, n):
            da, db = a[i] - a[j], b[i] - b[j]
            if da == 0 and db == 0:
                ties_a += 1
                ties_b += 1
            elif da == 0:
                ties_a += 1
            elif db == 0:
                ties_b += 1
            elif (da > 0) == (db > 0):
                conc += 1
            else:
                disc += 1
    n0 = n * (n - 1) // 2
    if ties_a == n0 or ties_b == n0:
        return float("nan")
    return (conc - disc) / math.sqrt((n0 - ties_a) * (n0 - ties_b))


def rank_oracle(x):
    # definition-level average ranks via pair counting
    n = len(x)
    out = np.empty(n)
    for i in range(n):
        less = sum(1 for j in range(n) if x[j] < x[i])
        equal = sum(1 for j in range(n) if x[j] == x[i])
        out[i] = 1.0 + less + (equal - 1) / 2.0
    return out


def test_kendall_known_values():
    assert kendall_tau([1, 2, 3, 4], [1, 3, 2, 4]) == 2.0 / 3.0
    assert kendall_tau([1, 2, 3, 4], [1, 2, 3, 4]) == 1.0
    assert kendall_tau([1, 2, 3, 4], [4, 3, 2, 1]) == -1.0


def test_kendall_constant_input_is_nan():
    assert math.isnan(kendall_tau([2, 2, 2], [1, 2, 3]))
    assert math.isnan(kendall_tau([1, 2, 3], [7, 7, 7]))


def test_kendall_matches_pair_oracle_exactly():
    rng = np.random.default_rng(0)
    for trial in range(200):
        n = int(rng.integers(2, 60))
        if trial % 2:
            a = rng.integers(0, 6, size=n).astype(float)
            b = rng.integers(0, 6, size=n).astype(float)
        else:
            a = rng.standard_normal(n)
            b = rng.standard_normal(n)
        got = kendall_tau(a, b)
        want = kendall_oracle(a.tolist(), b.tolist())
        if math.isnan(want):
            assert math.isnan(got)
        else:
            assert got == want, (trial, got, want)


def test_kendall_matches_scipy():
    stats = pytest.importorskip("scipy.stats")
    rng = np.random.default_rng(1)
    for _ in range(30):
        a = rng.integers(0, 5, size=25).astype(float)
        b = rng.integers(0, 5, size=25).astype(float)
        want = stats.kendalltau(a, b, variant="b").statistic
        assert abs(kendall_tau(a, b) - want) < 1e-12


def test_kendall_input_validation():
    with pytest.raises(ShapeError):
        kendall_tau([1, 2], [1, 2, 3])
    with pytest.raises(ShapeError):
        kendall_tau([1], [1])
    with pytest.raises(DataError):
        kendall_tau([1.0, np.nan], [1.0, 2.0])


def test_average_ranks_hand_case_and_oracle():
    assert average_ranks([10, 20, 20, 30]).tolist() == [1.0, 2.5, 2.5, 4.0]
    rng = np.random.default_rng(2)
    for _ in range(20):
        x = rng.integers(0, 5, size=int(rng.integers(2, 30))).astype(float)
        assert np.allclose(average_ranks(x), rank_oracle(x), atol=1e-12)


def test_spearman_known_values_and_oracle():
    assert abs(spearman_rho([1, 2, 3, 5], [2, 4, 9, 11]) - 1.0) < 1e-12
    assert abs(spearman_rho([1, 2, 3], [9, 5, 1]) + 1.0) < 1e-12
    assert math.isnan(spearman_rho([3, 3, 3], [1, 2, 3]))
    rng = np.random.default_rng(3)
    for _ in range(30):
        n = int(rng.integers(3, 40))
        a = rng.integers(0, 6, size=n).astype(float)
        b = rng.integers(0, 6, size=n).astype(float)
        ra, rb = rank_oracle(a), rank_oracle(b)
        if np.all(ra == ra[0]) or np.all(rb == rb[0]):
            assert math.isnan(spearman_rho(a, b))
            continue
        want = np.corrcoef(ra, rb)[0, 1]
        assert abs(spearman_rho(a, b) - want) < 1e-12


def test_spearman_matches_scipy():
    stats = pytest.importorskip("scipy.stats")
    rng = np.random.default_rng(4)
    for _ in range(20):
        a = rng.integers(0, 4, size=20).astype(float)
        b = rng.standard_normal(20)
        want = stats.spearmanr(a, b).statistic
        assert abs(spearman_rho(a, b) - want) < 1e-12


def test_evaluate_per_annotator_mean():
    recs = synth_dataset(n_videos=3, n_frames=32, dim=8, seed=5)
    params = build_scorer(dim=8, seed=0)
    rep = evaluate(params, recs)
    assert rep.mode == "per_annotator_mean"
    assert len(rep.rows) == 3
    for rec, row in zip(recs, rep.rows):
        p = score(params, rec.features)
        taus = [kendall_tau(p, ann) for ann in rec.annotations]
        rhos = [spearman_rho(p, ann) for ann in rec.annotations]
        assert row.video_id == rec.video_id
        assert abs(row.tau - np.nanmean(taus)) < 1e-12
        assert abs(row.rho - np.nanmean(rhos)) < 1e-12
    assert abs(rep.mean_tau - np.mean([r.tau for r in rep.rows])) < 1e-12


def test_evaluate_vs_mean_gt():
    recs = synth_dataset(n_videos=2, n_frames=24, dim=8, seed=6)
    params = build_scorer(dim=8, seed=0)
    rep = evaluate(params, recs, mode="vs_mean_gt")
    for rec, row in zip(recs, rep.rows):
        p = score(params, rec.features)
        assert p.std() > 0  # scores vary, so the correlations are defined
        g = rec.annotations.mean(axis=0)
        assert row.tau == kendall_tau(p, g)
        assert row.rho == spearman_rho(p, g)


def test_evaluate_skips_constant_annotator_rows():
    rng = np.random.default_rng(7)
    feats = rng.standard_normal((20, 6))
    ann = np.stack([np.full(20, 0.5), rng.random(20)])
    rec = SimpleNamespace(video_id="v0", features=feats, annotations=ann)
    params = build_scorer(dim=6, seed=2)
    rep = evaluate(params, [rec])
    p = score(params, feats)
    assert rep.rows[0].tau == kendall_tau(p, ann[1])


def test_evaluate_rejects_bad_input():
    rng = np.random.default_rng(8)
    params = build_scorer(dim=6, seed=3)
    bad = SimpleNamespace(video_id="v0",
                          features=rng.standard_normal((20, 6)),
                          annotations=rng.random((2, 19)))
    with pytest.raises(DataError):
        evaluate(params, [bad])
    with pytest.raises(DataError):
        evaluate(params, [], mode="nonsense")


def test_random_baseline_centred_and_deterministic():
    recs = synth_dataset(n_videos=3, n_frames=64, dim=8, seed=9)
    base = random_baseline(recs, draws=100, seed=0)
    assert base.shape == (100,)
    assert np.all(np.isfinite(base))
    assert abs(base.mean()) < 0.05
    again = random_baseline(recs, draws=100, seed=0)
    assert np.array_equal(base, again)


def _tiny_cfgs():
    pre = PretrainConfig(epochs=2, lr=1e-3)
    rl = RLConfig(epochs=2, lr=1e-3, episodes=2)
    return pre, rl


def test_train_once_runs_and_validates():
    recs = synth_dataset(n_videos=2, n_frames=16, dim=8, seed=10)
    pre, rl = _tiny_cfgs()
    params = train_once(recs, pre, rl, init_seed=0)
    p = score(params, recs[0].features)
    assert p.shape == (16,)
    assert np.all(np.isfinite(p))
    with pytest.raises(DataError):
        train_once([], pre, rl)


def test_cross_validate_shapes_and_determinism():
    recs = synth_dataset(n_videos=6, n_frames=16, dim=8, seed=11)
    pre, rl = _tiny_cfgs()
    rep1 = cross_validate(recs, pre, rl, folds=2, runs=2, seed=1)
    assert rep1.fold_tau.shape == (2, 2)
    assert rep1.run_tau.shape == (2,)
    assert np.all(np.isfinite(rep1.fold_tau))
    assert abs(rep1.mean_tau - rep1.run_tau.mean()) < 1e-12
    rep2 = cross_validate(recs, pre, rl, folds=2, runs=2, seed=1)
    assert np.array_equal(rep1.fold_tau, rep2.fold_tau)
    assert np.array_equal(rep1.fold_rho, rep2.fold_rho)


def test_cross_validate_jobs_do_not_change_results():
    recs = synth_dataset(n_videos=4, n_frames=16, dim=8, seed=12)
    pre, rl = _tiny_cfgs()
    serial = cross_validate(recs, pre, rl, folds=2, runs=1, seed=2, jobs=1)
    parallel = cross_validate(recs, pre, rl, folds=2, runs=1, seed=2, jobs=2)
    assert np.array_equal(serial.fold_tau, parallel.fold_tau)
    assert np.array_equal(serial.fold_rho, parallel.fold_rho)


def test_cross_validate_rejects_too_few_videos():
    recs = synth_dataset(n_videos=3, n_frames=16, dim=8, seed=13)
    pre, rl = _tiny_cfgs()
    with pytest.raises(DataError):
        cross_validate(recs, pre, rl, folds=5, runs=1)


def test_complexity_bench_structure():
    grid = [(200, 10), (400, 20), (800, 40)]
    rep = complexity_bench("ptrim", grid=grid, reps=3)
    assert rep.target == "ptrim"
    assert rep.predictor == "k"
    assert [(n, k) for n, k, _ in rep.rows] == grid
    assert all(t > 0 for _, _, t in rep.rows)
    assert np.isfinite(rep.slope)
    rep2 = complexity_bench("drdsn_div", grid=[(50, 50), (100, 100)], reps=2)
    assert rep2.predictor == "k^2"


def test_complexity_bench_validation():
    with pytest.raises(DataError):
        complexity_bench("quadratic")
    with pytest.raises(DataError):
        complexity_bench("rep", grid=[(10, 20)], reps=1)
