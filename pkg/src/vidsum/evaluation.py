"""Rank-correlation evaluation, cross-validation, and runtime comparison.

Kendall tau-b runs in O(N log N) (merge-sort inversion counting); the test
suite checks it against a pairwise O(N^2) oracle for exact equality, which
works because the combinatorial part is pure integers and both sides finish
with the identical float expression (C - D) / sqrt((n0 - n1) * (n0 - n2)).
Spearman rho is Pearson correlation of average ranks. Both return NaN when
either sequence is constant (every pair tied).

The protocol is 5-fold cross-validation repeated over 10 random splits;
reported numbers are means over folds, then over runs.
"""

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .errors import DataError, ShapeError
from .infotheory import profile_from_entropies
from .numerics import init_params
from .pretrain import PretrainConfig, pretrain
from .reinforce import (RLConfig, drdsn_div, drdsn_rep, finetune,
                        reward_ptrim, reward_rep)
from .scorer import score

EVAL_MODES = ("per_annotator_mean", "vs_mean_gt")


def _check_pair(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or a.shape != b.shape:
        raise ShapeError(f"need two equal-length vectors, got {a.shape} "
                         f"and {b.shape}")
    if a.shape[0] < 2:
        raise ShapeError("need at least 2 elements")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise DataError("correlation inputs must be finite")
    return a, b


def _merge_count(vals: list) -> int:
    """Strict inversions (i < j, vals[i] > vals[j]) by bottom-up merge."""
    n = len(vals)
    src = list(vals)
    dst = [0.0] * n
    count = 0
    width = 1
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if src[j] < src[i]:
                    count += mid - i
                    dst[k] = src[j]
                    j += 1
                else:
                    dst[k] = src[i]
                    i += 1
                k += 1
            dst[k:hi] = src[i:mid] if i < mid else src[j:hi]
        src, dst = dst, src
        width *= 2
    return count


def _tie_term(sorted_vals: np.ndarray) -> int:
    """sum t*(t-1)/2 over runs of equal values in an already-sorted vector."""
    n = sorted_vals.shape[0]
    starts = np.flatnonzero(
        np.concatenate(([True], sorted_vals[1:] != sorted_vals[:-1])))
    runs = np.diff(np.concatenate((starts, [n])))
    return int(np.sum(runs * (runs - 1) // 2))


def kendall_tau(a, b) -> float:
    """Kendall tau-b: (C - D) / sqrt((n0 - n1) * (n0 - n2)).

    n1, n2 are the tie terms of each sequence. NaN when either side is
    all ties. Everything up to the final expression is integer arithmetic.
    """
    a, b = _check_pair(a, b)
    n = a.shape[0]
    order = np.lexsort((b, a))
    sa, sb = a[order], b[order]

    n0 = n * (n - 1) // 2
    n1 = _tie_term(sa)
    n2 = _tie_term(np.sort(b, kind="stable"))
    both = np.flatnonzero(
        np.concatenate(([True],
                        (sa[1:] != sa[:-1]) | (sb[1:] != sb[:-1]))))
    runs = np.diff(np.concatenate((both, [n])))
    n3 = int(np.sum(runs * (runs - 1) // 2))

    dis = _merge_count(sb.tolist())
    con_minus_dis = n0 - n1 - n2 + n3 - 2 * dis
    if n0 == n1 or n0 == n2:
        return float("nan")
    return con_minus_dis / math.sqrt((n0 - n1) * (n0 - n2))


def average_ranks(x) -> np.ndarray:
    """1-based ranks; tied values share the mean of their positions."""
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="stable")
    s = x[order]
    ranks = np.empty(x.shape[0])
    starts = np.flatnonzero(np.concatenate(([True], s[1:] != s[:-1])))
    ends = np.concatenate((starts[1:], [x.shape[0]]))
    for lo, hi in zip(starts, ends):
        ranks[order[lo:hi]] = 0.5 * (lo + hi - 1) + 1.0
    return ranks


def spearman_rho(a, b) -> float:
    """Pearson correlation of average ranks; NaN if either side is constant."""
    a, b = _check_pair(a, b)
    ra = average_ranks(a)
    rb = average_ranks(b)
    u = ra - ra.mean()
    v = rb - rb.mean()
    su = math.sqrt(float(np.sum(u * u)))
    sv = math.sqrt(float(np.sum(v * v)))
    if su == 0.0 or sv == 0.0:
        return float("nan")
    return float(np.dot(u, v)) / (su * sv)


@dataclass
class VideoEval:
    video_id: str
    tau: float
    rho: float


@dataclass
class EvalReport:
    rows: list
    mean_tau: float
    mean_rho: float
    mode: str


def evaluate(params, records, mode: str = "per_annotator_mean") -> EvalReport:
    """Correlate predicted scores with annotations, per video.

    records need .video_id, .features [N, d] and .annotations [A, N].
    per_annotator_mean averages the correlation over annotator rows
    (skipping NaN rows, e.g. a constant annotator); vs_mean_gt correlates
    against the annotator mean vector. Report means skip NaN videos.
    """
    if mode not in EVAL_MODES:
        raise DataError(f"unknown eval mode {mode!r}, want one of "
                        f"{EVAL_MODES}")
    rows = []
    for rec in records:
        ann = np.asarray(rec.annotations, dtype=np.float64)
        if ann.ndim != 2 or ann.shape[0] < 1:
            raise DataError(f"video {rec.video_id}: needs at least one "
                            f"annotation row, got shape {ann.shape}")
        p = score(params, rec.features)
        if ann.shape[1] != p.shape[0]:
            raise DataError(f"video {rec.video_id}: annotation length "
                            f"{ann.shape[1]} != frame count {p.shape[0]}")
        if mode == "per_annotator_mean":
            taus = np.array([kendall_tau(p, row) for row in ann])
            rhos = np.array([spearman_rho(p, row) for row in ann])
            tau = float(np.nanmean(taus)) if np.any(~np.isnan(taus)) \
                else float("nan")
            rho = float(np.nanmean(rhos)) if np.any(~np.isnan(rhos)) \
                else float("nan")
        else:
            g = ann.mean(axis=0)
            tau = kendall_tau(p, g)
            rho = spearman_rho(p, g)
        rows.append(VideoEval(video_id=rec.video_id, tau=tau, rho=rho))
    taus = np.array([r.tau for r in rows])
    rhos = np.array([r.rho for r in rows])
    mean_tau = float(np.nanmean(taus)) if rows and np.any(~np.isnan(taus)) \
        else float("nan")
    mean_rho = float(np.nanmean(rhos)) if rows and np.any(~np.isnan(rhos)) \
        else float("nan")
    return EvalReport(rows=rows, mean_tau=mean_tau, mean_rho=mean_rho,
                      mode=mode)


def random_baseline(records, mode: str = "per_annotator_mean",
                    draws: int = 100, seed: int = 0) -> np.ndarray:
    """Mean tau of i.i.d. uniform scores, one value per draw.

    The null distribution the smoke tests compare against.
    """
    rng = np.random.default_rng(seed)
    out = np.empty(draws)
    for d in range(draws):
        taus = []
        for rec in records:
            ann = np.asarray(rec.annotations, dtype=np.float64)
            p = rng.random(ann.shape[1])
            if mode == "per_annotator_mean":
                vals = np.array([kendall_tau(p, row) for row in ann])
                taus.append(float(np.nanmean(vals))
                            if np.any(~np.isnan(vals)) else float("nan"))
            else:
                taus.append(kendall_tau(p, ann.mean(axis=0)))
        out[d] = float(np.nanmean(np.array(taus)))
    return out


def _seed_from(parts) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def train_once(train_records, pre_cfg: PretrainConfig, rl_cfg: RLConfig,
               init_seed: int = 0, hidden=None):
    """init -> pretrain -> finetune on the given records; returns params."""
    feats = [np.asarray(r.features, dtype=np.float64) for r in train_records]
    if not feats:
        raise DataError("training split is empty")
    dim = feats[0].shape[1]
    params = init_params(dim=dim, hidden=hidden, seed=init_seed)
    params, _ = pretrain(params, feats, pre_cfg)
    params, _ = finetune(params, feats, rl_cfg)
    return params


def _cv_fold(args):
    (train_records, test_records, pre_cfg, rl_cfg, init_seed, mode) = args
    params = train_once(train_records, pre_cfg, rl_cfg, init_seed=init_seed)
    rep = evaluate(params, test_records, mode=mode)
    return rep.mean_tau, rep.mean_rho


@dataclass
class CVReport:
    fold_tau: np.ndarray   # [runs, folds]
    fold_rho: np.ndarray
    run_tau: np.ndarray    # [runs]
    run_rho: np.ndarray
    mean_tau: float
    mean_rho: float
    folds: int
    runs: int
    mode: str


def cross_validate(records, pre_cfg: PretrainConfig, rl_cfg: RLConfig,
                   folds: int = 5, runs: int = 10,
                   mode: str = "per_annotator_mean", seed: int = 0,
                   jobs: int = 1) -> CVReport:
    """Repeated k-fold protocol; every fold trains from scratch.

    Split permutations and per-fold train seeds derive from (seed, run,
    fold) so results do not depend on jobs or scheduling. jobs > 1 farms
    folds out to processes.
    """
    records = list(records)
    if len(records) < folds:
        raise DataError(f"need at least {folds} videos for {folds}-fold "
                        f"splits, got {len(records)}")
    tasks = []
    keys = []
    for r in range(runs):
        perm = np.random.default_rng(
            np.random.SeedSequence([seed, r])).permutation(len(records))
        parts = np.array_split(perm, folds)
        for f in range(folds):
            test_idx = set(parts[f].tolist())
            train = [records[i] for i in range(len(records))
                     if i not in test_idx]
            test = [records[i] for i in sorted(test_idx)]
            pc = replace(pre_cfg, seed=_seed_from((seed, r, f, 0)))
            rc = replace(rl_cfg, seed=_seed_from((seed, r, f, 1)))
            init_seed = _seed_from((seed, r, f, 2))
            tasks.append((train, test, pc, rc, init_seed, mode))
            keys.append((r, f))

    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_cv_fold, tasks))
    else:
        results = [_cv_fold(t) for t in tasks]

    fold_tau = np.full((runs, folds), np.nan)
    fold_rho = np.full((runs, folds), np.nan)
    for (r, f), (t, h) in zip(keys, results):
        fold_tau[r, f] = t
        fold_rho[r, f] = h
    run_tau = np.nanmean(fold_tau, axis=1)
    run_rho = np.nanmean(fold_rho, axis=1)
    return CVReport(fold_tau=fold_tau, fold_rho=fold_rho,
                    run_tau=run_tau, run_rho=run_rho,
                    mean_tau=float(np.nanmean(run_tau)),
                    mean_rho=float(np.nanmean(run_rho)),
                    folds=folds, runs=runs, mode=mode)


BENCH_TARGETS = ("ptrim", "rep", "drdsn_div", "drdsn_rep")

_DEFAULT_GRIDS = {
    # (N, k) rows; each target exercises the sizes its cost depends on
    "ptrim": [(100_000, 100), (100_000, 300), (100_000, 1_000),
              (100_000, 3_000), (100_000, 10_000)],
    "rep": [(1_000, 100), (3_000, 300), (10_000, 1_000),
            (30_000, 3_000), (100_000, 10_000)],
    "drdsn_div": [(100, 100), (300, 300), (1_000, 1_000),
                  (3_000, 3_000), (10_000, 10_000)],
    # fixed n:k ratio so rows differ only in scale, not matrix shape;
    # mixed-shape rows at equal n*k time differently and spoil the fit
    "drdsn_rep": [(1_000, 100), (3_000, 300), (10_000, 1_000),
                  (30_000, 3_000), (100_000, 10_000)],
}

_PREDICTOR = {
    "ptrim": ("k", lambda n, k: k),
    "rep": ("n*k", lambda n, k: n * k),
    "drdsn_div": ("k^2", lambda n, k: k * k),
    "drdsn_rep": ("n*k", lambda n, k: n * k),
}


@dataclass
class BenchReport:
    target: str
    rows: list            # (n, k, median_seconds)
    predictor: str        # which size product the fit is against
    slope: float
    intercept: float
    r2: float


def complexity_bench(target: str, grid=None, reps: int = 30,
                     seed: int = 0, dim: int = 16) -> BenchReport:
    """Median wall time of one reward call over a size grid, plus a
    least-squares fit of time against the reward's expected cost term.

    Entropy profiles (and the feature matrices for the feature-space
    rewards) are built outside the timed region; only the reward call is
    timed. Two warm-up calls per row are discarded.
    """
    if target not in BENCH_TARGETS:
        raise DataError(f"unknown bench target {target!r}, want one of "
                        f"{BENCH_TARGETS}")
    if grid is None:
        grid = _DEFAULT_GRIDS[target]
    rows = []
    for n, k in grid:
        if k > n:
            raise DataError(f"grid row has k={k} > n={n}")
        rng = np.random.default_rng(np.random.SeedSequence([seed, n, k]))
        sel = np.sort(rng.choice(n, size=k, replace=False))
        if target in ("ptrim", "rep"):
            arg = profile_from_entropies(rng.uniform(0.5, 5.0, size=n))
            fn = reward_ptrim if target == "ptrim" else reward_rep
        else:
            arg = rng.standard_normal((n, dim))
            fn = drdsn_div if target == "drdsn_div" else drdsn_rep
        call = lambda: fn(arg, sel)
        call()
        call()
        times = []
        for _ in range(reps):
            t0 = time.perf_counter()
            call()
            times.append(time.perf_counter() - t0)
        times.sort()
        mid = len(times) // 2
        median = times[mid] if len(times) % 2 else \
            0.5 * (times[mid - 1] + times[mid])
        rows.append((n, k, median))

    name, term = _PREDICTOR[target]
    xs = np.array([term(n, k) for n, k, _ in rows], dtype=np.float64)
    ts = np.array([t for _, _, t in rows])
    a = np.stack([xs, np.ones_like(xs)], axis=1)
    coef, *_ = np.linalg.lstsq(a, ts, rcond=None)
    pred = a @ coef
    ss_res = float(np.sum((ts - pred) ** 2))
    ss_tot = float(np.sum((ts - ts.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else float("nan")
    return BenchReport(target=target, rows=rows, predictor=name,
                       slope=float(coef[0]), intercept=float(coef[1]),
                       r2=r2)
