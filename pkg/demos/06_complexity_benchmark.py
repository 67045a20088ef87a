"""
Measuring reward cost growth
============================

The two entropy rewards are cheap by construction: ptrim touches only the
selected frames (O(k)) and rep scans the profile once per selected frame
(O(N k)). The usual diversity/representativeness rewards computed in
feature space cost O(k^2 d) and O(N k d). This script times all four on
growing inputs and fits each against its expected cost term.

The grids here are scaled down so the demo runs in seconds; the library
defaults (used by the CLI bench subcommand) sweep N up to 1e5.
"""

from vidsum.evaluation import complexity_bench

grids = {
    "ptrim": [(10_000, 100), (10_000, 300), (10_000, 1_000), (10_000, 3_000)],
    "rep": [(1_000, 100), (2_000, 200), (4_000, 400), (8_000, 800)],
    "drdsn_div": [(100, 100), (300, 300), (1_000, 1_000), (3_000, 3_000)],
    "drdsn_rep": [(1_000, 100), (2_000, 200), (4_000, 400), (8_000, 800)],
}

for target, grid in grids.items():
    rep = complexity_bench(target, grid=grid, reps=5, seed=0)
    print(f"{target}: time ~ {rep.predictor}, R^2 = {rep.r2:.4f}")
    for n, k, t in rep.rows:
        print(f"    N={n:6d} k={k:5d}  median {t * 1e3:9.3f} ms")

# A high R^2 against the cost term (with rows that differ only in scale)
# is the check that the implementation grows at its documented rate.
# Comparing the slopes of rep and drdsn_rep shows what the entropy-space
# trick buys: the same O(N k) shape but on scalars instead of d-vectors.
