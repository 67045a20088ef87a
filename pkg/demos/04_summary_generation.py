"""
From scores to a summary
========================

Scores alone do not make a summary: frames come in shots, and a watchable
summary keeps or drops whole shots under a 15% length budget. This script
segments a video with kernel temporal segmentation, scores each segment
with a (pre)trained scorer, and picks the best subset with an exact 0/1
knapsack.
"""

import numpy as np

from vidsum.dataio import synth_dataset
from vidsum.numerics import init_params
from vidsum.pretrain import PretrainConfig, pretrain
from vidsum.segmentation import (generate_summary, knapsack_select,
                                 kts_segment, pick_assignment_edges)

rec = synth_dataset(n_videos=1, n_frames=64, dim=16, seed=3)[0]

# KTS finds change points by minimizing within-segment scatter plus a
# model-size penalty. The features here are subsampled picks; boundaries
# are indices into those picks.
bounds = kts_segment(rec.features, max_segments=6)
print(f"KTS boundaries (pick units) : {bounds.tolist()}")
print(f"planted boundaries          : {(rec.change_points // 15).tolist()}"
      " (true cuts / pick stride)")

# A quickly pretrained scorer stands in for the full pipeline.
params = init_params(dim=16, seed=0)
params, _ = pretrain(params, [rec.features],
                     PretrainConfig(epochs=40, lr=1e-3, seed=0))

# The summary generator expands picks back to original-frame spans,
# measures segment length in original frames, and runs the knapsack at a
# floor(0.15 * n_original) budget.
summary = generate_summary(params, rec.features, n_original=rec.n_original,
                           picks=rec.picks, boundaries=bounds)

print(f"\nbudget {summary.budget} of {rec.n_original} original frames")
edges = pick_assignment_edges(rec.picks, rec.n_original)
starts = np.concatenate(([0], summary.boundaries))
ends = np.concatenate((summary.boundaries, [rec.picks.size]))
print("segment  span(orig)      len  score    chosen")
for i, (a, b) in enumerate(zip(starts, ends)):
    lo, hi = edges[a], edges[b]
    mark = "x" if summary.chosen[i] else " "
    print(f"{i:7d}  [{lo:4d},{hi:4d})  {summary.segment_lengths[i]:6d}"
          f"  {summary.segment_scores[i]:.4f}   {mark}")
kept = int(summary.frame_mask.sum())
print(f"summary keeps {kept} frames ({kept / rec.n_original:.1%} of the video)")

# The selection is an exact knapsack solution. Re-derive it directly.
best = knapsack_select(summary.segment_lengths, summary.segment_scores,
                       summary.budget)
assert np.array_equal(np.flatnonzero(summary.chosen), best)
print("knapsack choice re-checked against the solver on raw segment data")
