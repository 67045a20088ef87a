"""
Stage 1: self-supervised pretraining
====================================

The frame scorer is first trained without any labels. Each step draws two
randomly masked views of a video's feature matrix and asks the scorer to
produce score vectors that (a) correlate across the two views and (b) keep
a healthy spread. No annotations are touched.
"""

import numpy as np

from vidsum.dataio import synth_dataset
from vidsum.numerics import init_params
from vidsum.pretrain import PretrainConfig, mask_augment, pretrain
from vidsum.scorer import score

records = synth_dataset(n_videos=8, n_frames=64, dim=16, seed=0)
videos = [r.features for r in records]
params = init_params(dim=16, seed=0)

# What one augmentation looks like: a random subset of frames is replaced
# by the video's mean frame. Two independent draws give two views.
rng = np.random.default_rng(0)
view = mask_augment(videos[0], 0.3, rng)
changed = int((view != videos[0]).any(axis=1).sum())
print(f"masking 30% of 64 frames replaced {changed} frames with the mean frame")

# The default lr (1e-5) is sized for full-scale 2048-dim features; this
# 16-dim miniature needs a bigger step to move visibly in 90 epochs.
cfg = PretrainConfig(epochs=90, lr=1e-3, seed=0)
params, trace = pretrain(params, videos, cfg)

print("\nepoch  mean loss")
for e in range(0, cfg.epochs, 10):
    print(f"{e + 1:5d}  {trace[e]:9.4f}")
print(f"{cfg.epochs:5d}  {trace[-1]:9.4f}")
print(f"\nloss fell {trace[0]:.4f} -> {trace[-1]:.4f}")

# After pretraining the scores already vary across frames, which is all
# stage 2 needs to start exploring.
p = score(params, videos[0])
print(f"score spread on video 0: std {p.std():.4f} (range {p.min():.3f}..{p.max():.3f})")
