"""Policy-gradient fine-tuning with entropy-based rewards.

Scores are treated as independent Bernoulli keep-probabilities. Per update,
T action vectors are sampled, each selection S is scored with

    R = R_ptrim + lambda * R_rep        (lambda_on = "rep", the default)
    R = R_rep + lambda * R_ptrim        (lambda_on = "ptrim")

where, over the video's entropy profile (H_t, delta_t):

    R_ptrim = mean of delta_t over S, dividing by |S| - 1 (0 if |S| <= 1)
    R_rep   = exp(-mean_t min_{t' in S} |H_t - H_{t'}|)

and an empty S earns total reward 0. The surrogate loss whose gradient is
taken is -(1/T) sum_n (R_n - b) sum_t log pi(a_nt), with the rewards and the
moving-average baseline b held constant, plus beta * (mean(p) - eps)^2 to
keep the mean score near eps. The two classic feature-space rewards
(pairwise cosine dissimilarity, O(k^2); Euclidean representativeness,
O(N*k)) are provided for runtime comparison only and never train anything.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (ConfigError, DegenerateInputError, NumericError,
                     ShapeError)
from .infotheory import EntropyProfile, entropy_profile
from .numerics import (ScorerParams, adam_step, backward, forward_scores,
                       init_adam)

PROB_CLAMP = 1e-7
LAMBDA_PLACEMENTS = ("rep", "ptrim")


@dataclass
class RLConfig:
    epochs: int = 60
    lr: float = 1e-5
    weight_decay: float = 1e-5
    lam: float = 0.85
    lambda_on: str = "rep"
    beta: float = 0.01
    epsilon: float = 0.5
    episodes: int = 5
    baseline_momentum: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError(f"rl.epochs must be >= 1, got {self.epochs}")
        if self.episodes < 1:
            raise ConfigError(f"rl.episodes must be >= 1, "
                              f"got {self.episodes}")
        if self.lambda_on not in LAMBDA_PLACEMENTS:
            raise ConfigError(f"rl.lambda_on must be one of "
                              f"{LAMBDA_PLACEMENTS}, got {self.lambda_on!r}")
        if not (0.0 < self.epsilon < 1.0):
            raise ConfigError(f"rl.epsilon must be in (0, 1), "
                              f"got {self.epsilon}")
        if self.lam < 0.0 or self.beta < 0.0:
            raise ConfigError("rl.lambda and rl.beta must be >= 0")
        if not (0.0 <= self.baseline_momentum < 1.0):
            raise ConfigError(f"rl.baseline_momentum must be in [0, 1), "
                              f"got {self.baseline_momentum}")
        if self.lr <= 0.0:
            raise ConfigError(f"rl.lr must be > 0, got {self.lr}")


@dataclass
class EpisodeBatch:
    """What one update step sampled and earned."""

    actions: np.ndarray        # [T, N] int8
    rewards: np.ndarray        # [T] total reward per episode
    baseline: float            # the value subtracted from the rewards
    rewards_ptrim: np.ndarray | None = None  # [T]
    rewards_rep: np.ndarray | None = None    # [T]


@dataclass
class RewardTrace:
    """Per-epoch means across videos (each first averaged over episodes)."""

    mean_total: np.ndarray
    mean_ptrim: np.ndarray
    mean_rep: np.ndarray


def sample_actions(p: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One Bernoulli draw per frame; returns int8 0/1 of the same length."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1:
        raise ShapeError(f"probabilities must be a vector, got {p.shape}")
    return (rng.random(p.shape[0]) < p).astype(np.int8)


def _check_selected(selected, n: int) -> np.ndarray:
    s = np.asarray(selected, dtype=np.int64)
    if s.ndim != 1:
        raise ShapeError(f"selection must be a vector of indices, "
                         f"got shape {s.shape}")
    if s.size and (s.min() < 0 or s.max() >= n):
        raise IndexError(f"selection index out of range 0..{n - 1}")
    return s


def reward_ptrim(profile: EntropyProfile, selected) -> float:
    """Mean relative entropy change over the selection, |S|-1 denominator.

    O(|S|) once the profile exists. Selections of size 0 or 1 earn 0.
    """
    s = _check_selected(selected, len(profile))
    if s.size <= 1:
        return 0.0
    return float(np.sum(profile.deltas[s]) / (s.size - 1))


def reward_rep(profile: EntropyProfile, selected) -> float:
    """exp(-mean distance from each frame's entropy to its nearest kept one).

    Runs as |S| passes over the entropy vector: O(N*|S|) time, O(N) memory,
    which is what the runtime comparison measures.
    """
    s = _check_selected(selected, len(profile))
    if s.size == 0:
        raise DegenerateInputError("representativeness needs a non-empty "
                                   "selection")
    h = profile.entropies
    best = np.full(h.shape[0], np.inf)
    for t in s:
        np.minimum(best, np.abs(h - h[t]), out=best)
    return float(np.exp(-best.mean()))


def reward_components(profile: EntropyProfile, selected, lam: float,
                      lambda_on: str = "rep"):
    """Returns (total, r_ptrim, r_rep); an empty selection earns all zeros."""
    if lambda_on not in LAMBDA_PLACEMENTS:
        raise ConfigError(f"lambda_on must be one of {LAMBDA_PLACEMENTS}, "
                          f"got {lambda_on!r}")
    s = _check_selected(selected, len(profile))
    if s.size == 0:
        return 0.0, 0.0, 0.0
    r_pt = reward_ptrim(profile, s)
    r_rep = reward_rep(profile, s)
    if lambda_on == "rep":
        return r_pt + lam * r_rep, r_pt, r_rep
    return r_rep + lam * r_pt, r_pt, r_rep


def total_reward(profile: EntropyProfile, selected, lam: float,
                 lambda_on: str = "rep") -> float:
    total, _, _ = reward_components(profile, selected, lam, lambda_on)
    return total


def _check_features_selection(features, selected):
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ShapeError(f"features must be [N >= 1, d], got {x.shape}")
    s = _check_selected(selected, x.shape[0])
    if s.size == 0:
        raise DegenerateInputError("baseline rewards need a non-empty "
                                   "selection")
    return x, s


def drdsn_div(features: np.ndarray, selected, block: int = 256) -> float:
    """Mean pairwise cosine dissimilarity over ordered pairs of selected
    frames, at its native O(k^2 * d) cost; 0 when fewer than 2 selected.

    Blocked mat-muls keep memory at O(block * k) without changing the
    operation count.
    """
    x, s = _check_features_selection(features, selected)
    k = s.size
    if k < 2:
        return 0.0
    xs = x[s]
    norms = np.linalg.norm(xs, axis=1)
    xn = xs / np.maximum(norms, 1e-12)[:, None]
    sim_sum = 0.0
    for i in range(0, k, block):
        sim_sum += float((xn[i:i + block] @ xn.T).sum())
    diag = float(np.sum(np.einsum("ij,ij->i", xn, xn)))
    pairs = k * (k - 1)
    return 1.0 - (sim_sum - diag) / pairs


def drdsn_rep(features: np.ndarray, selected, block: int = 256) -> float:
    """exp(-mean_t min_{t' in S} ||x_t - x_{t'}||_2), at O(N * k * d)."""
    x, s = _check_features_selection(features, selected)
    xs = x[s]
    k = s.size
    sq = np.einsum("ij,ij->i", x, x)
    sqs = sq[s]
    best = np.full(x.shape[0], np.inf)
    for i in range(0, k, block):
        cross = x @ xs[i:i + block].T
        cand = sq[:, None] - 2.0 * cross + sqs[i:i + block][None, :]
        np.minimum(best, cand.min(axis=1), out=best)
    dist = np.sqrt(np.maximum(best, 0.0))
    return float(np.exp(-dist.mean()))


def drdsn_rewards(features: np.ndarray, selected,
                  block: int = 256) -> tuple[float, float]:
    """(diversity, representativeness) of the feature-space baseline."""
    return (drdsn_div(features, selected, block=block),
            drdsn_rep(features, selected, block=block))


def percentage_loss(p: np.ndarray, epsilon: float) -> float:
    """(mean(p) - epsilon)^2, the keep-rate regulariser."""
    loss, _ = percentage_loss_grad(p, epsilon)
    return loss


def percentage_loss_grad(p: np.ndarray, epsilon: float):
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.shape[0] < 1:
        raise ShapeError(f"need a non-empty score vector, got {p.shape}")
    diff = float(p.mean()) - epsilon
    grad = np.full(p.shape[0], 2.0 * diff / p.shape[0])
    return diff * diff, grad


def surrogate_loss_grad(params: ScorerParams, x: np.ndarray,
                        actions: np.ndarray, rewards: np.ndarray,
                        baseline: float, beta: float, epsilon: float):
    """Loss and parameter gradients with actions and rewards held fixed.

    loss = -(1/T) sum_n (R_n - b) sum_t log pi(a_nt | p_t)
           + beta * (mean(p) - epsilon)^2

    This is the deterministic core of an update step: given the sampled
    actions and their rewards, it is an ordinary differentiable function
    of the weights, which is what the finite-difference check exercises.
    Probabilities enter the logs clamped to [1e-7, 1 - 1e-7].
    """
    actions = np.asarray(actions)
    rewards = np.asarray(rewards, dtype=np.float64)
    if actions.ndim != 2 or rewards.shape != (actions.shape[0],):
        raise ShapeError(f"actions [T, N] and rewards [T] expected, got "
                         f"{actions.shape} and {rewards.shape}")
    p, cache = forward_scores(params, x, want_cache=True)
    if actions.shape[1] != p.shape[0]:
        raise ShapeError(f"actions cover {actions.shape[1]} frames, "
                         f"scores cover {p.shape[0]}")
    t_eps = actions.shape[0]
    pc = np.clip(p, PROB_CLAMP, 1.0 - PROB_CLAMP)
    af = actions.astype(np.float64)
    adv = rewards - baseline
    logpi = af * np.log(pc) + (1.0 - af) * np.log1p(-pc)
    loss = -float(adv @ logpi.sum(axis=1)) / t_eps
    dlogpi = af / pc - (1.0 - af) / (1.0 - pc)
    g_p = -(adv @ dlogpi) / t_eps
    l_pct, g_pct = percentage_loss_grad(p, epsilon)
    loss += beta * l_pct
    g_p = g_p + beta * g_pct
    grads = backward(params, cache, g_p)
    return loss, grads


def reinforce_gradient(params: ScorerParams, x: np.ndarray, cfg: RLConfig,
                       rng: np.random.Generator,
                       profile: EntropyProfile | None = None,
                       baseline: float = 0.0):
    """Gradients of one update step: (grads, EpisodeBatch).

    Samples T action vectors from the current scores, rewards each
    selection, and differentiates the surrogate loss with rewards and
    baseline treated as constants.
    """
    if profile is None:
        profile = entropy_profile(x)
    p = forward_scores(params, x)
    n = p.shape[0]
    t_eps = cfg.episodes
    actions = np.empty((t_eps, n), dtype=np.int8)
    rewards = np.empty(t_eps)
    r_pts = np.empty(t_eps)
    r_reps = np.empty(t_eps)
    for e in range(t_eps):
        a = sample_actions(p, rng)
        actions[e] = a
        sel = np.flatnonzero(a)
        total, r_pt, r_rep = reward_components(profile, sel, cfg.lam,
                                               cfg.lambda_on)
        rewards[e] = total
        r_pts[e] = r_pt
        r_reps[e] = r_rep
    if not np.all(np.isfinite(rewards)):
        raise NumericError("non-finite episode reward")
    _, grads = surrogate_loss_grad(params, x, actions, rewards, baseline,
                                   cfg.beta, cfg.epsilon)
    batch = EpisodeBatch(actions=actions, rewards=rewards,
                         baseline=baseline, rewards_ptrim=r_pts,
                         rewards_rep=r_reps)
    return grads, batch


def finetune(params: ScorerParams, videos, cfg: RLConfig):
    """Policy-gradient training in place; returns (params, RewardTrace).

    One update per video per epoch, videos in the given order. Each video
    keeps its own moving-average baseline across epochs,
    b <- 0.9 b + 0.1 mean(episode rewards), applied after the update that
    used the old value. Entropy profiles depend only on the raw features,
    so they are computed once up front.
    """
    if len(videos) == 0:
        raise ShapeError("finetune needs at least one video")
    rng = np.random.default_rng(cfg.seed)
    adam = init_adam(params, lr=cfg.lr, weight_decay=cfg.weight_decay)
    profiles = [entropy_profile(x) for x in videos]
    baselines = np.zeros(len(videos))
    trace = RewardTrace(mean_total=np.empty(cfg.epochs),
                        mean_ptrim=np.empty(cfg.epochs),
                        mean_rep=np.empty(cfg.epochs))
    mom = cfg.baseline_momentum
    for epoch in range(cfg.epochs):
        tot = np.empty(len(videos))
        pts = np.empty(len(videos))
        reps = np.empty(len(videos))
        for i, x in enumerate(videos):
            grads, batch = reinforce_gradient(
                params, x, cfg, rng, profile=profiles[i],
                baseline=float(baselines[i]))
            adam_step(params, grads, adam)
            mean_r = float(batch.rewards.mean())
            if not np.isfinite(mean_r):
                raise NumericError(f"epoch {epoch}, video {i}: "
                                   f"non-finite mean reward")
            baselines[i] = mom * baselines[i] + (1.0 - mom) * mean_r
            tot[i] = mean_r
            pts[i] = batch.rewards_ptrim.mean()
            reps[i] = batch.rewards_rep.mean()
        trace.mean_total[epoch] = tot.mean()
        trace.mean_ptrim[epoch] = pts.mean()
        trace.mean_rep[epoch] = reps.mean()
    return params, trace
