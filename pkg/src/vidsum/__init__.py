"""Video summarization over precomputed frame features.

Two training stages (masked-view pretraining, then policy-gradient
fine-tuning with entropy-based rewards), kernel change-point segmentation
with knapsack selection, and rank-correlation evaluation. Pure numpy;
everything is deterministic under a fixed seed.
"""

__version__ = "0.1.0"

from .dataio import (RunConfig, VideoRecord, parse_config, read_vsf,
                     synth_dataset, write_vsf)
from .errors import (ConfigError, DataError, DegenerateInputError,
                     DomainError, NumericError, ParseError, ShapeError,
                     StateError, UsageError, VidsumError)
from .evaluation import (EvalReport, complexity_bench, cross_validate,
                         evaluate, kendall_tau, spearman_rho)
from .infotheory import EntropyProfile, distribution, entropy, \
    entropy_profile
from .numerics import AdamState, ScorerParams, adam_step, backward, \
    finite_diff_check, init_params, load_params, save_params
from .pretrain import PretrainConfig, mask_augment, pretrain
from .reinforce import (EpisodeBatch, RLConfig, drdsn_rewards, finetune,
                        reward_ptrim, reward_rep, sample_actions,
                        total_reward)
from .scorer import build_scorer, score
from .segmentation import (SummarySelection, generate_summary,
                           knapsack_select, kts_segment)

__all__ = [name for name in dir() if not name.startswith("_")]
