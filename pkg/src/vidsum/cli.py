"""Command-line front end.

Subcommands cover the whole pipeline: synth, entropy-profile, pretrain,
finetune, summarize, evaluate, cv, bench, plot. Exit codes: 0 success,
1 usage or config problem, 2 data or numeric problem. Training and data
subcommands are bit-reproducible for a fixed seed; bench measures wall
time, so only its (n, k) grid is reproducible, not its seconds.

Flags named after config keys (e.g. --rl.lambda) mirror the config file;
a flag wins over the file, and --seed overrides the master seed.
"""

import argparse
import sys

import numpy as np

from . import __version__
from .dataio import (CONFIG_SCHEMA, RunConfig, apply_overrides,
                     boundaries_to_pick_units, parse_config, read_vsf,
                     synth_dataset, write_vsf, VSF_FORMAT_VERSION)
from .errors import (ConfigError, DataError, DegenerateInputError,
                     DomainError, NumericError, ParseError, ShapeError,
                     StateError, UsageError, VidsumError)
from .evaluation import (BENCH_TARGETS, complexity_bench, cross_validate,
                         evaluate)
from .infotheory import entropy_profile
from .numerics import (MODEL_FORMAT_VERSION, init_params, load_params,
                       save_params)
from .plotsvg import PlotSpec, plot_csv
from .pretrain import pretrain
from .reinforce import finetune
from .segmentation import generate_summary

_USAGE_ERRORS = (UsageError, ConfigError)
_DATA_ERRORS = (DataError, ParseError, NumericError, ShapeError,
                DomainError, DegenerateInputError, StateError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage().rstrip()}")


def _r(v) -> str:
    """Shortest round-trip decimal form; stable across runs."""
    return repr(float(v))


def _write_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    lines += [",".join(str(c) for c in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if path == "-" or path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)


def _flag_dest(key: str) -> str:
    return "cfg_" + key.replace(".", "_")


def _add_config_flags(p, keys) -> None:
    p.add_argument("--config", metavar="FILE",
                   help="key = value config file")
    p.add_argument("--seed", type=int, metavar="N",
                   help="master seed override")
    for key in keys:
        if key == "seed":
            continue
        p.add_argument("--" + key, dest=_flag_dest(key), metavar="V",
                       help=argparse.SUPPRESS)


def _build_cfg(args, keys) -> RunConfig:
    cfg = parse_config(args.config) if args.config else RunConfig()
    overrides = {}
    for key in keys:
        val = getattr(args, _flag_dest(key), None)
        if val is not None:
            overrides[key] = val
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = str(args.seed)
    return apply_overrides(cfg, overrides)


_TRAIN_KEYS = tuple(CONFIG_SCHEMA)


def _load_records(path):
    records = read_vsf(path)
    if not records:
        raise DataError(f"{path}: dataset contains no videos")
    return records


def _init_seed(master: int) -> int:
    return int(np.random.SeedSequence([master, 0]).generate_state(1)[0])


def _cmd_synth(args) -> int:
    records = synth_dataset(
        n_videos=args.videos, n_frames=args.frames, dim=args.dim,
        seed=args.seed, scene_count=(args.scenes_lo, args.scenes_hi),
        annotators=args.annotators, pick_stride=args.stride,
        noise=args.noise)
    write_vsf(records, args.out)
    print(f"wrote {len(records)} videos "
          f"({args.frames} frames, dim {args.dim}) to {args.out}")
    return 0


def _cmd_entropy_profile(args) -> int:
    records = _load_records(args.data)
    if args.video is None:
        rec = records[0]
    else:
        match = [r for r in records if r.video_id == args.video]
        if not match:
            raise DataError(f"video {args.video!r} not in {args.data}")
        rec = match[0]
    prof = entropy_profile(rec.features)
    rows = [(t, _r(prof.entropies[t]), _r(prof.deltas[t]))
            for t in range(len(prof))]
    _write_csv(args.out, ("t", "entropy", "delta"), rows)
    return 0


def _cmd_pretrain(args) -> int:
    cfg = _build_cfg(args, _TRAIN_KEYS)
    records = _load_records(args.data)
    feats = [r.features for r in records]
    pre_cfg, _ = cfg.stage_configs()
    params = init_params(dim=records[0].dim, seed=_init_seed(cfg.seed))
    params, trace = pretrain(params, feats, pre_cfg)
    save_params(params, args.out)
    if args.trace:
        _write_csv(args.trace, ("epoch", "loss"),
                   [(e, _r(v)) for e, v in enumerate(trace)])
    print(f"pretrained on {len(feats)} videos for {pre_cfg.epochs} epochs: "
          f"loss {_r(trace[0])} -> {_r(trace[-1])}; model -> {args.out}")
    return 0


def _cmd_finetune(args) -> int:
    cfg = _build_cfg(args, _TRAIN_KEYS)
    records = _load_records(args.data)
    feats = [r.features for r in records]
    _, rl_cfg = cfg.stage_configs()
    params = load_params(args.model)
    params, trace = finetune(params, feats, rl_cfg)
    save_params(params, args.out)
    if args.trace:
        rows = [(e, _r(trace.mean_total[e]), _r(trace.mean_ptrim[e]),
                 _r(trace.mean_rep[e])) for e in range(rl_cfg.epochs)]
        _write_csv(args.trace,
                   ("epoch", "mean_R", "mean_R_ptrim", "mean_R_rep"), rows)
    print(f"finetuned on {len(feats)} videos for {rl_cfg.epochs} epochs: "
          f"mean reward {_r(trace.mean_total[0])} -> "
          f"{_r(trace.mean_total[-1])}; model -> {args.out}")
    return 0


def _cmd_summarize(args) -> int:
    cfg = _build_cfg(args, ("kts.penalty", "kts.max_segments"))
    records = _load_records(args.data)
    if args.video is not None:
        records = [r for r in records if r.video_id == args.video]
        if not records:
            raise DataError(f"video {args.video!r} not in {args.data}")
    params = load_params(args.model)
    max_seg = cfg.kts_max_segments if cfg.kts_max_segments > 0 else None
    seg_rows = []
    mask_rows = []
    for rec in records:
        boundaries = None
        if args.use_change_points:
            if rec.change_points is None:
                raise DataError(f"{rec.video_id}: no stored change points")
            boundaries = boundaries_to_pick_units(rec.picks,
                                                  rec.change_points)
        summary = generate_summary(
            params, rec.features, n_original=rec.n_original,
            picks=rec.picks, boundaries=boundaries,
            max_segments=max_seg, penalty=cfg.kts_penalty)
        starts = np.concatenate(([0], summary.boundaries))
        ends = np.concatenate((summary.boundaries,
                               [rec.features.shape[0]]))
        for i in range(len(starts)):
            seg_rows.append((rec.video_id, i, starts[i], ends[i],
                             summary.segment_lengths[i],
                             _r(summary.segment_scores[i]),
                             int(summary.chosen[i])))
        if args.mask_out:
            for f, m in enumerate(summary.frame_mask):
                mask_rows.append((rec.video_id, f, int(m)))
    _write_csv(args.out,
               ("video_id", "segment", "start_pick", "end_pick",
                "original_frames", "score", "chosen"), seg_rows)
    if args.mask_out:
        _write_csv(args.mask_out, ("video_id", "frame", "selected"),
                   mask_rows)
    return 0


def _cmd_evaluate(args) -> int:
    records = _load_records(args.data)
    params = load_params(args.model)
    report = evaluate(params, records, mode=args.mode)
    if args.out:
        rows = [(r.video_id, _r(r.tau), _r(r.rho)) for r in report.rows]
        _write_csv(args.out, ("video_id", "tau", "rho"), rows)
    print(f"videos={len(report.rows)} mode={report.mode} "
          f"mean_tau={_r(report.mean_tau)} mean_rho={_r(report.mean_rho)}")
    return 0


def _cmd_cv(args) -> int:
    cfg = _build_cfg(args, _TRAIN_KEYS)
    records = _load_records(args.data)
    pre_cfg, rl_cfg = cfg.stage_configs()
    report = cross_validate(records, pre_cfg, rl_cfg, folds=cfg.folds,
                            runs=cfg.runs, mode=cfg.eval_mode,
                            seed=cfg.seed, jobs=args.jobs)
    if args.out:
        rows = [(r, f, _r(report.fold_tau[r, f]), _r(report.fold_rho[r, f]))
                for r in range(report.runs) for f in range(report.folds)]
        _write_csv(args.out, ("run", "fold", "tau", "rho"), rows)
    print(f"folds={report.folds} runs={report.runs} mode={report.mode} "
          f"mean_tau={_r(report.mean_tau)} mean_rho={_r(report.mean_rho)}")
    return 0


def _cmd_bench(args) -> int:
    targets = BENCH_TARGETS if args.target == "all" else (args.target,)
    rows = []
    for target in targets:
        rep = complexity_bench(target, reps=args.reps, seed=args.seed)
        for n, k, sec in rep.rows:
            rows.append((target, n, k, _r(sec)))
        print(f"{target}: seconds ~ {rep.slope:.3e} * {rep.predictor} "
              f"+ {rep.intercept:.3e} (R2 = {rep.r2:.4f})")
    if args.out:
        _write_csv(args.out, ("reward", "n", "k", "median_seconds"), rows)
    return 0


def _cmd_plot(args) -> int:
    series = [s for s in args.series.split(",") if s] if args.series else []
    spec = PlotSpec(csv_path=args.csv, out_path=args.out,
                    x_column=args.x, series=series, title=args.title)
    plot_csv(spec)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> _Parser:
    p = _Parser(prog="vidsum",
                description="video summarization over precomputed "
                            "frame features")
    p.add_argument("--version", action="version",
                   version=f"vidsum {__version__} "
                           f"(data-format {VSF_FORMAT_VERSION}, "
                           f"model-format {MODEL_FORMAT_VERSION})")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sp = sub.add_parser("synth", help="generate a synthetic dataset")
    sp.add_argument("--out", required=True, metavar="VSF")
    sp.add_argument("--videos", type=int, default=8)
    sp.add_argument("--frames", type=int, default=64)
    sp.add_argument("--dim", type=int, default=16)
    sp.add_argument("--annotators", type=int, default=3)
    sp.add_argument("--stride", type=int, default=15)
    sp.add_argument("--scenes-lo", type=int, default=3)
    sp.add_argument("--scenes-hi", type=int, default=6)
    sp.add_argument("--noise", type=float, default=0.02)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(fn=_cmd_synth)

    sp = sub.add_parser("entropy-profile",
                        help="per-frame entropy and relative change")
    sp.add_argument("--data", required=True, metavar="VSF")
    sp.add_argument("--video", metavar="ID",
                    help="video id (default: first)")
    sp.add_argument("--out", metavar="CSV", help="default: stdout")
    sp.set_defaults(fn=_cmd_entropy_profile)

    sp = sub.add_parser("pretrain", help="self-supervised pretraining")
    sp.add_argument("--data", required=True, metavar="VSF")
    sp.add_argument("--out", required=True, metavar="MODEL")
    sp.add_argument("--trace", metavar="CSV", help="loss per epoch")
    _add_config_flags(sp, _TRAIN_KEYS)
    sp.set_defaults(fn=_cmd_pretrain)

    sp = sub.add_parser("finetune", help="policy-gradient fine-tuning")
    sp.add_argument("--data", required=True, metavar="VSF")
    sp.add_argument("--model", required=True, metavar="MODEL")
    sp.add_argument("--out", required=True, metavar="MODEL")
    sp.add_argument("--trace", metavar="CSV", help="rewards per epoch")
    _add_config_flags(sp, _TRAIN_KEYS)
    sp.set_defaults(fn=_cmd_finetune)

    sp = sub.add_parser("summarize",
                        help="segment videos and pick a 15%% summary")
    sp.add_argument("--data", required=True, metavar="VSF")
    sp.add_argument("--model", required=True, metavar="MODEL")
    sp.add_argument("--video", metavar="ID", help="default: all videos")
    sp.add_argument("--out", metavar="CSV", help="default: stdout")
    sp.add_argument("--mask-out", metavar="CSV",
                    help="also write the original-frame mask")
    sp.add_argument("--use-change-points", action="store_true",
                    help="use stored change points instead of segmenting")
    _add_config_flags(sp, ("kts.penalty", "kts.max_segments"))
    sp.set_defaults(fn=_cmd_summarize)

    sp = sub.add_parser("evaluate", help="rank correlation per video")
    sp.add_argument("--data", required=True, metavar="VSF")
    sp.add_argument("--model", required=True, metavar="MODEL")
    sp.add_argument("--mode", default="per_annotator_mean",
                    choices=("per_annotator_mean", "vs_mean_gt"))
    sp.add_argument("--out", metavar="CSV", help="per-video results")
    sp.set_defaults(fn=_cmd_evaluate)

    sp = sub.add_parser("cv", help="repeated k-fold protocol")
    sp.add_argument("--data", required=True, metavar="VSF")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--out", metavar="CSV", help="per-fold results")
    _add_config_flags(sp, _TRAIN_KEYS)
    sp.set_defaults(fn=_cmd_cv)

    sp = sub.add_parser("bench", help="reward runtime scaling")
    sp.add_argument("--target", default="all",
                    choices=BENCH_TARGETS + ("all",))
    sp.add_argument("--reps", type=int, default=30)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", metavar="CSV")
    sp.set_defaults(fn=_cmd_bench)

    sp = sub.add_parser("plot", help="render a CSV as an SVG line chart")
    sp.add_argument("--csv", required=True, metavar="CSV")
    sp.add_argument("--out", required=True, metavar="SVG")
    sp.add_argument("--x", metavar="COLUMN", help="default: first column")
    sp.add_argument("--series", metavar="A,B,...",
                    help="default: every other column")
    sp.add_argument("--title")
    sp.set_defaults(fn=_cmd_plot)
    return p


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)
    except _USAGE_ERRORS as e:
        print(f"vidsum: error: {e}", file=sys.stderr)
        return 1
    except _DATA_ERRORS as e:
        print(f"vidsum: error: {e}", file=sys.stderr)
        return 2
    except VidsumError as e:
        print(f"vidsum: error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"vidsum: error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
