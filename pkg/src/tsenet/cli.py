"""Command-line entry point: ``tsenet <command> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .checkpoint import Checkpoint, CheckpointError
from .config import ConfigError, ExperimentConfig
from .datagen.idx import IdxFormatError
from .experiments import ExperimentMismatch, dump_weights, eval_clock, eval_mnist, gen_preview
from .trainer import DataError, NumericalAbort, train

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3


def _load_config(args) -> ExperimentConfig:
    config = ExperimentConfig.preset(args.preset)
    if args.config:
        with open(args.config) as f:
            config = ExperimentConfig.from_text(f.read(), base=config)
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes.update(init_seed=args.seed, data_seed=args.seed + 1, eval_seed=args.seed + 2)
    if getattr(args, "iterations", None) is not None:
        changes["iterations"] = args.iterations
    if getattr(args, "hours", None) is not None:
        changes["hours"] = args.hours
    if args.out:
        changes["out_dir"] = args.out
    return config.replace(**changes) if changes else config


def _cmd_train(args) -> int:
    resume = None
    if args.resume:
        resume = Checkpoint.load(args.resume)
        config = resume.config
        changes = {k: v for k, v in (("iterations", args.iterations), ("hours", args.hours)) if v is not None}
        if args.out:
            changes["out_dir"] = args.out
        config = config.replace(**changes)
        resume.config = config
    else:
        config = _load_config(args)
    final = train(config, out_dir=config.out_dir, resume=resume)
    print(f"trained to iteration {final.iteration}; outputs in {config.out_dir}")
    return EXIT_OK


def _cmd_eval(args, fn) -> int:
    ckpt = Checkpoint.load(args.checkpoint)
    out = args.out or ckpt.config.out_dir
    if args.config:
        with open(args.config) as f:
            ckpt.config = ExperimentConfig.from_text(f.read(), base=ckpt.config)
    report = fn(ckpt, out_dir=out)
    print(json.dumps({k: v for k, v in report.items() if k != "labeled_frames"}, indent=2))
    return EXIT_OK


def _cmd_dump_weights(args) -> int:
    ckpt = Checkpoint.load(args.checkpoint)
    paths = dump_weights(ckpt, layer=args.layer, count=args.count, seed=args.seed or 0,
                         out_dir=args.out or ckpt.config.out_dir)
    print("\n".join(paths))
    return EXIT_OK


def _cmd_gen_preview(args) -> int:
    config = _load_config(args)
    paths = gen_preview(config, out_dir=config.out_dir, count=args.count)
    print("\n".join(paths))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tsenet", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_config=True):
        if with_config:
            p.add_argument("--config", help="key = value config file")
            p.add_argument("--preset", default="clock", choices=["clock", "mnist", "mini-clock"])
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory")

    p = sub.add_parser("train", help="unsupervised TS-E training")
    common(p)
    p.add_argument("--resume", metavar="CHECKPOINT")
    p.add_argument("--iterations", type=int)
    p.add_argument("--hours", type=float)
    p.set_defaults(func=_cmd_train)

    for name, fn in (("eval-clock", eval_clock), ("eval-mnist", eval_mnist)):
        p = sub.add_parser(name, help=f"{name.split('-')[1]} evaluation of a checkpoint")
        p.add_argument("checkpoint")
        p.add_argument("--config", help="override checkpoint config keys (e.g. dataset path)")
        p.add_argument("--out")
        p.set_defaults(func=lambda a, fn=fn: _cmd_eval(a, fn))

    p = sub.add_parser("dump-weights", help="write unit fan-in weights as PGM images")
    p.add_argument("checkpoint")
    p.add_argument("--layer", type=int, default=1)
    p.add_argument("--count", type=int, default=6)
    common(p, with_config=False)
    p.set_defaults(func=_cmd_dump_weights)

    p = sub.add_parser("gen-preview", help="write sample movie frames as PGM images")
    common(p)
    p.add_argument("--count", type=int, default=8)
    p.set_defaults(func=_cmd_gen_preview)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, CheckpointError, ExperimentMismatch) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, IdxFormatError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
