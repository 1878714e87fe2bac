"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from .errors import SentopicError
from .pipeline.config import PipelineConfig, load_config
from .pipeline.runner import Pipeline, configure_logging

logger = logging.getLogger("sentopic")

SUBCOMMANDS = {
    "ingest": ("ingest", "clean, filter and index the input posts"),
    "sentiment": ("sentiment", "classify every document (scores engines first when gold labels are given)"),
    "agree": ("agree", "score the built-in engines against dual-coder gold labels"),
    "sweep": ("sweep", "choose the topic count by C_V coherence"),
    "fit": ("fit", "fit the topic model at the configured or selected topic count"),
    "label-template": ("label", "write an editable topic label sheet"),
    "compare": ("compare", "per-topic tests between negative and non-negative documents"),
    "report": ("report", "monthly rates, topic weights, top topics and charts"),
    "run": (None, "run every stage in order"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--seed", type=int)
    common.add_argument("--out-dir")
    common.add_argument("--threads", type=int)
    common.add_argument("--round-alpha", action="store_true", default=None,
                        help="round the significance level to 3 decimals")
    common.add_argument("--input")
    common.add_argument("--engine", choices=["compound", "difference", "auto"])
    common.add_argument("--gold")
    common.add_argument("--topic-labels")
    common.add_argument("--topics", type=int)
    common.add_argument("--iterations", type=int)
    common.add_argument("--sweep", action="store_true", default=None)
    common.add_argument("--sweep-range", nargs=2, type=int, metavar=("MIN", "MAX"))
    common.add_argument("--repeats", type=int, help="draws per stratum size for effect sizes")
    common.add_argument("--pooled", action="store_true", default=None, help="pooled-variance t-test")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="sentopic",
                                     description="Sentiment labels, LDA topics and per-topic group tests for short posts.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in SUBCOMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def config_from_args(args) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    overrides = {
        "seed": args.seed, "out_dir": args.out_dir, "threads": args.threads, "round_alpha": args.round_alpha,
        "input": args.input, "engine": args.engine, "gold": args.gold, "topic_labels": args.topic_labels,
        "topics": args.topics, "iterations": args.iterations, "sweep": args.sweep, "repeats": args.repeats,
        "equal_var": args.pooled,
    }
    if args.sweep_range:
        overrides["sweep_min"], overrides["sweep_max"] = args.sweep_range
        overrides["sweep"] = True
    return dataclasses.replace(cfg, **{k: v for k, v in overrides.items() if v is not None})


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        cfg = config_from_args(args)
        stage = SUBCOMMANDS[args.command][0]
        cfg.validate(need_input=stage in (None, "ingest"))
        pipeline = Pipeline(cfg)
        if stage is None:
            manifest = pipeline.run()
            logger.info("run complete: %d outputs in %s", len(manifest["outputs"]), cfg.out_dir)
        else:
            if "config" not in pipeline.manifest.data:
                pipeline.manifest.start(cfg)
            for path in pipeline.run_stage(stage):
                logger.info("wrote %s", path)
    except SentopicError as exc:
        logger.error("%s", exc)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
