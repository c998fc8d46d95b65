"""Command-line entry points: build-samples, train, score, emit."""

from __future__ import annotations

import argparse
import sys

from .cross_encoder import train_cross_encoder
from .data import (NeuralConfig, build_training_samples, read_dataset,
                   read_samples, write_samples)
from .scores import emit_score_file, load_scorer, save_scorer
from .seq2seq import train_seq2seq


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--backbone", default="tiny-encoder")
    p.add_argument("--max-sequence-length", type=int, default=512)
    p.add_argument("--query-budget", type=int, default=128)
    p.add_argument("--negatives", type=int, default=7)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)


def _config_from(args) -> NeuralConfig:
    return NeuralConfig(
        backbone=args.backbone,
        max_sequence_length=args.max_sequence_length,
        query_budget=args.query_budget,
        negatives=args.negatives,
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        batch_size=args.batch_size,
        seed=args.seed,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entailnet",
        description="Neural rerankers emitting score files for the ranking "
                    "pipeline.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-samples",
                       help="contrastive training samples from a dataset")
    p.add_argument("--dataset", required=True, help="dataset JSONL")
    p.add_argument("--out", required=True, help="samples JSONL to write")
    _add_config_flags(p)

    p = sub.add_parser("train", help="fine-tune a reranker")
    p.add_argument("--dataset", help="dataset JSONL (samples built on the fly)")
    p.add_argument("--samples", help="prebuilt samples JSONL")
    p.add_argument("--scorer-type", choices=("cross-encoder", "seq2seq"),
                   default="cross-encoder")
    p.add_argument("--out", required=True, help="checkpoint path to write")
    _add_config_flags(p)

    p = sub.add_parser("score", help="score one (query, candidate) pair")
    p.add_argument("--model", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--candidate", required=True)

    p = sub.add_parser("emit", help="score every pair of a dataset to a TSV")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)

    return parser


def cmd_build_samples(args) -> int:
    cfg = _config_from(args)
    cases = read_dataset(args.dataset)
    samples = build_training_samples(cases, cfg)
    write_samples(samples, args.out)
    print(f"wrote {args.out} ({len(samples)} samples)")
    return 0


def cmd_train(args) -> int:
    cfg = _config_from(args)
    if bool(args.dataset) == bool(args.samples):
        print("entailnet: give exactly one of --dataset or --samples",
              file=sys.stderr)
        return 1
    if args.samples:
        samples = read_samples(args.samples)
    else:
        samples = build_training_samples(read_dataset(args.dataset), cfg)
    trainer = (train_cross_encoder if args.scorer_type == "cross-encoder"
               else train_seq2seq)
    scorer = trainer(samples, cfg)
    save_scorer(scorer, args.out)
    print(f"wrote {args.out} ({args.scorer_type}, {len(samples)} samples)")
    return 0


def cmd_score(args) -> int:
    scorer = load_scorer(args.model)
    print(scorer.score(args.query, args.candidate))
    return 0


def cmd_emit(args) -> int:
    scorer = load_scorer(args.model)
    cases = read_dataset(args.dataset)
    count = emit_score_file(cases, scorer, "cli", args.out)
    print(f"wrote {args.out} ({count} pairs)")
    return 0


_HANDLERS = {
    "build-samples": cmd_build_samples,
    "train": cmd_train,
    "score": cmd_score,
    "emit": cmd_emit,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"entailnet: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
