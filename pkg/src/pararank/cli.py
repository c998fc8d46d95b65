"""Command-line entry point.

Exit codes: 0 success, 1 usage/config error, 2 data integrity or parse
error, 3 runtime failure. Structured one-line messages go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, corpus, evaluation, features, lexical, pipeline
from .errors import ConfigError, DataError
from .ltr import load_model, predict, save_model, train_gbdt
from .util import default_workers


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors are exit code 1, not argparse's 2
        raise ConfigError(message)


def _add_common(p: argparse.ArgumentParser, output: bool = True) -> None:
    p.add_argument("-c", "--config", help="YAML config file")
    p.add_argument("--seed", type=int, help="overrides config seed")
    p.add_argument("--workers", type=int,
                   help="parallel workers (default: $PARARANK_WORKERS or 1)")
    if output:
        p.add_argument("-o", "--output", help="output directory")


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="dataset JSONL file")
    p.add_argument("--coliee-dir", help="COLIEE-style directory root")
    p.add_argument("--labels", help="JSON label file for --coliee-dir")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pararank",
                     description="Paragraph ranking for legal case entailment.")
    parser.add_argument("--version", action="version",
                        version=f"pararank {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="normalize a dataset to canonical JSONL")
    _add_common(p)
    _add_input(p)

    p = sub.add_parser("stats", help="dataset statistics")
    _add_common(p, output=False)
    _add_input(p)
    p.add_argument("--json", action="store_true", help="emit JSON, not a table")

    p = sub.add_parser("split", help="seeded train/validation split")
    _add_common(p)
    _add_input(p)
    p.add_argument("--n-valid", type=int, help="validation query count")

    p = sub.add_parser("rank-lexical", help="score candidates with bm25 or qld")
    _add_common(p)
    _add_input(p)
    p.add_argument("--scorer", choices=lexical.SCORER_NAMES, default="bm25")
    p.add_argument("--global-scope", action="store_true", default=None,
                   help="index all paragraphs together instead of per case")

    p = sub.add_parser("features", help="assemble the feature matrix")
    _add_common(p)
    _add_input(p)
    p.add_argument("--score-file", action="append", default=[],
                   metavar="NAME=PATH", help="external score file (repeatable)")
    p.add_argument("--missing-policy", choices=features.MISSING_POLICIES)
    p.add_argument("--no-labels", action="store_true",
                   help="emit '-' labels (unlabeled test matrix)")

    p = sub.add_parser("train", help="train the learning-to-rank model")
    _add_common(p)
    p.add_argument("--train-matrix", required=True)
    p.add_argument("--valid-matrix", required=True)

    p = sub.add_parser("predict", help="rank a matrix with a trained model")
    _add_common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--matrix", required=True)

    p = sub.add_parser("select", help="pick answers from a ranked run")
    _add_common(p)
    p.add_argument("--run", required=True, help="ranked run file")
    p.add_argument("--k", type=int, help="top-k selection")
    p.add_argument("--alpha", type=float,
                   help="relative score threshold selection")

    p = sub.add_parser("evaluate", help="micro-averaged P/R/F1 of a selection")
    _add_common(p)
    _add_input(p)
    p.add_argument("--selection", help="selection file (qid, pid)")
    p.add_argument("--run", help="ranked run file (top-k selection applied)")
    p.add_argument("--k", type=int, help="cutoff when --run is given")
    p.add_argument("--json", action="store_true", help="emit JSON, not a table")

    p = sub.add_parser("pipeline", help="run every stage from one config")
    _add_common(p)
    _add_input(p)
    p.add_argument("--test-dataset", help="JSONL test dataset")

    return parser


def _overrides(args) -> dict:
    out = {}
    if getattr(args, "input", None):
        out["dataset"] = args.input
    if getattr(args, "coliee_dir", None):
        out["coliee_dir"] = args.coliee_dir
    if getattr(args, "labels", None):
        out["labels"] = args.labels
    if getattr(args, "seed", None) is not None:
        out["seed"] = args.seed
    if getattr(args, "test_dataset", None):
        out["test_dataset"] = args.test_dataset
    if getattr(args, "global_scope", None) is not None:
        out["lexical.global_scope"] = args.global_scope
    if getattr(args, "missing_policy", None):
        out["features.missing_policy"] = args.missing_policy
    if getattr(args, "n_valid", None) is not None:
        out["split.n_valid"] = args.n_valid
    if getattr(args, "k", None) is not None:
        out["select.policy"] = "top_k"
        out["select.k"] = args.k
    if getattr(args, "alpha", None) is not None:
        out["select.policy"] = "threshold"
        out["select.alpha"] = args.alpha
    return out


def _outdir(args, cfg, overrides) -> Path:
    out = args.output or pipeline.cfg_get(cfg, "output_dir",
                                          overrides.get("output_dir"))
    if not out:
        raise ConfigError("an output directory is required (-o/--output)")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _workers(args) -> int:
    return args.workers if getattr(args, "workers", None) else default_workers()


def cmd_ingest(args) -> int:
    cfg = pipeline.load_config(args.config)
    ov = _overrides(args)
    outdir = _outdir(args, cfg, ov)
    dataset = pipeline.ingest_any(cfg, ov, _workers(args))
    out = outdir / "dataset.jsonl"
    corpus.write_jsonl(dataset, out)
    pipeline.write_manifest(outdir, "ingest",
                            pipeline.effective_config(cfg, ov), [out])
    print(f"wrote {out} ({len(dataset)} queries)")
    return 0


def cmd_stats(args) -> int:
    cfg = pipeline.load_config(args.config)
    ov = _overrides(args)
    stats = corpus.dataset_stats(pipeline.ingest_any(cfg, ov, _workers(args)))
    if args.json:
        print(json.dumps(stats.as_dict(), indent=2, sort_keys=True))
    else:
        for key, value in stats.as_dict().items():
            if isinstance(value, float):
                print(f"{key:>26}  {value:.4f}")
            else:
                print(f"{key:>26}  {value}")
    return 0


def cmd_split(args) -> int:
    cfg = pipeline.load_config(args.config)
    ov = _overrides(args)
    outdir = _outdir(args, cfg, ov)
    n_valid = pipeline.cfg_get(cfg, "split.n_valid", ov.get("split.n_valid"))
    if n_valid is None:
        raise ConfigError("--n-valid (or split.n_valid) is required")
    seed = int(pipeline.cfg_get(cfg, "seed", ov.get("seed")))
    dataset = pipeline.ingest_any(cfg, ov, _workers(args))
    train_ds, valid_ds = corpus.split_validation(dataset, int(n_valid), seed)
    paths = [outdir / "train.jsonl", outdir / "valid.jsonl"]
    corpus.write_jsonl(train_ds, paths[0])
    corpus.write_jsonl(valid_ds, paths[1])
    pipeline.write_manifest(outdir, "split",
                            pipeline.effective_config(cfg, ov), paths)
    print(f"wrote {paths[0]} ({len(train_ds)}) and {paths[1]} ({len(valid_ds)})")
    return 0


def cmd_rank_lexical(args) -> int:
    cfg = pipeline.load_config(args.config)
    ov = _overrides(args)
    outdir = _outdir(args, cfg, ov)
    dataset = pipeline.ingest_any(cfg, ov, _workers(args))
    scores = pipeline.lexical_scores(dataset, cfg, ov, _workers(args))[args.scorer]
    dump = outdir / f"scores_{args.scorer}.tsv"
    run_path = outdir / f"run_{args.scorer}.tsv"
    lexical.write_score_dump(scores, args.scorer, dump)
    evaluation.write_run_file(lexical.run_from_scores(scores), run_path)
    pipeline.write_manifest(outdir, "rank-lexical",
                            pipeline.effective_config(cfg, ov), [dump, run_path])
    print(f"wrote {run_path}")
    return 0


def cmd_features(args) -> int:
    cfg = pipeline.load_config(args.config)
    ov = _overrides(args)
    score_files_cfg = dict(pipeline.cfg_get(cfg, "features.score_files") or {})
    for spec_arg in args.score_file:
        name, sep, path = spec_arg.partition("=")
        if not sep:
            raise ConfigError(f"--score-file needs NAME=PATH, got {spec_arg!r}")
        score_files_cfg[name] = path
    ov["features.score_files"] = score_files_cfg
    outdir = _outdir(args, cfg, ov)
    dataset = pipeline.ingest_any(cfg, ov, _workers(args))
    lex = pipeline.lexical_scores(dataset, cfg, ov, _workers(args))
    score_files = pipeline.load_score_files(cfg, ov)
    matrix = pipeline.assemble_for(dataset, lex, score_files, cfg, ov,
                                   with_labels=not args.no_labels)
    out = outdir / "features.tsv"
    features.write_matrix(matrix, out)
    pipeline.write_manifest(outdir, "features",
                            pipeline.effective_config(cfg, ov), [out])
    print(f"wrote {out} ({len(matrix)} rows)")
    return 0


def cmd_train(args) -> int:
    cfg = pipeline.load_config(args.config)
    ov = _overrides(args)
    outdir = _outdir(args, cfg, ov)
    train_mx = features.read_matrix(
        pipeline.require_file(args.train_matrix, "training matrix"))
    valid_mx = features.read_matrix(
        pipeline.require_file(args.valid_matrix, "validation matrix"))
    model, history = train_gbdt(train_mx, valid_mx,
                                pipeline.train_config_from(cfg, ov))
    model_path = outdir / "model.json"
    history_path = outdir / "history.json"
    save_model(model, model_path)
    history_path.write_text(json.dumps({
        "best_iteration": history.best_iteration,
        "rounds": [{"train_objective": o, "validation_ndcg_at_1": v}
                   for o, v in history.rounds],
    }, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    pipeline.write_manifest(outdir, "train",
                            pipeline.effective_config(cfg, ov),
                            [model_path, history_path])
    print(f"wrote {model_path} (best iteration {model.best_iteration} "
          f"of {len(history.rounds)} rounds)")
    return 0


def cmd_predict(args) -> int:
    cfg = pipeline.load_config(args.config)
    ov = _overrides(args)
    outdir = _outdir(args, cfg, ov)
    model = load_model(pipeline.require_file(args.model, "model file"))
    matrix = features.read_matrix(pipeline.require_file(args.matrix, "matrix"))
    run = predict(model, matrix)
    out = outdir / "run.tsv"
    evaluation.write_run_file(run, out)
    pipeline.write_manifest(outdir, "predict",
                            pipeline.effective_config(cfg, ov), [out])
    print(f"wrote {out} ({len(run)} queries)")
    return 0


def cmd_select(args) -> int:
    cfg = pipeline.load_config(args.config)
    ov = _overrides(args)
    outdir = _outdir(args, cfg, ov)
    run = evaluation.read_run_file(pipeline.require_file(args.run, "run file"))
    selection = pipeline.select_from(run, cfg, ov)
    out = outdir / "selection.tsv"
    evaluation.write_selection_file(selection, out)
    pipeline.write_manifest(outdir, "select",
                            pipeline.effective_config(cfg, ov), [out])
    print(f"wrote {out}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = pipeline.load_config(args.config)
    ov = _overrides(args)
    if bool(args.selection) == bool(args.run):
        raise ConfigError("give exactly one of --selection or --run")
    dataset = pipeline.ingest_any(cfg, ov, _workers(args))
    if args.selection:
        selection = evaluation.read_selection_file(
            pipeline.require_file(args.selection, "selection file"))
    else:
        selection = evaluation.select_top_k(
            evaluation.read_run_file(pipeline.require_file(args.run, "run file")),
            args.k or 1)
    report = evaluation.evaluate(selection, pipeline.gold_of(dataset))
    if args.output:
        outdir = _outdir(args, cfg, ov)
        out = outdir / "report.json"
        out.write_text(json.dumps(report.as_dict(), indent=2, sort_keys=True)
                       + "\n", encoding="utf-8")
        pipeline.write_manifest(outdir, "evaluate",
                                pipeline.effective_config(cfg, ov), [out])
    if args.json:
        print(json.dumps(report.as_dict(), indent=2, sort_keys=True))
    else:
        print(report.format_table())
    return 0


def cmd_pipeline(args) -> int:
    cfg = pipeline.load_config(args.config)
    ov = _overrides(args)
    outdir = _outdir(args, cfg, ov)
    report = pipeline.run_pipeline(cfg, outdir, ov, _workers(args))
    print(report.format_table())
    print(f"artifacts in {outdir}")
    return 0


_HANDLERS = {
    "ingest": cmd_ingest,
    "stats": cmd_stats,
    "split": cmd_split,
    "rank-lexical": cmd_rank_lexical,
    "features": cmd_features,
    "train": cmd_train,
    "predict": cmd_predict,
    "select": cmd_select,
    "evaluate": cmd_evaluate,
    "pipeline": cmd_pipeline,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _HANDLERS[args.command](args)
    except ConfigError as exc:
        print(f"pararank: error[config]: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"pararank: error[data]: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, KeyError) as exc:
        print(f"pararank: error[runtime]: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
