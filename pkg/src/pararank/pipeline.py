"""End-to-end orchestration shared by the CLI subcommands.

A single YAML config drives every stage; individual flags override config
values, which override defaults. Every output directory gets a manifest
recording the effective config, its hash, artifact digests, and tool
versions, so reruns are auditable and byte-reproducible (manifest
timestamp aside).
"""

from __future__ import annotations

import datetime
import hashlib
import json
import platform
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
import yaml

from . import __version__, corpus, evaluation, features, lexical
from .errors import ConfigError, IntegrityError
from .ltr import (KERNEL_BACKEND, TrainConfig, predict, retrain_final,
                  save_model, train_gbdt)
from .util import sha256_text

DEFAULTS: dict[str, Any] = {
    "seed": 0,
    "workers": None,  # falls back to PARARANK_WORKERS, then 1
    "split.n_valid": None,
    "analyzer.lowercase": True,
    "analyzer.stemming": True,
    "analyzer.stopwords": [],
    "lexical.global_scope": False,
    "bm25.k1": 0.9,
    "bm25.b": 0.4,
    "qld.mu": 1000.0,
    "features.schema": list(features.DEFAULT_FEATURES),
    "features.score_files": {},
    "features.missing_policy": "error",
    "train.objective": "pointwise_logistic",
    "train.num_rounds": 500,
    "train.learning_rate": 0.1,
    "train.max_leaves": 31,
    "train.min_samples_leaf": 5,
    "train.early_stop_patience": 50,
    "retrain.enabled": False,
    "retrain.early_stop_patience": 10,
    "select.policy": "top_k",
    "select.k": 1,
    "select.alpha": 0.9,
}


def load_config(path: str | Path | None) -> dict:
    if path is None:
        return {}
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must be a mapping of sections")
    return doc


def cfg_get(cfg: Mapping, dotted: str, override: Any = None) -> Any:
    """Resolve one setting: flag override > config file > default."""
    if override is not None:
        return override
    node: Any = cfg
    for part in dotted.split("."):
        if not isinstance(node, Mapping) or part not in node:
            node = None
            break
        node = node[part]
    if node is not None:
        return node
    if dotted in DEFAULTS:
        return DEFAULTS[dotted]
    return None


def effective_config(cfg: Mapping, overrides: Mapping[str, Any]) -> dict:
    """Flattened dotted-key view of every known setting after precedence."""
    out = {}
    for key in DEFAULTS:
        out[key] = cfg_get(cfg, key, overrides.get(key))
    for key in ("dataset", "test_dataset", "coliee_dir", "labels", "output_dir"):
        val = cfg_get(cfg, key, overrides.get(key))
        if val is not None:
            out[key] = val
    return out


def analyzer_from(cfg: Mapping, overrides: Mapping[str, Any] = {}) -> lexical.AnalyzerConfig:
    stopwords = cfg_get(cfg, "analyzer.stopwords", overrides.get("analyzer.stopwords"))
    return lexical.AnalyzerConfig(
        lowercase=bool(cfg_get(cfg, "analyzer.lowercase",
                               overrides.get("analyzer.lowercase"))),
        stemming=bool(cfg_get(cfg, "analyzer.stemming",
                              overrides.get("analyzer.stemming"))),
        stopwords=frozenset(stopwords or ()),
    )


def train_config_from(cfg: Mapping, overrides: Mapping[str, Any] = {},
                      patience_key: str = "train.early_stop_patience") -> TrainConfig:
    return TrainConfig(
        objective=cfg_get(cfg, "train.objective", overrides.get("train.objective")),
        num_rounds=int(cfg_get(cfg, "train.num_rounds",
                               overrides.get("train.num_rounds"))),
        learning_rate=float(cfg_get(cfg, "train.learning_rate",
                                    overrides.get("train.learning_rate"))),
        max_leaves=int(cfg_get(cfg, "train.max_leaves",
                               overrides.get("train.max_leaves"))),
        min_samples_leaf=int(cfg_get(cfg, "train.min_samples_leaf",
                                     overrides.get("train.min_samples_leaf"))),
        early_stop_patience=int(cfg_get(cfg, patience_key,
                                        overrides.get(patience_key))),
        seed=int(cfg_get(cfg, "seed", overrides.get("seed"))),
    )


def _sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(outdir: Path, command: str, effective: Mapping[str, Any],
                   artifacts: Sequence[Path]) -> Path:
    doc = {
        "command": command,
        "config": dict(sorted(effective.items())),
        "config_sha256": sha256_text(
            json.dumps(effective, sort_keys=True, default=str)),
        "artifacts": {p.name: _sha256_file(p) for p in sorted(artifacts)},
        "versions": {
            "pararank": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "kernel_backend": KERNEL_BACKEND,
        },
        "created_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    path = outdir / "manifest.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return path


def require_file(path: str | Path, what: str) -> Path:
    """Referenced paths must exist at command start (config error if not)."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"{what} not found: {path}")
    return path


def ingest_any(cfg: Mapping, overrides: Mapping[str, Any] = {},
               workers: int | None = None, split_tag: str = "custom") -> corpus.Dataset:
    """Load the dataset named by config/flags: JSONL or COLIEE-style tree."""
    dataset_path = cfg_get(cfg, "dataset", overrides.get("dataset"))
    coliee_dir = cfg_get(cfg, "coliee_dir", overrides.get("coliee_dir"))
    labels = cfg_get(cfg, "labels", overrides.get("labels"))
    if dataset_path and coliee_dir:
        raise ConfigError("give either 'dataset' (JSONL) or 'coliee_dir', not both")
    if dataset_path:
        return corpus.ingest_jsonl(require_file(dataset_path, "dataset"),
                                   split_tag=split_tag, workers=workers)
    if coliee_dir:
        if not Path(coliee_dir).is_dir():
            raise ConfigError(f"coliee_dir not found: {coliee_dir}")
        if labels is not None:
            require_file(labels, "label file")
        return corpus.ingest_coliee_dir(coliee_dir, labels,
                                        split_tag=split_tag, workers=workers)
    raise ConfigError("no input dataset configured ('dataset' or 'coliee_dir')")


def gold_of(dataset: corpus.Dataset) -> dict[str, frozenset[str]]:
    return {q.query_id: q.gold for q in dataset}


def lexical_scores(dataset: corpus.Dataset, cfg: Mapping,
                   overrides: Mapping[str, Any] = {},
                   workers: int | None = None
                   ) -> dict[str, dict[tuple[str, str], float]]:
    analyzer = analyzer_from(cfg, overrides)
    global_scope = bool(cfg_get(cfg, "lexical.global_scope",
                                overrides.get("lexical.global_scope")))
    bm25 = lexical.Bm25Params(
        k1=float(cfg_get(cfg, "bm25.k1", overrides.get("bm25.k1"))),
        b=float(cfg_get(cfg, "bm25.b", overrides.get("bm25.b"))))
    qld = lexical.QldParams(
        mu=float(cfg_get(cfg, "qld.mu", overrides.get("qld.mu"))))
    return {
        "bm25": lexical.score_dataset(dataset, analyzer, "bm25", bm25,
                                      global_scope, workers),
        "qld": lexical.score_dataset(dataset, analyzer, "qld", qld,
                                     global_scope, workers),
    }


def load_score_files(cfg: Mapping, overrides: Mapping[str, Any] = {}
                     ) -> list[features.ScoreFile]:
    mapping = cfg_get(cfg, "features.score_files",
                      overrides.get("features.score_files")) or {}
    if not isinstance(mapping, Mapping):
        raise ConfigError("features.score_files must map model name to path")
    return [features.load_score_file(require_file(path, f"score file {name!r}"),
                                     name)
            for name, path in sorted(mapping.items())]


def assemble_for(dataset: corpus.Dataset, lex, score_files, cfg: Mapping,
                 overrides: Mapping[str, Any] = {},
                 with_labels: bool = True) -> features.FeatureMatrix:
    schema = features.FeatureSchema(
        tuple(cfg_get(cfg, "features.schema", overrides.get("features.schema"))))
    return features.assemble_features(
        dataset, lex, score_files, schema,
        missing_policy=cfg_get(cfg, "features.missing_policy",
                               overrides.get("features.missing_policy")),
        with_labels=with_labels)


def select_from(run: evaluation.RankedRun, cfg: Mapping,
                overrides: Mapping[str, Any] = {}) -> evaluation.Selection:
    policy = cfg_get(cfg, "select.policy", overrides.get("select.policy"))
    if policy == "top_k":
        return evaluation.select_top_k(
            run, int(cfg_get(cfg, "select.k", overrides.get("select.k"))))
    if policy == "threshold":
        return evaluation.select_threshold(
            run, float(cfg_get(cfg, "select.alpha", overrides.get("select.alpha"))))
    raise ConfigError(f"unknown selection policy {policy!r}")


def run_pipeline(cfg: Mapping, outdir: Path,
                 overrides: Mapping[str, Any] = {},
                 workers: int | None = None) -> evaluation.EvalReport:
    """ingest -> stats -> split -> lexical -> features -> train -> predict ->
    select -> evaluate, writing every artifact under ``outdir``."""
    outdir.mkdir(parents=True, exist_ok=True)
    artifacts: list[Path] = []

    def emit(name: str, writer) -> Path:
        path = outdir / name
        writer(path)
        artifacts.append(path)
        return path

    dataset = ingest_any(cfg, overrides, workers)
    emit("dataset.jsonl", lambda p: corpus.write_jsonl(dataset, p))

    stats = corpus.dataset_stats(dataset)
    emit("stats.json", lambda p: p.write_text(
        json.dumps(stats.as_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8"))

    n_valid = cfg_get(cfg, "split.n_valid", overrides.get("split.n_valid"))
    if n_valid is None:
        raise ConfigError("split.n_valid is required for the pipeline")
    seed = int(cfg_get(cfg, "seed", overrides.get("seed")))
    train_ds, valid_ds = corpus.split_validation(dataset, int(n_valid), seed)
    emit("train.jsonl", lambda p: corpus.write_jsonl(train_ds, p))
    emit("valid.jsonl", lambda p: corpus.write_jsonl(valid_ds, p))

    lex = lexical_scores(dataset, cfg, overrides, workers)
    for name in lexical.SCORER_NAMES:
        emit(f"scores_{name}.tsv",
             lambda p, n=name: lexical.write_score_dump(lex[n], n, p))
        emit(f"run_{name}.tsv",
             lambda p, n=name: evaluation.write_run_file(
                 lexical.run_from_scores(lex[n]), p))

    score_files = load_score_files(cfg, overrides)
    train_mx = assemble_for(train_ds, lex, score_files, cfg, overrides)
    valid_mx = assemble_for(valid_ds, lex, score_files, cfg, overrides)
    emit("features_train.tsv", lambda p: features.write_matrix(train_mx, p))
    emit("features_valid.tsv", lambda p: features.write_matrix(valid_mx, p))

    train_cfg = train_config_from(cfg, overrides)
    model, history = train_gbdt(train_mx, valid_mx, train_cfg)
    emit("model.json", lambda p: save_model(model, p))
    emit("history.json", lambda p: p.write_text(json.dumps({
        "best_iteration": history.best_iteration,
        "rounds": [{"train_objective": o, "validation_ndcg_at_1": v}
                   for o, v in history.rounds],
    }, indent=2, sort_keys=True) + "\n", encoding="utf-8"))

    test_path = cfg_get(cfg, "test_dataset", overrides.get("test_dataset"))
    if test_path:
        eval_ds = corpus.ingest_jsonl(require_file(test_path, "test dataset"),
                                      split_tag="test", workers=workers)
        overlap = {q.query_id for q in dataset} & {q.query_id for q in eval_ds}
        if overlap:
            raise IntegrityError(
                f"test dataset reuses query_ids of the main dataset: "
                f"{sorted(overlap)[:5]}")
        eval_lex = lexical_scores(eval_ds, cfg, overrides, workers)
        lex_all = {name: {**lex[name], **eval_lex[name]}
                   for name in lexical.SCORER_NAMES}
        eval_mx = assemble_for(eval_ds, lex_all, score_files, cfg, overrides)
        emit("features_test.tsv", lambda p: features.write_matrix(eval_mx, p))
    else:
        eval_ds = valid_ds
        eval_mx = valid_mx

    run = predict(model, eval_mx)
    emit("run_ltr.tsv", lambda p: evaluation.write_run_file(run, p))

    if bool(cfg_get(cfg, "retrain.enabled", overrides.get("retrain.enabled"))):
        if not test_path:
            raise ConfigError("retrain.enabled requires test_dataset")
        if not eval_mx.has_labels or not any(r.label == 1 for r in eval_mx.rows):
            raise IntegrityError("retraining needs a labeled test dataset")
        merged = features.FeatureMatrix(train_mx.schema,
                                        train_mx.rows + valid_mx.rows)
        final_cfg = train_config_from(cfg, overrides,
                                      patience_key="retrain.early_stop_patience")
        final_model, run = retrain_final(merged, eval_mx, final_cfg)
        emit("model_final.json", lambda p: save_model(final_model, p))
        emit("run_final.tsv", lambda p: evaluation.write_run_file(run, p))

    selection = select_from(run, cfg, overrides)
    emit("selection.tsv", lambda p: evaluation.write_selection_file(selection, p))

    report = evaluation.evaluate(selection, gold_of(eval_ds))
    emit("report.json", lambda p: p.write_text(
        json.dumps(report.as_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8"))

    write_manifest(outdir, "pipeline", effective_config(cfg, overrides),
                   artifacts)
    return report
