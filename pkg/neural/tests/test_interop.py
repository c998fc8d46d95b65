"""Cross-package contract: emitted score files feed the ranking pipeline."""

from pathlib import Path

import pytest
import torch

from entailnet import NeuralConfig, emit_score_file, read_dataset
from entailnet.cross_encoder import CrossEncoderScorer

pararank_features = pytest.importorskip(
    "pararank.features",
    reason="interop tests need the primary pararank package installed")

SHARED_FIXTURE = Path(__file__).resolve().parents[2] / \
    "tests" / "fixtures" / "pipeline20.jsonl"


@pytest.fixture(scope="module")
def cases():
    return read_dataset(SHARED_FIXTURE)


@pytest.fixture(scope="module")
def scorer():
    torch.manual_seed(0)
    return CrossEncoderScorer(NeuralConfig())


def test_emitted_file_loads_with_zero_missing_pairs(cases, scorer, tmp_path_factory):
    out = tmp_path_factory.mktemp("interop") / "scores.tsv"
    count = emit_score_file(cases, scorer, "bert_large", out)
    score_file = pararank_features.load_score_file(out, "bert_large")
    assert len(score_file.entries) == count
    expected = {(case.query_id, cand.para_id)
                for case in cases for cand in case.candidates}
    assert set(score_file.entries) == expected  # zero missing, zero extra


def test_emission_is_deterministic(cases, scorer, tmp_path):
    a = tmp_path / "a.tsv"
    b = tmp_path / "b.tsv"
    emit_score_file(cases, scorer, "m", a)
    emit_score_file(cases, scorer, "m", b)
    assert a.read_bytes() == b.read_bytes()


def test_emitted_scores_are_assemblable(cases, scorer, tmp_path):
    """The file can stand in for every neural feature of the 9-column matrix."""
    from pararank.corpus import ingest_jsonl
    from pararank.features import DEFAULT_FEATURES, assemble_features
    from pararank.lexical import score_dataset

    out = tmp_path / "scores.tsv"
    emit_score_file(cases, scorer, "neural", out)
    dataset = ingest_jsonl(SHARED_FIXTURE)
    lex = {"bm25": score_dataset(dataset, scorer="bm25"),
           "qld": score_dataset(dataset, scorer="qld")}
    score_files = [
        pararank_features.load_score_file(out, name)
        for name in DEFAULT_FEATURES[4:]
    ]
    matrix = assemble_features(dataset, lex, score_files)
    assert len(matrix) == sum(len(c.candidates) for c in cases)
