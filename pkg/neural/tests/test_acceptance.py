"""Acceptance suite for the neural reranker package.

Mirrors the primary package's convention: one criterion per test, one
PASS/FAIL line each, runnable standalone (``python tests/test_acceptance.py``).
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest
import torch

from entailnet import (NeuralConfig, TrainSample, contrastive_loss,
                       contrastive_loss_grad, emit_score_file, read_dataset,
                       train_cross_encoder, train_seq2seq)
from entailnet.cross_encoder import CrossEncoderScorer

SHARED_FIXTURE = Path(__file__).resolve().parents[2] / \
    "tests" / "fixtures" / "pipeline20.jsonl"

OVERFIT_SAMPLES = [
    TrainSample("negligence claim for damages",
                "the respondent owed a duty of care",
                ("statute of limitations bars the motion",
                 "patent infringement analysis")),
    TrainSample("refugee protection appeal",
                "the board erred in assessing persecution risk",
                ("costs awarded to the appellant",
                 "maritime lien priority dispute")),
]


def _passed(name: str) -> None:
    print(f"ACCEPTANCE {name}: PASS")


def test_contrastive_loss_unit_suite():
    """Equal-score ln(n+1) identity (1e-9), shift invariance (1e-6), and a
    central-finite-difference gradient check (1e-4) over 100 random score
    vectors."""
    for n in range(1, 17):
        assert contrastive_loss(0.5, [0.5] * n) == pytest.approx(
            math.log(n + 1), abs=1e-9)

    rng = np.random.default_rng(20230777)
    h = 1e-5
    for _ in range(100):
        n = int(rng.integers(1, 9))
        s_pos = float(rng.normal(scale=4))
        s_negs = [float(v) for v in rng.normal(scale=4, size=n)]
        shift = float(rng.uniform(-20, 20))
        base = contrastive_loss(s_pos, s_negs)
        shifted = contrastive_loss(s_pos + shift,
                                   [s + shift for s in s_negs])
        assert shifted == pytest.approx(base, abs=1e-6)

        g_pos, g_negs = contrastive_loss_grad(s_pos, s_negs)
        fd_pos = (contrastive_loss(s_pos + h, s_negs)
                  - contrastive_loss(s_pos - h, s_negs)) / (2 * h)
        assert g_pos == pytest.approx(fd_pos, abs=1e-4)
        for j in range(n):
            up, down = list(s_negs), list(s_negs)
            up[j] += h
            down[j] -= h
            fd = (contrastive_loss(s_pos, up)
                  - contrastive_loss(s_pos, down)) / (2 * h)
            assert g_negs[j] == pytest.approx(fd, abs=1e-4)
    _passed("contrastive-loss-unit-suite")


def test_score_file_interop(tmp_path):
    """Emitted score files load in the primary features module with zero
    missing pairs on the shared fixture."""
    pararank_features = pytest.importorskip(
        "pararank.features",
        reason="interop needs the primary pararank package installed")
    cases = read_dataset(SHARED_FIXTURE)
    torch.manual_seed(0)
    scorer = CrossEncoderScorer(NeuralConfig())
    out = tmp_path / "scores.tsv"
    emit_score_file(cases, scorer, "monot5_3b", out)
    loaded = pararank_features.load_score_file(out, "monot5_3b")
    expected = {(case.query_id, cand.para_id)
                for case in cases for cand in case.candidates}
    missing = expected - set(loaded.entries)
    assert missing == set()
    assert set(loaded.entries) == expected
    _passed("score-file-interop")


def test_tiny_overfit_smoke():
    """A cross-encoder trained on the 2-sample fixture ranks each positive
    above its negatives; the seq2seq scorer always lands strictly in (0,1)."""
    cfg = NeuralConfig(epochs=40, learning_rate=3e-3, seed=1)
    cross = train_cross_encoder(OVERFIT_SAMPLES, cfg)
    for s in OVERFIT_SAMPLES:
        pos = cross.score(s.query_text, s.positive_text)
        assert all(pos > cross.score(s.query_text, neg)
                   for neg in s.negative_texts)

    seq = train_seq2seq(OVERFIT_SAMPLES, cfg)
    for s in OVERFIT_SAMPLES:
        scores = [seq.score(s.query_text, s.positive_text)] + \
            [seq.score(s.query_text, neg) for neg in s.negative_texts]
        assert all(0.0 < v < 1.0 for v in scores)
        assert scores[0] == max(scores)
    _passed("tiny-overfit-smoke")


CRITERIA = [
    test_contrastive_loss_unit_suite,
    test_score_file_interop,
    test_tiny_overfit_smoke,
]


def _main() -> int:
    import tempfile
    failed = 0
    for criterion in CRITERIA:
        kwargs = {}
        if "tmp_path" in criterion.__code__.co_varnames[
                :criterion.__code__.co_argcount]:
            kwargs["tmp_path"] = Path(tempfile.mkdtemp())
        try:
            criterion(**kwargs)
        except Exception as exc:
            name = criterion.__name__.removeprefix("test_").replace("_", "-")
            print(f"ACCEPTANCE {name}: FAIL ({exc})")
            failed += 1
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(_main())
