import json

import pytest

from conftest import NINE_FEATURES

from pararank.corpus import ingest_jsonl
from pararank.errors import IntegrityError, ParseError
from pararank.features import (DEFAULT_FEATURES, FeatureMatrix, FeatureSchema,
                               Row, ScoreFile, assemble_features,
                               load_score_file, read_matrix, write_matrix,
                               write_score_file)
from pararank.lexical import (AnalyzerConfig, Bm25Params, bm25_score,
                              build_index, score_dataset)


@pytest.fixture
def small_dataset(tmp_path):
    records = [
        {"query_id": "q1", "query_text": "alpha beta gamma",
         "candidates": [{"para_id": "p1", "text": "alpha alpha beta"},
                        {"para_id": "p2", "text": "delta epsilon"}],
         "gold": ["p1"]},
        {"query_id": "q2", "query_text": "zeta",
         "candidates": [{"para_id": "p1", "text": "zeta zeta"},
                        {"para_id": "p2", "text": "eta theta iota"},
                        {"para_id": "p3", "text": "kappa"}],
         "gold": ["p2"]},
    ]
    path = tmp_path / "small.jsonl"
    path.write_text("\n".join(json.dumps(r) for r in records))
    return ingest_jsonl(path)


def neural_scores(dataset, value=0.5):
    return {(q.query_id, p.para_id): value
            for q in dataset for p in q.candidates}


def full_inputs(dataset):
    lex = {
        "bm25": score_dataset(dataset, scorer="bm25"),
        "qld": score_dataset(dataset, scorer="qld"),
    }
    score_files = [
        ScoreFile(name, neural_scores(dataset, value=0.1 * i))
        for i, name in enumerate(DEFAULT_FEATURES[4:])
    ]
    return lex, score_files


class TestScoreFile:
    def test_load_three_lines(self, tmp_path):
        path = tmp_path / "scores.tsv"
        path.write_text("q1\tp1\t0.5\nq1\tp2\t-1.25\nq2\tp1\t3.0\n")
        sf = load_score_file(path, "bert_large")
        assert len(sf.entries) == 3
        assert sf.entries[("q1", "p2")] == -1.25

    def test_duplicate_key(self, tmp_path):
        path = tmp_path / "dupe.tsv"
        path.write_text("q1\tp2\t0.5\nq1\tp2\t0.6\n")
        with pytest.raises(ParseError, match="q1.*p2"):
            load_score_file(path, "m")

    def test_nan_score_rejected(self, tmp_path):
        path = tmp_path / "nan.tsv"
        path.write_text("q1\tp1\tNaN\n")
        with pytest.raises(ParseError, match="line 1"):
            load_score_file(path, "m")

    def test_round_trip(self, tmp_path):
        sf = ScoreFile("m", {("q1", "p1"): 0.1, ("q2", "p9"): -2.5e-8})
        path = tmp_path / "out.tsv"
        write_score_file(sf, path)
        assert load_score_file(path, "m") == sf


class TestAssemble:
    def test_default_schema_shape(self, small_dataset):
        lex, score_files = full_inputs(small_dataset)
        matrix = assemble_features(small_dataset, lex, score_files)
        assert len(matrix) == 5  # 2 + 3 candidates
        assert all(len(r.values) == 9 for r in matrix.rows)

    def test_labels_follow_gold(self, small_dataset):
        lex, score_files = full_inputs(small_dataset)
        matrix = assemble_features(small_dataset, lex, score_files)
        labels = {(r.query_id, r.para_id): r.label for r in matrix.rows}
        assert labels[("q1", "p1")] == 1
        assert labels[("q1", "p2")] == 0
        assert labels[("q2", "p2")] == 1

    def test_positive_count_matches_gold(self, small_dataset):
        lex, score_files = full_inputs(small_dataset)
        matrix = assemble_features(small_dataset, lex, score_files)
        for inst in small_dataset:
            positives = sum(r.label for r in matrix.rows
                            if r.query_id == inst.query_id)
            assert positives == len(inst.gold)

    def test_row_count_is_total_candidates(self, small_dataset):
        lex, score_files = full_inputs(small_dataset)
        matrix = assemble_features(small_dataset, lex, score_files)
        assert len(matrix) == sum(len(q.candidates) for q in small_dataset)

    def test_lengths_are_token_counts(self, small_dataset):
        lex, score_files = full_inputs(small_dataset)
        matrix = assemble_features(small_dataset, lex, score_files)
        row = next(r for r in matrix.rows
                   if (r.query_id, r.para_id) == ("q1", "p1"))
        schema = matrix.schema
        assert row.values[schema.index("query_length")] == 3.0
        assert row.values[schema.index("candidate_length")] == 3.0

    def test_bm25_column_matches_recomputation(self, small_dataset):
        lex, score_files = full_inputs(small_dataset)
        matrix = assemble_features(small_dataset, lex, score_files)
        cfg = AnalyzerConfig()
        col = matrix.schema.index("bm25")
        for inst in small_dataset:
            idx = build_index(inst.candidates, cfg)
            from pararank.lexical import analyze
            qtok = analyze(inst.clean_query_text, cfg)
            for row in matrix.rows:
                if row.query_id != inst.query_id:
                    continue
                direct = bm25_score(idx, qtok, row.para_id, Bm25Params())
                assert abs(row.values[col] - direct) < 1e-12

    def test_missing_policy_error(self, small_dataset):
        lex, score_files = full_inputs(small_dataset)
        partial = dict(score_files[0].entries)
        del partial[("q1", "p2")]
        score_files[0] = ScoreFile(score_files[0].model_name, partial)
        with pytest.raises(IntegrityError, match="q1.*p2"):
            assemble_features(small_dataset, lex, score_files)

    def test_missing_policy_fill_min(self, small_dataset):
        lex, score_files = full_inputs(small_dataset)
        name = score_files[0].model_name
        partial = {k: 0.2 + 0.1 * i for i, k in
                   enumerate(sorted(score_files[0].entries))}
        missing_key = ("q1", "p2")
        observed_min = min(v for k, v in partial.items() if k != missing_key)
        del partial[missing_key]
        score_files[0] = ScoreFile(name, partial)
        matrix = assemble_features(small_dataset, lex, score_files,
                                   missing_policy="fill_min")
        col = matrix.schema.index(name)
        row = next(r for r in matrix.rows
                   if (r.query_id, r.para_id) == missing_key)
        assert row.values[col] == pytest.approx(observed_min - 1.0)

    def test_unmatched_schema_name(self, small_dataset):
        lex, _ = full_inputs(small_dataset)
        with pytest.raises(IntegrityError, match="bert_large"):
            assemble_features(small_dataset, lex, [])

    def test_unlabeled_matrix(self, small_dataset):
        lex, score_files = full_inputs(small_dataset)
        matrix = assemble_features(small_dataset, lex, score_files,
                                   with_labels=False)
        assert all(r.label is None for r in matrix.rows)
        assert not matrix.has_labels


class TestMatrixIO:
    def test_round_trip_bit_exact(self, small_dataset, tmp_path):
        lex, score_files = full_inputs(small_dataset)
        matrix = assemble_features(small_dataset, lex, score_files)
        path = tmp_path / "matrix.tsv"
        write_matrix(matrix, path)
        again = read_matrix(path)
        assert again == matrix

    def test_hand_written_file(self, tmp_path):
        path = tmp_path / "hand.tsv"
        path.write_text("#schema: a,b\nq1\tp1\t1\t0.5\t1.5\nq1\tp2\t-\t0.0\t2.0\n")
        matrix = read_matrix(path)
        assert matrix.schema == FeatureSchema(("a", "b"))
        assert matrix.rows[0] == Row("q1", "p1", 1, (0.5, 1.5))
        assert matrix.rows[1].label is None

    def test_truncated_row(self, tmp_path):
        path = tmp_path / "trunc.tsv"
        path.write_text("#schema: a,b\nq1\tp1\t1\t0.5\n")
        with pytest.raises(ParseError, match="line 2"):
            read_matrix(path)

    def test_schema_mismatch_on_read(self, tmp_path):
        path = tmp_path / "m.tsv"
        path.write_text("#schema: a,b\nq1\tp1\t1\t0.5\t1.5\n")
        with pytest.raises(ParseError, match="schema mismatch"):
            read_matrix(path, expected_schema=NINE_FEATURES)


class TestSchema:
    def test_duplicate_names_rejected(self):
        with pytest.raises(IntegrityError):
            FeatureSchema(("a", "a"))

    def test_fingerprint_sensitive_to_order(self):
        a = FeatureSchema(("x", "y")).fingerprint()
        b = FeatureSchema(("y", "x")).fingerprint()
        assert a != b

    def test_duplicate_rows_rejected(self):
        with pytest.raises(IntegrityError):
            FeatureMatrix(FeatureSchema(("a",)),
                          (Row("q1", "p1", 0, (1.0,)),
                           Row("q1", "p1", 1, (2.0,))))
