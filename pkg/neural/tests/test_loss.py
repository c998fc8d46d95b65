import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entailnet import contrastive_loss, contrastive_loss_grad

finite_scores = st.floats(min_value=-50, max_value=50, allow_nan=False)


class TestClosedFormValues:
    def test_equal_scores_give_ln_n_plus_1(self):
        for n in range(1, 17):
            for c in (-3.0, 0.0, 2.5, 100.0):
                loss = contrastive_loss(c, [c] * n)
                assert loss == pytest.approx(math.log(n + 1), abs=1e-9)

    def test_hand_value(self):
        loss = contrastive_loss(2.0, [0.0, 1.0])
        expected = -math.log(math.exp(2) / (math.exp(2) + 1 + math.e))
        assert loss == pytest.approx(expected, rel=1e-12)
        assert loss == pytest.approx(0.4076, abs=1e-4)

    def test_empty_negatives_rejected(self):
        with pytest.raises(ValueError):
            contrastive_loss(1.0, [])

    def test_extreme_scores_stay_finite(self):
        assert math.isfinite(contrastive_loss(1000.0, [-1000.0]))
        assert math.isfinite(contrastive_loss(-1000.0, [1000.0]))


class TestShiftInvariance:
    @given(finite_scores,
           st.lists(finite_scores, min_size=1, max_size=8),
           st.floats(min_value=-30, max_value=30, allow_nan=False))
    @settings(max_examples=300, deadline=None)
    def test_adding_constant_changes_nothing(self, s_pos, s_negs, shift):
        base = contrastive_loss(s_pos, s_negs)
        shifted = contrastive_loss(s_pos + shift, [s + shift for s in s_negs])
        assert shifted == pytest.approx(base, abs=1e-6)


class TestMonotonicity:
    def test_decreasing_in_positive_score(self):
        negs = [0.3, -0.2, 1.1]
        losses = [contrastive_loss(s, negs) for s in np.linspace(-3, 3, 25)]
        assert all(b < a for a, b in zip(losses, losses[1:]))

    def test_increasing_in_any_negative_score(self):
        for j in range(3):
            losses = []
            for v in np.linspace(-3, 3, 25):
                negs = [0.0, 0.5, -0.5]
                negs[j] = float(v)
                losses.append(contrastive_loss(0.2, negs))
            assert all(b > a for a, b in zip(losses, losses[1:]))


class TestGradient:
    def test_matches_central_finite_differences(self):
        rng = np.random.default_rng(13)
        h = 1e-5
        for _ in range(100):
            n = int(rng.integers(1, 8))
            s_pos = float(rng.normal(scale=3))
            s_negs = [float(v) for v in rng.normal(scale=3, size=n)]
            g_pos, g_negs = contrastive_loss_grad(s_pos, s_negs)
            fd_pos = (contrastive_loss(s_pos + h, s_negs)
                      - contrastive_loss(s_pos - h, s_negs)) / (2 * h)
            assert g_pos == pytest.approx(fd_pos, abs=1e-4)
            for j in range(n):
                up = list(s_negs)
                down = list(s_negs)
                up[j] += h
                down[j] -= h
                fd = (contrastive_loss(s_pos, up)
                      - contrastive_loss(s_pos, down)) / (2 * h)
                assert g_negs[j] == pytest.approx(fd, abs=1e-4)

    def test_gradients_sum_to_zero(self):
        # softmax probabilities minus the one-hot target
        g_pos, g_negs = contrastive_loss_grad(0.7, [0.1, -0.4, 2.0])
        assert g_pos + sum(g_negs) == pytest.approx(0.0, abs=1e-12)
