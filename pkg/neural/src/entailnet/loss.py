"""Contrastive softmax loss over one positive and n negative scores.

loss = -ln( exp(s_pos) / (exp(s_pos) + sum_j exp(s_neg_j)) )

computed in the max-shifted form so large scores cannot overflow.
"""

from __future__ import annotations

import math
from typing import Sequence


def contrastive_loss(s_pos: float, s_negs: Sequence[float]) -> float:
    if len(s_negs) < 1:
        raise ValueError("contrastive loss needs at least one negative score")
    shift = max(s_pos, max(s_negs))
    denom = math.exp(s_pos - shift) + sum(math.exp(s - shift) for s in s_negs)
    return -(s_pos - shift) + math.log(denom)


def contrastive_loss_grad(s_pos: float, s_negs: Sequence[float]
                          ) -> tuple[float, list[float]]:
    """(d loss / d s_pos, [d loss / d s_neg_j]): the softmax probabilities."""
    if len(s_negs) < 1:
        raise ValueError("contrastive loss needs at least one negative score")
    shift = max(s_pos, max(s_negs))
    exp_pos = math.exp(s_pos - shift)
    exp_negs = [math.exp(s - shift) for s in s_negs]
    denom = exp_pos + sum(exp_negs)
    return exp_pos / denom - 1.0, [e / denom for e in exp_negs]
