"""Deterministic hash-bucket tokenizer for the built-in tiny backbones.

Word-level tokens map to ids via a stable digest, so tokenization never
depends on corpus order, process hash seeds, or platform. Special ids
cover the sequence markers plus the two relevance target tokens used by
the sequence-to-sequence scorer.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

PAD, CLS, SEP, TRUE, FALSE = 0, 1, 2, 3, 4
_NUM_SPECIAL = 5

SPECIAL_TOKENS = {"<pad>": PAD, "<cls>": CLS, "<sep>": SEP,
                  "true": TRUE, "false": FALSE}


@dataclass(frozen=True)
class HashTokenizer:
    buckets: int = 4096

    @property
    def vocab_size(self) -> int:
        return self.buckets + _NUM_SPECIAL

    @property
    def pad_id(self) -> int:
        return PAD

    @property
    def cls_id(self) -> int:
        return CLS

    @property
    def sep_id(self) -> int:
        return SEP

    def token_id(self, token: str) -> int:
        token = token.lower()
        if token in SPECIAL_TOKENS:
            return SPECIAL_TOKENS[token]
        digest = hashlib.sha1(token.encode("utf-8")).digest()
        return _NUM_SPECIAL + int.from_bytes(digest[:8], "big") % self.buckets

    def encode(self, text: str) -> list[int]:
        return [self.token_id(t) for t in _TOKEN_RE.findall(text)]

    def target_token_ids(self) -> tuple[int, int]:
        """Ids of the 'true' and 'false' relevance targets."""
        return TRUE, FALSE
