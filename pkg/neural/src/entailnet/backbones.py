"""Backbone registry.

Built-in backbones are small randomly initialized Transformer encoders:
no checkpoint downloads, fully deterministic, enough to overfit the tiny
fixtures the contracts are tested on. Identifiers of the form
``hf:<model-id>`` pass through to the ``transformers`` library when local
checkpoints are available.
"""

from __future__ import annotations

import torch
from torch import nn

from .tokenizer import HashTokenizer


class BackboneError(RuntimeError):
    """The requested backbone identifier cannot be resolved."""


class TinyEncoder(nn.Module):
    """Embedding + learned positions + a small Transformer encoder stack."""

    def __init__(self, vocab_size: int, max_len: int, d_model: int = 64,
                 nhead: int = 4, num_layers: int = 2, dim_ff: int = 128):
        super().__init__()
        self.d_model = d_model
        self.token_embedding = nn.Embedding(vocab_size, d_model)
        self.position_embedding = nn.Embedding(max_len, d_model)
        layer = nn.TransformerEncoderLayer(
            d_model=d_model, nhead=nhead, dim_feedforward=dim_ff,
            batch_first=True, dropout=0.0)
        self.encoder = nn.TransformerEncoder(layer, num_layers=num_layers,
                                             enable_nested_tensor=False)

    def forward(self, token_ids: torch.Tensor,
                pad_mask: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(token_ids.shape[1], device=token_ids.device)
        hidden = (self.token_embedding(token_ids)
                  + self.position_embedding(positions)[None, :, :])
        return self.encoder(hidden, src_key_padding_mask=pad_mask)


_BUILTIN = ("tiny-encoder", "tiny-encoder-wide")


def build_backbone(identifier: str, vocab_size: int, max_len: int) -> nn.Module:
    if identifier == "tiny-encoder":
        return TinyEncoder(vocab_size, max_len)
    if identifier == "tiny-encoder-wide":
        return TinyEncoder(vocab_size, max_len, d_model=128, dim_ff=256)
    if identifier.startswith("hf:"):
        try:
            from transformers import AutoModel
        except ImportError as exc:
            raise BackboneError(
                f"{identifier!r} needs the transformers library") from exc
        try:
            return AutoModel.from_pretrained(identifier[3:])
        except Exception as exc:
            raise BackboneError(
                f"could not load {identifier!r}: {exc}") from exc
    raise BackboneError(
        f"unknown backbone {identifier!r}; built-ins: {', '.join(_BUILTIN)}, "
        "or hf:<model-id>")


def make_tokenizer() -> HashTokenizer:
    return HashTokenizer()
