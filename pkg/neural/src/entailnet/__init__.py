"""entailnet: neural rerankers that emit score files for the ranking pipeline."""

__version__ = "0.1.0"

from .cross_encoder import (CrossEncoderScorer, cross_encoder_input,
                            train_cross_encoder)
from .data import (NeuralConfig, QueryCase, TrainSample,
                   build_training_samples, read_dataset)
from .loss import contrastive_loss, contrastive_loss_grad
from .scores import emit_score_file, load_scorer, save_scorer
from .seq2seq import (Seq2SeqScorer, seq2seq_prompt, seq2seq_score,
                      train_seq2seq)

__all__ = [
    "CrossEncoderScorer",
    "NeuralConfig",
    "QueryCase",
    "Seq2SeqScorer",
    "TrainSample",
    "build_training_samples",
    "contrastive_loss",
    "contrastive_loss_grad",
    "cross_encoder_input",
    "emit_score_file",
    "load_scorer",
    "read_dataset",
    "save_scorer",
    "seq2seq_prompt",
    "seq2seq_score",
    "train_cross_encoder",
    "train_seq2seq",
    "__version__",
]
