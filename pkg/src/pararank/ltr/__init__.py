"""Gradient-boosted learning-to-rank with ndcg@1 model selection."""

from .kernels import BACKEND as KERNEL_BACKEND
from .kernels import available_backends
from .model import (GbdtModel, TrainConfig, TrainHistory, Tree, load_model,
                    model_from_json, model_to_json, save_model)
from .train import ndcg_at_1, predict, retrain_final, train_gbdt

__all__ = [
    "KERNEL_BACKEND",
    "available_backends",
    "GbdtModel",
    "TrainConfig",
    "TrainHistory",
    "Tree",
    "load_model",
    "model_from_json",
    "model_to_json",
    "save_model",
    "ndcg_at_1",
    "predict",
    "retrain_final",
    "train_gbdt",
]
