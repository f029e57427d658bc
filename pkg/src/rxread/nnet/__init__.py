from .model import (
    Model,
    ModelConfig,
    NonFiniteTensor,
    backward,
    forward,
    forward_batch,
    init_model,
    loss_and_grads,
)
from .train import EpochStats, TrainConfig, sequence_accuracy, train
from .weights import decode_model, encode_model, load_model, save_model

__all__ = [
    "Model",
    "ModelConfig",
    "NonFiniteTensor",
    "backward",
    "forward",
    "forward_batch",
    "init_model",
    "loss_and_grads",
    "EpochStats",
    "TrainConfig",
    "sequence_accuracy",
    "train",
    "decode_model",
    "encode_model",
    "load_model",
    "save_model",
]
