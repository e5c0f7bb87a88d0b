from .model import ArchConfig, Model, build_mhdnn, forward_windows, cross_entropy
from .train import TrainConfig, train, grad_check
from .checkpoint import save_model, load_model, save_checkpoint, load_checkpoint

__all__ = [
    "ArchConfig",
    "Model",
    "build_mhdnn",
    "forward_windows",
    "cross_entropy",
    "TrainConfig",
    "train",
    "grad_check",
    "save_model",
    "load_model",
    "save_checkpoint",
    "load_checkpoint",
]
