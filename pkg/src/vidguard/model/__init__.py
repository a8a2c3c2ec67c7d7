from .config import ALL_BRANCHES, ModelConfig, TrainHyperparams
from .estimator import (
    FusionClassifier,
    ModelFormatError,
    TrainedPipeline,
    bundles_to_tensors,
)
from .gradcheck import max_relative_gradient_error
from .network import FusionNet, TextBranch

__all__ = [
    "ALL_BRANCHES",
    "ModelConfig",
    "TrainHyperparams",
    "FusionClassifier",
    "ModelFormatError",
    "TrainedPipeline",
    "bundles_to_tensors",
    "max_relative_gradient_error",
    "FusionNet",
    "TextBranch",
]
