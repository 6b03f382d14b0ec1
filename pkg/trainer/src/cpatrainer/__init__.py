"""Toy-network trainer emitting the affinecells interchange format."""

from .datasets import make_dataset, synthetic_random, two_moons
from .export import export_model, model_to_json
from .models import ResidualBlock, TwoSlope, build_mlp, build_residual_mlp
from .train import (
    DEFAULT_CHECKPOINT_EPOCHS,
    TrainingDiverged,
    TrainSpec,
    train_and_export,
)

__version__ = "0.1.0"
