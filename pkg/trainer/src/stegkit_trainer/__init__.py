"""Toy-scale adversarial trainer for embedding-change probability maps."""

from .discriminator import Discriminator, build_discriminator
from .simulator_layer import DEFAULT_LAMBDA, TanhSimulator, tanh_modification
from .train import TrainConfig, infer, ternary_capacity, train
from .unet import Generator, GeneratorConfig, build_generator

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_LAMBDA",
    "Discriminator",
    "Generator",
    "GeneratorConfig",
    "TanhSimulator",
    "TrainConfig",
    "build_discriminator",
    "build_generator",
    "infer",
    "tanh_modification",
    "ternary_capacity",
    "train",
    "__version__",
]
