from .init import fan_in_out, xavier_uniform
from .layers import (
    AvgPool2D,
    BatchNorm,
    Conv2D,
    Dense,
    Flatten,
    Layer,
    MaxPool2D,
    Param,
    ReLU,
    Sigmoid,
    sigmoid,
)
from .losses import LossValue, bce_loss, smooth_l1_loss
from .network import Network
from .optim import Adam
from .serialize import load_weights, load_weights_into, save_weights

__all__ = [
    "Adam",
    "AvgPool2D",
    "BatchNorm",
    "Conv2D",
    "Dense",
    "Flatten",
    "Layer",
    "LossValue",
    "MaxPool2D",
    "Network",
    "Param",
    "ReLU",
    "Sigmoid",
    "bce_loss",
    "fan_in_out",
    "load_weights",
    "load_weights_into",
    "save_weights",
    "sigmoid",
    "smooth_l1_loss",
    "xavier_uniform",
]
