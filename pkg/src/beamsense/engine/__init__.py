from .backend import BACKEND_NAME, available_backends, kernels
from .layers import BatchNorm2D, Conv2D, Dense, MaxPool2, ReLU
from .losses import softmax_cross_entropy
from .adam import AdamState, adam_step
from .gradcheck import grad_check

__all__ = [
    "BACKEND_NAME", "available_backends", "kernels",
    "Conv2D", "BatchNorm2D", "Dense", "MaxPool2", "ReLU",
    "softmax_cross_entropy", "AdamState", "adam_step", "grad_check",
]
