"""Reverse-mode automatic differentiation, Adam and gradient checking."""

from . import ops
from .gradcheck import GradCheckResult, check_gradients, relative_error
from .optim import Adam, AdamState, adam_step
from .tensor import Tensor, as_tensor, backward, is_grad_enabled, no_grad

__all__ = [
    "Adam",
    "AdamState",
    "GradCheckResult",
    "Tensor",
    "adam_step",
    "as_tensor",
    "backward",
    "check_gradients",
    "is_grad_enabled",
    "no_grad",
    "ops",
    "relative_error",
]
