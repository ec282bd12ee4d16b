"""Dense tensors with reverse-mode autodiff, Adam, and gradient checking."""

from .autodiff import (
    GraphError,
    NonFiniteError,
    ShapeError,
    Tensor,
    add,
    backward,
    concat,
    dropout,
    embedding_lookup,
    masked_select,
    matmul,
    mean_all,
    mul,
    reshape,
    sigmoid,
    softmax_cross_entropy,
    softmax_np,
    stack,
    sub,
    sum_all,
    tanh,
    transpose,
    unstack,
    where,
)
from .gradcheck import grad_check, relative_errors
from .optim import Adam, AdamState, adam_step

__all__ = [
    "Adam", "AdamState", "GraphError", "NonFiniteError", "ShapeError", "Tensor",
    "adam_step", "add", "backward", "concat", "dropout", "embedding_lookup",
    "grad_check", "masked_select", "matmul", "mean_all", "mul", "relative_errors",
    "reshape", "sigmoid", "softmax_cross_entropy", "softmax_np", "stack", "sub",
    "sum_all", "tanh", "transpose", "unstack", "where",
]
