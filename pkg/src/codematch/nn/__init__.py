"""Minimal reverse-mode autodiff stack used by the matching models."""

from .autodiff import (
    GraphError,
    Tensor,
    add,
    concat,
    div,
    matmul,
    mul,
    neg,
    relu,
    reshape,
    set_debug_checks,
    sigmoid,
    sqrt,
    sub,
    take_rows,
    tanh,
    tmax,
    transpose,
    tsum,
)
from .gradcheck import grad_check
from .layers import NORM_GUARD, cosine, embed_lookup, l2sim, linear, maxpool_seq
from .optim import AdamState, ParamStore, adam_step
from .pretrain import skipgram_pretrain
from .rnn import bilstm, bilstm_param_shapes, lstm_seq

__all__ = [
    "GraphError", "Tensor", "add", "concat", "div", "matmul", "mul", "neg",
    "relu", "reshape", "set_debug_checks", "sigmoid", "sqrt", "sub",
    "take_rows", "tanh", "tmax", "transpose", "tsum", "grad_check",
    "NORM_GUARD", "cosine", "embed_lookup", "l2sim", "linear", "maxpool_seq",
    "AdamState", "ParamStore", "adam_step", "skipgram_pretrain",
    "bilstm", "bilstm_param_shapes", "lstm_seq",
]
