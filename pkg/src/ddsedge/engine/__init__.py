from ddsedge.engine.gradcheck import grad_check
from ddsedge.engine.ops import (
    ConvSpec,
    add,
    bilinear_kernel_1d,
    bilinear_upsample,
    channel_slice,
    concat_channels,
    conv2d,
    custom_op,
    relu,
    scale,
    sigmoid,
    sum_all,
)
from ddsedge.engine.tensor import Node, ShapeError, Tape, Tensor, accumulate

__all__ = [
    "ConvSpec",
    "Node",
    "ShapeError",
    "Tape",
    "Tensor",
    "accumulate",
    "add",
    "bilinear_kernel_1d",
    "bilinear_upsample",
    "channel_slice",
    "concat_channels",
    "conv2d",
    "custom_op",
    "grad_check",
    "relu",
    "scale",
    "sigmoid",
    "sum_all",
]
