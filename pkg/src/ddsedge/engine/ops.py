"""Layer operations over :class:`~ddsedge.engine.tensor.Tensor`.

Every op runs eagerly on numpy arrays and, when an input is watched on a
tape, records a backward closure. Ops are deterministic and pure; saved
forward context lives only in the closures.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ddsedge.backend import kernels
from ddsedge.engine.tensor import ShapeError, Tape, Tensor, accumulate


@dataclass(frozen=True)
class ConvSpec:
    """Geometry of a 2-D convolution."""

    in_channels: int
    out_channels: int
    kernel: tuple[int, int] = (3, 3)
    stride: int = 1
    dilation: int = 1
    padding: int = 0
    groups: int = 1

    def __post_init__(self):
        if self.stride < 1 or self.dilation < 1 or self.groups < 1:
            raise ShapeError("stride, dilation and groups must be positive")
        if self.padding < 0:
            raise ShapeError("padding must be non-negative")
        if self.in_channels % self.groups or self.out_channels % self.groups:
            raise ShapeError(
                f"channels ({self.in_channels} in, {self.out_channels} out) "
                f"must divide by groups={self.groups}"
            )

    def out_size(self, h: int, w: int) -> tuple[int, int]:
        kh, kw = self.kernel
        ho = (h + 2 * self.padding - self.dilation * (kh - 1) - 1) // self.stride + 1
        wo = (w + 2 * self.padding - self.dilation * (kw - 1) - 1) // self.stride + 1
        if ho < 1 or wo < 1:
            raise ShapeError(
                f"convolution output would be {ho}x{wo} for input {h}x{w} with {self}"
            )
        return ho, wo

    @property
    def weight_shape(self) -> tuple[int, int, int, int]:
        return (self.out_channels, self.in_channels // self.groups, *self.kernel)


def _tape_of(*tensors: Tensor) -> Tape | None:
    tape = None
    for t in tensors:
        if t.tape is not None:
            if tape is not None and tape is not t.tape:
                raise ValueError("operands live on different tapes")
            tape = t.tape
    return tape


def _wrap(tape: Tape | None, op: str, out: np.ndarray, inputs: tuple[int | None, ...], backward):
    if tape is None:
        return Tensor(out)
    ids = tuple(i for i in inputs if i is not None)
    node_id = tape.record(op, ids, backward, out)
    return Tensor(out, tape=tape, node_id=node_id)


def conv2d(x: Tensor, weights: Tensor, bias: Tensor, spec: ConvSpec) -> Tensor:
    """Grouped, strided, dilated 2-D convolution with zero padding.

    `weights` is (out_channels, in_channels/groups, kh, kw); `bias` is a
    (1, out_channels, 1, 1) tensor added per output channel.
    """
    n, c, h, w = x.shape
    if c != spec.in_channels:
        raise ShapeError(f"input has {c} channels, spec expects {spec.in_channels}")
    if tuple(weights.shape) != spec.weight_shape:
        raise ShapeError(f"weights shape {weights.shape} != expected {spec.weight_shape}")
    if tuple(bias.shape) != (1, spec.out_channels, 1, 1):
        raise ShapeError(
            f"bias shape {bias.shape} != expected (1, {spec.out_channels}, 1, 1)"
        )
    kh, kw = spec.kernel
    s, d, p, g = spec.stride, spec.dilation, spec.padding, spec.groups
    ho, wo = spec.out_size(h, w)

    xp = np.pad(x.data, ((0, 0), (0, 0), (p, p), (p, p))) if p else x.data
    xp = np.ascontiguousarray(xp)
    cols = kernels.im2col(xp, kh, kw, s, s, d, d, ho, wo)  # (n, c*kh*kw, ho*wo)

    cin_g = c // g
    cout_g = spec.out_channels // g
    cols_g = cols.reshape(n, g, cin_g * kh * kw, ho * wo)
    w_g = weights.data.reshape(g, cout_g, cin_g * kh * kw)
    out = np.matmul(w_g[None], cols_g)  # (n, g, cout_g, ho*wo)
    out = out.reshape(n, spec.out_channels, ho, wo) + bias.data

    tape = _tape_of(x, weights, bias)
    if tape is None:
        return Tensor(out)

    x_id, w_id, b_id = x.node_id, weights.node_id, bias.node_id
    hp, wp = xp.shape[2], xp.shape[3]

    def backward(gout, grads):
        gout_g = gout.reshape(n, g, cout_g, ho * wo)
        if b_id is not None:
            accumulate(grads, b_id, gout.sum(axis=(0, 2, 3)).reshape(1, -1, 1, 1))
        if w_id is not None:
            gw = np.matmul(gout_g, cols_g.transpose(0, 1, 3, 2)).sum(axis=0)
            accumulate(grads, w_id, gw.reshape(spec.weight_shape))
        if x_id is not None:
            gcols = np.matmul(w_g.transpose(0, 2, 1)[None], gout_g)
            gcols = np.ascontiguousarray(gcols.reshape(n, c * kh * kw, ho * wo))
            gxp = kernels.col2im(gcols, n, c, hp, wp, kh, kw, s, s, d, d, ho, wo)
            gx = gxp[:, :, p : p + h, p : p + w] if p else gxp
            accumulate(grads, x_id, gx)

    return _wrap(tape, "conv2d", out, (x_id, w_id, b_id), backward)


def relu(x: Tensor) -> Tensor:
    """Elementwise max(0, x); the subgradient at 0 is taken as 0."""
    out = np.maximum(x.data, 0)
    tape = x.tape
    if tape is None:
        return Tensor(out)
    x_id = x.node_id
    mask = x.data > 0

    def backward(gout, grads):
        accumulate(grads, x_id, gout * mask)

    return _wrap(tape, "relu", out, (x_id,), backward)


def sigmoid(x: Tensor) -> Tensor:
    """Numerically stable logistic function, branch form per sign."""
    out = _stable_sigmoid(x.data)
    tape = x.tape
    if tape is None:
        return Tensor(out)
    x_id = x.node_id

    def backward(gout, grads):
        accumulate(grads, x_id, gout * out * (1.0 - out))

    return _wrap(tape, "sigmoid", out, (x_id,), backward)


def _stable_sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise sum of two identically shaped tensors."""
    if a.shape != b.shape:
        raise ShapeError(f"add needs identical shapes, got {a.shape} and {b.shape}")
    out = a.data + b.data
    tape = _tape_of(a, b)
    if tape is None:
        return Tensor(out)
    a_id, b_id = a.node_id, b.node_id

    def backward(gout, grads):
        accumulate(grads, a_id, gout)
        accumulate(grads, b_id, gout)

    return _wrap(tape, "add", out, (a_id, b_id), backward)


def concat_channels(parts: list[Tensor]) -> Tensor:
    """Stack tensors along the channel axis, in argument order."""
    if not parts:
        raise ShapeError("concat_channels needs at least one tensor")
    ref = parts[0]
    for i, t in enumerate(parts[1:], start=1):
        if t.shape[0] != ref.shape[0] or t.shape[2:] != ref.shape[2:]:
            raise ShapeError(
                f"concat part {i} has batch/spatial {t.shape[0]}x{t.shape[2:]}, "
                f"expected {ref.shape[0]}x{ref.shape[2:]}"
            )
    out = np.concatenate([t.data for t in parts], axis=1)
    tape = _tape_of(*parts)
    if tape is None:
        return Tensor(out)
    ids = [t.node_id for t in parts]
    widths = [t.shape[1] for t in parts]
    offsets = np.cumsum([0] + widths)

    def backward(gout, grads):
        for nid, lo, hi in zip(ids, offsets[:-1], offsets[1:]):
            accumulate(grads, nid, gout[:, lo:hi])

    return _wrap(tape, "concat", out, tuple(ids), backward)


def channel_slice(x: Tensor, start: int, stop: int) -> Tensor:
    """View channels [start, stop) as a new tensor."""
    if not (0 <= start < stop <= x.shape[1]):
        raise ShapeError(f"channel slice [{start}:{stop}) out of range for {x.shape[1]} channels")
    out = x.data[:, start:stop].copy()
    tape = x.tape
    if tape is None:
        return Tensor(out)
    x_id = x.node_id
    full_shape = x.shape

    def backward(gout, grads):
        g = np.zeros(full_shape, dtype=gout.dtype)
        g[:, start:stop] = gout
        accumulate(grads, x_id, g)

    return _wrap(tape, "channel_slice", out, (x_id,), backward)


@lru_cache(maxsize=None)
def bilinear_kernel_1d(factor: int) -> np.ndarray:
    """Fixed FCN-style interpolation kernel of size ``2f - (f mod 2)``.

    The kernel center sits at (2f - 1 - f mod 2)/2 in tap coordinates, so
    upsampling a constant reproduces the constant away from borders.
    """
    size = 2 * factor - (factor % 2)
    if factor % 2 == 1:
        center = factor - 1.0
    else:
        center = factor - 0.5
    taps = np.arange(size, dtype=np.float64)
    return 1.0 - np.abs(taps - center) / factor


def bilinear_upsample(x: Tensor, factor: int) -> Tensor:
    """Upsample spatially by an integer factor with the fixed bilinear kernel.

    Realized as a transposed convolution with stride = factor and the
    constant separable kernel from :func:`bilinear_kernel_1d`; the raw
    result is center-cropped so output size is exactly input * factor.
    The kernel is a constant of the graph, never trained.
    """
    if factor < 1:
        raise ShapeError(f"upsample factor must be >= 1, got {factor}")
    if factor == 1:
        out = x.data.copy()
        tape = x.tape
        if tape is None:
            return Tensor(out)
        x_id = x.node_id

        def backward_id(gout, grads):
            accumulate(grads, x_id, gout)

        return _wrap(tape, "bilinear_upsample", out, (x_id,), backward_id)

    k = bilinear_kernel_1d(factor).astype(x.dtype)
    out = _upsample_scatter(x.data, factor, k)
    tape = x.tape
    if tape is None:
        return Tensor(out)
    x_id = x.node_id

    def backward(gout, grads):
        accumulate(grads, x_id, _upsample_gather(gout, factor, k, x.shape))

    return _wrap(tape, "bilinear_upsample", out, (x_id,), backward)


def _upsample_scatter(x: np.ndarray, f: int, k: np.ndarray) -> np.ndarray:
    n, c, h, w = x.shape
    size = k.shape[0]
    crop = (size - f) // 2
    # Separable transposed convolution: rows pass then columns pass.
    rows = np.zeros((n, c, (h - 1) * f + size, w), dtype=x.dtype)
    for i in range(size):
        rows[:, :, i : i + (h - 1) * f + 1 : f, :] += k[i] * x
    rows = rows[:, :, crop : crop + h * f, :]
    out = np.zeros((n, c, h * f, (w - 1) * f + size), dtype=x.dtype)
    for j in range(size):
        out[:, :, :, j : j + (w - 1) * f + 1 : f] += k[j] * rows
    return out[:, :, :, crop : crop + w * f]


def _upsample_gather(g: np.ndarray, f: int, k: np.ndarray, in_shape) -> np.ndarray:
    n, c, h, w = in_shape
    size = k.shape[0]
    crop = (size - f) // 2
    gp = np.zeros((n, c, h * f, (w - 1) * f + size), dtype=g.dtype)
    gp[:, :, :, crop : crop + w * f] = g
    rows = np.zeros((n, c, h * f, w), dtype=g.dtype)
    for j in range(size):
        rows += k[j] * gp[:, :, :, j : j + (w - 1) * f + 1 : f]
    rp = np.zeros((n, c, (h - 1) * f + size, w), dtype=g.dtype)
    rp[:, :, crop : crop + h * f, :] = rows
    gx = np.zeros((n, c, h, w), dtype=g.dtype)
    for i in range(size):
        gx += k[i] * rp[:, :, i : i + (h - 1) * f + 1 : f, :]
    return gx


def sum_all(x: Tensor) -> Tensor:
    """Reduce a tensor to a scalar (1,1,1,1) by summation."""
    out = x.data.sum(dtype=x.dtype).reshape(1, 1, 1, 1)
    tape = x.tape
    if tape is None:
        return Tensor(out)
    x_id = x.node_id
    shape = x.shape

    def backward(gout, grads):
        accumulate(grads, x_id, np.broadcast_to(gout.reshape(()), shape).copy())

    return _wrap(tape, "sum", out, (x_id,), backward)


def scale(x: Tensor, alpha: float) -> Tensor:
    """Multiply by a python scalar constant."""
    out = x.data * alpha
    tape = x.tape
    if tape is None:
        return Tensor(out)
    x_id = x.node_id

    def backward(gout, grads):
        accumulate(grads, x_id, gout * alpha)

    return _wrap(tape, "scale", out, (x_id,), backward)


def custom_op(name: str, inputs: list[Tensor], out: np.ndarray, backward) -> Tensor:
    """Record an externally computed op (used by the loss primitives).

    `backward(upstream, grads, input_ids)` must scatter gradients for the
    watched inputs via :func:`accumulate`.
    """
    tape = _tape_of(*inputs)
    ids = tuple(t.node_id for t in inputs)
    if tape is None:
        return Tensor(out)

    def bw(gout, grads):
        backward(gout, grads, ids)

    return _wrap(tape, name, out, ids, bw)
