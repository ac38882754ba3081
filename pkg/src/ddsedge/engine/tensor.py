"""Dense 4-D tensors and the reverse-mode gradient tape.

A :class:`Tensor` is an immutable (batch, channels, height, width) array
that may carry a handle into a :class:`Tape`. Operations in
:mod:`ddsedge.engine.ops` record themselves on the tape of their inputs;
:meth:`Tape.backward` walks the recording in reverse and accumulates
gradients into a ``node_id -> ndarray`` map.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class ShapeError(ValueError):
    """Raised when tensor shapes violate an operation's contract."""


class Tensor:
    """Dense (N, C, H, W) value, optionally tracked on a tape."""

    __slots__ = ("data", "tape", "node_id")

    def __init__(self, data, tape: "Tape | None" = None, node_id: int | None = None):
        arr = np.asarray(data)
        if arr.ndim != 4:
            raise ShapeError(f"tensor must be 4-D (N, C, H, W), got ndim={arr.ndim}")
        if min(arr.shape) < 1:
            axis = int(np.argmin(arr.shape))
            raise ShapeError(f"tensor axis {axis} has non-positive extent {arr.shape[axis]}")
        self.data = arr
        self.tape = tape
        self.node_id = node_id

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def __repr__(self):
        tag = f", node={self.node_id}" if self.node_id is not None else ""
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}{tag})"


@dataclass
class Node:
    op: str
    inputs: tuple[int, ...]
    # backward(upstream_grad, grads_by_node_id) -> None; None for leaves
    backward: Callable[[np.ndarray, dict[int, np.ndarray]], None] | None
    shape: tuple[int, ...]
    dtype: np.dtype
    scope: str


@dataclass
class Tape:
    """Ordered recording of operations, topological by construction."""

    nodes: list[Node] = field(default_factory=list)
    _scopes: list[str] = field(default_factory=list)

    @contextmanager
    def scope(self, name: str):
        """Label nodes recorded inside the block; used for graph-route queries."""
        self._scopes.append(name)
        try:
            yield
        finally:
            self._scopes.pop()

    def _current_scope(self) -> str:
        return "/".join(self._scopes)

    def leaf(self, data) -> Tensor:
        """Register a watched leaf (parameter or input) on this tape."""
        arr = data.data if isinstance(data, Tensor) else np.asarray(data)
        node_id = len(self.nodes)
        self.nodes.append(Node("leaf", (), None, arr.shape, arr.dtype, self._current_scope()))
        return Tensor(arr, tape=self, node_id=node_id)

    def record(self, op: str, inputs: tuple[int, ...], backward, out: np.ndarray) -> int:
        node_id = len(self.nodes)
        for i in inputs:
            assert i < node_id, "graph must be acyclic: inputs precede their node"
        self.nodes.append(
            Node(op, inputs, backward, tuple(out.shape), out.dtype, self._current_scope())
        )
        return node_id

    def backward(self, loss_node: int) -> dict[int, np.ndarray]:
        """Gradients of a scalar node w.r.t. every reachable watched leaf.

        Accumulation over multiple uses of a node is by summation. The
        returned map also includes gradients of intermediate nodes that
        were touched on the reverse sweep.
        """
        node = self.nodes[loss_node]
        if tuple(node.shape) != (1, 1, 1, 1):
            raise ShapeError(f"backward needs a scalar (1,1,1,1) loss, got {node.shape}")
        grads: dict[int, np.ndarray] = {loss_node: np.ones((1, 1, 1, 1), dtype=node.dtype)}
        for nid in range(loss_node, -1, -1):
            if nid not in grads:
                continue
            n = self.nodes[nid]
            if n.backward is not None:
                n.backward(grads[nid], grads)
        for nid, g in grads.items():
            assert g.shape == tuple(self.nodes[nid].shape), (
                f"gradient shape {g.shape} != node shape for node {nid}"
            )
        return grads

    def reachable_leaves(self, node_id: int, blocked_scope_prefixes: tuple[str, ...] = ()) -> set[int]:
        """Leaf node ids reachable backwards from `node_id`.

        Traversal refuses to enter nodes whose scope starts with any of the
        blocked prefixes, which answers "does any path avoid this scope".
        """
        seen: set[int] = set()
        stack = [node_id]
        leaves: set[int] = set()
        while stack:
            nid = stack.pop()
            if nid in seen:
                continue
            seen.add(nid)
            node = self.nodes[nid]
            if any(node.scope.startswith(p) for p in blocked_scope_prefixes):
                continue
            if node.backward is None and node.op == "leaf":
                leaves.add(nid)
            stack.extend(node.inputs)
        return leaves


def accumulate(grads: dict[int, np.ndarray], node_id: int | None, g: np.ndarray):
    """Sum a gradient contribution into the map (no-op for constants)."""
    if node_id is None:
        return
    if node_id in grads:
        grads[node_id] = grads[node_id] + g
    else:
        grads[node_id] = g
