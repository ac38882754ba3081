"""Finite-difference verification of the tape gradients.

The checker compares the analytic gradient of a scalar-valued builder
against central differences (f(x+eps) - f(x-eps)) / (2 eps) evaluated
coordinate by coordinate, in double precision.
"""

from __future__ import annotations

import numpy as np

from ddsedge.engine.tensor import Tape, Tensor


def grad_check(build, inputs, eps: float = 1e-5, exclude=None) -> float:
    """Max relative error between analytic and numeric gradients.

    Parameters
    ----------
    build : callable(tape, *tensors) -> Tensor
        Constructs the scalar subgraph under test. Called with ``tape=None``
        for the plain function evaluations.
    inputs : sequence of ndarray
        Double-precision leaf values; every coordinate of every input is
        perturbed unless excluded.
    eps : float
        Central-difference step, in (0, 1e-2].
    exclude : optional sequence of bool ndarrays (one per input)
        Coordinates to drop from the comparison (e.g. relu kinks at 0).
    """
    if not (0 < eps <= 1e-2):
        raise ValueError(f"eps must be in (0, 1e-2], got {eps}")
    inputs = [np.asarray(a, dtype=np.float64) for a in inputs]

    tape = Tape()
    leaves = [tape.leaf(a) for a in inputs]
    loss = build(tape, *leaves)
    grads = tape.backward(loss.node_id)

    def f(arrays) -> float:
        return build(None, *[Tensor(a) for a in arrays]).item()

    worst = 0.0
    for idx, arr in enumerate(inputs):
        analytic = grads.get(leaves[idx].node_id)
        if analytic is None:
            analytic = np.zeros_like(arr)
        skip = exclude[idx] if exclude is not None else None
        for coord in np.ndindex(arr.shape):
            if skip is not None and skip[coord]:
                continue
            bumped = [a.copy() if i == idx else a for i, a in enumerate(inputs)]
            bumped[idx][coord] += eps
            fp = f(bumped)
            bumped[idx][coord] -= 2 * eps
            fm = f(bumped)
            numeric = (fp - fm) / (2 * eps)
            a = float(analytic[coord])
            rel = abs(a - numeric) / max(abs(a), abs(numeric), 1.0)
            if rel > worst:
                worst = rel
    return worst
