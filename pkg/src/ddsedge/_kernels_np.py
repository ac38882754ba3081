"""Pure numpy implementations of the hot kernels.

These are the reference implementations; `ddsedge._speedups` provides
compiled equivalents with identical semantics. Backend selection happens
in `ddsedge.backend`.
"""

import numpy as np

BACKEND_NAME = "python"


def im2col(xp, kh, kw, sh, sw, dh, dw, ho, wo):
    """Unfold a padded (N, C, Hp, Wp) array into (N, C*kh*kw, ho*wo) columns.

    Column rows are channel-major: row index = c*(kh*kw) + i*kw + j, so a
    contiguous block of rows corresponds to a contiguous channel slice
    (grouped convolution slices the rows per group).
    """
    n, c, _, _ = xp.shape
    cols = np.empty((n, c, kh * kw, ho * wo), dtype=xp.dtype)
    for i in range(kh):
        for j in range(kw):
            patch = xp[:, :, i * dh : i * dh + sh * ho : sh, j * dw : j * dw + sw * wo : sw]
            cols[:, :, i * kw + j, :] = patch.reshape(n, c, ho * wo)
    return cols.reshape(n, c * kh * kw, ho * wo)


def col2im(cols, n, c, hp, wp, kh, kw, sh, sw, dh, dw, ho, wo):
    """Adjoint of `im2col`: scatter-add columns back into a padded array."""
    xp = np.zeros((n, c, hp, wp), dtype=cols.dtype)
    cols = cols.reshape(n, c, kh * kw, ho, wo)
    for i in range(kh):
        for j in range(kw):
            xp[:, :, i * dh : i * dh + sh * ho : sh, j * dw : j * dw + sw * wo : sw] += cols[
                :, :, i * kw + j
            ]
    return xp


def guo_hall_pass(img, odd):
    """One thinning subiteration; returns (new image, number of deleted pixels).

    `img` is a uint8 0/1 array. Neighbors follow the usual clockwise
    numbering (p2 = north, p3 = north-east, ...). Deletion is applied in
    parallel: conditions are evaluated on the input, then removed at once.
    """
    p = np.pad(img, 1).astype(bool)
    p2 = p[:-2, 1:-1]
    p3 = p[:-2, 2:]
    p4 = p[1:-1, 2:]
    p5 = p[2:, 2:]
    p6 = p[2:, 1:-1]
    p7 = p[2:, :-2]
    p8 = p[1:-1, :-2]
    p9 = p[:-2, :-2]

    c = (
        (~p2 & (p3 | p4)).astype(np.uint8)
        + (~p4 & (p5 | p6))
        + (~p6 & (p7 | p8))
        + (~p8 & (p9 | p2))
    )
    n1 = (p9 | p2).astype(np.uint8) + (p3 | p4) + (p5 | p6) + (p7 | p8)
    n2 = (p2 | p3).astype(np.uint8) + (p4 | p5) + (p6 | p7) + (p8 | p9)
    nmin = np.minimum(n1, n2)
    if odd:
        m = (p2 | p3 | ~p5) & p4
    else:
        m = (p6 | p7 | ~p9) & p8
    delete = img.astype(bool) & (c == 1) & (nmin >= 2) & (nmin <= 3) & ~m
    out = img & ~delete
    return out.astype(np.uint8), int(delete.sum())


def max_bipartite_matching(indptr, indices, n_left, n_right):
    """Maximum-cardinality bipartite matching via augmenting paths.

    The graph is given in CSR form: left node u is adjacent to
    `indices[indptr[u]:indptr[u+1]]`. Returns (size, match_left) where
    match_left[u] is the right node matched to u, or -1.
    """
    match_left = np.full(n_left, -1, dtype=np.int64)
    match_right = np.full(n_right, -1, dtype=np.int64)
    size = 0

    # Greedy warm start resolves almost all vertices on typical edge maps.
    for u in range(n_left):
        for ei in range(indptr[u], indptr[u + 1]):
            v = indices[ei]
            if match_right[v] == -1:
                match_right[v] = u
                match_left[u] = v
                size += 1
                break

    seen = np.zeros(n_right, dtype=bool)
    stack_u = np.empty(n_right + 1, dtype=np.int64)
    stack_ei = np.empty(n_right + 1, dtype=np.int64)
    edge_v = np.empty(n_right + 1, dtype=np.int64)

    for start in range(n_left):
        if match_left[start] != -1:
            continue
        seen[:] = False
        top = 0
        stack_u[0] = start
        stack_ei[0] = indptr[start]
        augmented = False
        while top >= 0 and not augmented:
            u = stack_u[top]
            ei = stack_ei[top]
            pushed = False
            while ei < indptr[u + 1]:
                v = indices[ei]
                ei += 1
                if seen[v]:
                    continue
                seen[v] = True
                if match_right[v] == -1:
                    # Flip the alternating path recorded on the stack.
                    match_right[v] = u
                    match_left[u] = v
                    for t in range(top - 1, -1, -1):
                        vv = edge_v[t]
                        match_right[vv] = stack_u[t]
                        match_left[stack_u[t]] = vv
                    size += 1
                    augmented = True
                    break
                stack_ei[top] = ei
                edge_v[top] = v
                top += 1
                stack_u[top] = match_right[v]
                stack_ei[top] = indptr[match_right[v]]
                pushed = True
                break
            if augmented:
                break
            if not pushed:
                top -= 1
    return size, match_left
