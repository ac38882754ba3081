# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: unfold/fold for convolution, thinning subiteration,
and the augmenting-path matcher. Semantics mirror `ddsedge._kernels_np`
exactly; tests run against both backends.
"""

import numpy as np

cimport cython
cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "cython"

ctypedef fused real:
    float
    double


def im2col(real[:, :, :, ::1] xp, int kh, int kw, int sh, int sw,
           int dh, int dw, int ho, int wo):
    cdef Py_ssize_t n = xp.shape[0]
    cdef Py_ssize_t c = xp.shape[1]
    out_np = np.empty((n, c * kh * kw, ho * wo),
                      dtype=np.float32 if real is float else np.float64)
    cdef real[:, :, ::1] cols = out_np
    cdef Py_ssize_t b, ch, i, j, oy, ox, row
    with nogil:
        for b in range(n):
            for ch in range(c):
                for i in range(kh):
                    for j in range(kw):
                        row = ch * kh * kw + i * kw + j
                        for oy in range(ho):
                            for ox in range(wo):
                                cols[b, row, oy * wo + ox] = xp[
                                    b, ch, oy * sh + i * dh, ox * sw + j * dw]
    return out_np


def col2im(real[:, :, ::1] cols, int n, int c, int hp, int wp,
           int kh, int kw, int sh, int sw, int dh, int dw, int ho, int wo):
    out_np = np.zeros((n, c, hp, wp),
                      dtype=np.float32 if real is float else np.float64)
    cdef real[:, :, :, ::1] xp = out_np
    cdef Py_ssize_t b, ch, i, j, oy, ox, row
    with nogil:
        for b in range(n):
            for ch in range(c):
                for i in range(kh):
                    for j in range(kw):
                        row = ch * kh * kw + i * kw + j
                        for oy in range(ho):
                            for ox in range(wo):
                                xp[b, ch, oy * sh + i * dh, ox * sw + j * dw] += cols[
                                    b, row, oy * wo + ox]
    return out_np


def guo_hall_pass(cnp.uint8_t[:, ::1] img, bint odd):
    cdef Py_ssize_t h = img.shape[0]
    cdef Py_ssize_t w = img.shape[1]
    out_np = np.asarray(img).copy()
    cdef cnp.uint8_t[:, ::1] out = out_np
    cdef Py_ssize_t y, x
    cdef int p2, p3, p4, p5, p6, p7, p8, p9, c, n1, n2, nmin, m
    cdef long deleted = 0
    with nogil:
        for y in range(h):
            for x in range(w):
                if img[y, x] == 0:
                    continue
                p2 = img[y - 1, x] if y > 0 else 0
                p3 = img[y - 1, x + 1] if (y > 0 and x < w - 1) else 0
                p4 = img[y, x + 1] if x < w - 1 else 0
                p5 = img[y + 1, x + 1] if (y < h - 1 and x < w - 1) else 0
                p6 = img[y + 1, x] if y < h - 1 else 0
                p7 = img[y + 1, x - 1] if (y < h - 1 and x > 0) else 0
                p8 = img[y, x - 1] if x > 0 else 0
                p9 = img[y - 1, x - 1] if (y > 0 and x > 0) else 0
                c = ((1 - p2) * (p3 | p4) + (1 - p4) * (p5 | p6)
                     + (1 - p6) * (p7 | p8) + (1 - p8) * (p9 | p2))
                if c != 1:
                    continue
                n1 = (p9 | p2) + (p3 | p4) + (p5 | p6) + (p7 | p8)
                n2 = (p2 | p3) + (p4 | p5) + (p6 | p7) + (p8 | p9)
                nmin = n1 if n1 < n2 else n2
                if nmin < 2 or nmin > 3:
                    continue
                if odd:
                    m = (p2 | p3 | (1 - p5)) & p4
                else:
                    m = (p6 | p7 | (1 - p9)) & p8
                if m == 0:
                    out[y, x] = 0
                    deleted += 1
    return out_np, deleted


def max_bipartite_matching(long[::1] indptr, long[::1] indices,
                           long n_left, long n_right):
    match_left_np = np.full(n_left, -1, dtype=np.int64)
    cdef long[::1] match_left = match_left_np
    cdef long[::1] match_right = np.full(n_right, -1, dtype=np.int64)
    cdef cnp.uint8_t[::1] seen = np.zeros(n_right, dtype=np.uint8)
    cdef long[::1] stack_u = np.empty(n_right + 1, dtype=np.int64)
    cdef long[::1] stack_ei = np.empty(n_right + 1, dtype=np.int64)
    cdef long[::1] edge_v = np.empty(n_right + 1, dtype=np.int64)
    cdef long size = 0
    cdef long u, v, vv, ei, start, top, t
    cdef bint augmented, pushed

    with nogil:
        for u in range(n_left):
            for ei in range(indptr[u], indptr[u + 1]):
                v = indices[ei]
                if match_right[v] == -1:
                    match_right[v] = u
                    match_left[u] = v
                    size += 1
                    break

        for start in range(n_left):
            if match_left[start] != -1:
                continue
            for v in range(n_right):
                seen[v] = 0
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
                    seen[v] = 1
                    if match_right[v] == -1:
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
    return size, match_left_np
