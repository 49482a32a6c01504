"""Pure numpy fallback for ``lattab._kernels``.

Same signatures and the same point sets/ordering as the compiled module.
Accumulation uses ``math.fsum`` (exactly rounded) instead of Neumaier, so
values agree with the compiled path to a few ulps rather than bitwise.
"""

import math

import numpy as np


def quad_values(pts, G):
    G = np.asarray(G, dtype=float)
    m = pts[:, 0].astype(float)
    n = pts[:, 1].astype(float)
    p = pts[:, 2].astype(float)
    return G[0, 0] * m * m + G[1, 1] * n * n + G[2, 2] * p * p + 2.0 * (
        G[0, 1] * m * n + G[0, 2] * m * p + G[1, 2] * n * p
    )


def ball_points(G, cutoff):
    G = np.ascontiguousarray(G, dtype=float)
    inv = np.linalg.inv(G)
    lim = cutoff + 1e-9 * cutoff + 1e-300
    bounds = [int(math.floor(math.sqrt(max(lim * inv[i, i], 0.0)))) for i in range(3)]
    ms = np.arange(-bounds[0], bounds[0] + 1)
    ns = np.arange(-bounds[1], bounds[1] + 1)
    nn, mm = np.meshgrid(ns, ms, indexing="ij")
    nn = nn.ravel()
    mm = mm.ravel()
    chunks = []
    for p in range(-bounds[2], bounds[2] + 1):
        pts = np.column_stack([mm, nn, np.full_like(mm, p)])
        q = quad_values(pts, G)
        keep = q <= cutoff
        if p == 0:
            keep &= (mm != 0) | (nn != 0)
        if keep.any():
            chunks.append(pts[keep])
    if not chunks:
        return np.empty((0, 3), dtype=np.int64)
    return np.ascontiguousarray(np.concatenate(chunks), dtype=np.int64)


def compensated_sum(x):
    return math.fsum(np.asarray(x, dtype=float).tolist())


def compensated_dot(w, f):
    w = np.asarray(w, dtype=float)
    f = np.asarray(f, dtype=float)
    if w.shape != f.shape:
        raise ValueError("length mismatch")
    return math.fsum((w * f).tolist())


def jet_sums(pts, D, D2, g1, g2):
    D = np.asarray(D, dtype=float).reshape(-1, 3, 3)
    nd = D.shape[0]
    q = np.stack([quad_values(pts, D[i]) for i in range(nd)], axis=1) if nd else np.zeros((len(pts), 0))
    g1 = np.asarray(g1, dtype=float)
    s1 = np.array([compensated_dot(g1, q[:, i]) for i in range(nd)])
    if D2 is None:
        return s1, None
    D2 = np.asarray(D2, dtype=float).reshape(nd, nd, 3, 3)
    g2 = np.asarray(g2, dtype=float)
    s2 = np.empty((nd, nd))
    for i in range(nd):
        for j in range(i, nd):
            term = g2 * q[:, i] * q[:, j] + g1 * quad_values(pts, D2[i, j])
            s2[i, j] = s2[j, i] = compensated_sum(term)
    return s1, s2
