# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: ball enumeration and compensated accumulation.

Every routine here has a numpy twin in ``_kernels_py`` with the same
signature; ``lattab._backend`` picks one at import time.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, floor, ceil, fabs

cnp.import_array()


cdef inline double _quad(const double[:, ::1] G, double m, double n, double p) noexcept nogil:
    # canonical evaluation order, shared with the numpy fallback
    return (G[0, 0] * m * m + G[1, 1] * n * n + G[2, 2] * p * p
            + 2.0 * (G[0, 1] * m * n + G[0, 2] * m * p + G[1, 2] * n * p))


cdef inline void _neumaier(double *s, double *c, double x) noexcept nogil:
    cdef double t = s[0] + x
    if fabs(s[0]) >= fabs(x):
        c[0] += (s[0] - t) + x
    else:
        c[0] += (x - t) + s[0]
    s[0] = t


cdef Py_ssize_t _enumerate(const double[:, ::1] G, double cutoff, long long[:, ::1] out, bint fill) noexcept nogil:
    cdef double d1 = G[0, 0]
    cdef double a = G[0, 1] / d1
    cdef double b = G[0, 2] / d1
    cdef double s00 = G[1, 1] - G[0, 1] * G[0, 1] / d1
    cdef double s01 = G[1, 2] - G[0, 1] * G[0, 2] / d1
    cdef double s11 = G[2, 2] - G[0, 2] * G[0, 2] / d1
    cdef double d2 = s00
    cdef double c = s01 / s00
    cdef double d3 = s11 - s01 * s01 / s00
    cdef double slack = 1e-9 * cutoff + 1e-300
    cdef double lim = cutoff + slack
    cdef long long pmax = <long long>floor(sqrt(lim / d3))
    cdef long long p, n, m, n0, n1, m0, m1
    cdef double r3, r2, w, ctr
    cdef Py_ssize_t count = 0
    for p in range(-pmax, pmax + 1):
        r3 = lim - d3 * p * p
        if r3 < 0:
            continue
        w = sqrt(r3 / d2)
        ctr = -c * p
        n0 = <long long>ceil(ctr - w)
        n1 = <long long>floor(ctr + w)
        for n in range(n0, n1 + 1):
            r2 = r3 - d2 * (n + c * p) * (n + c * p)
            if r2 < 0:
                continue
            w = sqrt(r2 / d1)
            ctr = -(a * n + b * p)
            m0 = <long long>ceil(ctr - w)
            m1 = <long long>floor(ctr + w)
            for m in range(m0, m1 + 1):
                if m == 0 and n == 0 and p == 0:
                    continue
                if _quad(G, <double>m, <double>n, <double>p) <= cutoff:
                    if fill:
                        out[count, 0] = m
                        out[count, 1] = n
                        out[count, 2] = p
                    count += 1
    return count


def ball_points(G, double cutoff):
    """Nonzero integer triples with ``k^T G k <= cutoff``, ordered by (p, n, m)."""
    cdef const double[:, ::1] Gv = np.ascontiguousarray(G, dtype=np.float64)
    cdef long long[:, ::1] dummy = np.empty((1, 3), dtype=np.int64)
    cdef Py_ssize_t count
    with nogil:
        count = _enumerate(Gv, cutoff, dummy, False)
    out = np.empty((count, 3), dtype=np.int64)
    cdef long long[:, ::1] ov = out
    if count:
        with nogil:
            _enumerate(Gv, cutoff, ov, True)
    return out


def quad_values(pts, G):
    cdef const long long[:, ::1] P = np.ascontiguousarray(pts, dtype=np.int64)
    cdef const double[:, ::1] Gv = np.ascontiguousarray(G, dtype=np.float64)
    cdef Py_ssize_t i, N = P.shape[0]
    out = np.empty(N, dtype=np.float64)
    cdef double[::1] ov = out
    with nogil:
        for i in range(N):
            ov[i] = _quad(Gv, <double>P[i, 0], <double>P[i, 1], <double>P[i, 2])
    return out


def compensated_sum(x):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double s = 0.0, c = 0.0
    cdef Py_ssize_t i
    with nogil:
        for i in range(xv.shape[0]):
            _neumaier(&s, &c, xv[i])
    return s + c


def compensated_dot(w, f):
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef const double[::1] fv = np.ascontiguousarray(f, dtype=np.float64)
    cdef double s = 0.0, c = 0.0
    cdef Py_ssize_t i
    if wv.shape[0] != fv.shape[0]:
        raise ValueError("length mismatch")
    with nogil:
        for i in range(wv.shape[0]):
            _neumaier(&s, &c, wv[i] * fv[i])
    return s + c


def jet_sums(pts, D, D2, g1, g2):
    """Directional derivative sums of ``sum_k g(k^T G k)``.

    ``s1[i] = sum g1 * q_i`` and ``s2[i, j] = sum g2 * q_i * q_j + g1 * q_ij``
    with ``q_i = k^T D[i] k`` and ``q_ij = k^T D2[i, j] k``.  ``D2`` may be
    None (first order only, ``s2`` is then None).
    """
    cdef const long long[:, ::1] P = np.ascontiguousarray(pts, dtype=np.int64)
    cdef const double[:, :, ::1] Dv = np.ascontiguousarray(D, dtype=np.float64).reshape(-1, 3, 3)
    cdef Py_ssize_t nd = Dv.shape[0]
    cdef bint second = D2 is not None
    cdef const double[:, :, :, ::1] D2v
    if second:
        D2v = np.ascontiguousarray(D2, dtype=np.float64).reshape(nd, nd, 3, 3)
    else:
        D2v = np.zeros((1, 1, 3, 3))
    cdef const double[::1] g1v = np.ascontiguousarray(g1, dtype=np.float64)
    cdef const double[::1] g2v = np.ascontiguousarray(g2 if second else g1, dtype=np.float64)
    cdef Py_ssize_t N = P.shape[0]
    acc1 = np.zeros((nd, 2))
    acc2 = np.zeros((nd, nd, 2))
    q = np.empty(nd)
    cdef double[:, ::1] a1 = acc1
    cdef double[:, :, ::1] a2 = acc2
    cdef double[::1] qv = q
    cdef Py_ssize_t t, i, j
    cdef double m, n, p, term
    with nogil:
        for t in range(N):
            m = <double>P[t, 0]
            n = <double>P[t, 1]
            p = <double>P[t, 2]
            for i in range(nd):
                qv[i] = _quad(Dv[i], m, n, p)
                _neumaier(&a1[i, 0], &a1[i, 1], g1v[t] * qv[i])
            if second:
                for i in range(nd):
                    for j in range(i, nd):
                        term = g2v[t] * qv[i] * qv[j] + g1v[t] * _quad(D2v[i, j], m, n, p)
                        _neumaier(&a2[i, j, 0], &a2[i, j, 1], term)
    s1 = acc1[:, 0] + acc1[:, 1]
    if not second:
        return s1, None
    s2 = acc2[:, :, 0] + acc2[:, :, 1]
    iu = np.triu_indices(nd, 1)
    s2[iu[1], iu[0]] = s2[iu]
    return s1, s2
