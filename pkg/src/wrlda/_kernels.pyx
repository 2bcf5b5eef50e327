# cython: language_level=3
"""Compiled kernels: digamma/trigamma and the corpus E-step.

Same contracts as ``wrlda._pykernels``.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, exp, fabs, isfinite

cnp.import_array()

cdef double _SHIFT = 10.0
cdef double _SPLIT = 134217729.0


cdef inline double _digamma(double x) noexcept nogil:
    cdef double hi, lo, ah, al, bh, bl, c, p, q, s, rest, z, tail
    hi = 0.0
    lo = 0.0
    s = x
    if s < _SHIFT:
        hi = 1.0 / s
        c = _SPLIT * hi
        ah = c - (c - hi)
        al = hi - ah
        c = _SPLIT * s
        bh = c - (c - s)
        bl = s - bh
        p = hi * s
        q = ((ah * bh - p) + ah * bl + al * bh) + al * bl
        lo = ((1.0 - p) - q) / s
        s += 1.0
    rest = 0.0
    while s < _SHIFT:
        rest += 1.0 / s
        s += 1.0
    z = 1.0 / (s * s)
    tail = z * (1.0 / 12 - z * (1.0 / 120 - z * (1.0 / 252 - z * (
        1.0 / 240 - z * (1.0 / 132 - z * (691.0 / 32760 - z / 12))))))
    return (((log(s) - 0.5 / s - tail) - rest) - lo) - hi


cdef inline double _trigamma(double x) noexcept nogil:
    cdef double s = x, acc = 0.0, r, z, tail
    while s < _SHIFT:
        acc += 1.0 / (s * s)
        s += 1.0
    r = 1.0 / s
    z = r * r
    tail = z * (1.0 / 6 - z * (1.0 / 30 - z * (1.0 / 42 - z * (
        1.0 / 30 - z * (5.0 / 66 - z * (691.0 / 2730 - z * 7.0 / 6))))))
    return (r + 0.5 * z + r * tail) + acc


def _check_domain(cnp.ndarray x):
    if not np.all(x > 0):
        bad = x[~(x > 0)].ravel()[0]
        raise ValueError(f"digamma/trigamma domain error: x={bad!r} must be > 0")


def digamma(x):
    cdef cnp.ndarray[double, ndim=1] flat
    cdef cnp.ndarray[double, ndim=1] res
    cdef Py_ssize_t i, n
    arr = np.asarray(x, dtype=np.float64)
    _check_domain(arr)
    flat = np.ascontiguousarray(arr.ravel())
    n = flat.shape[0]
    res = np.empty(n)
    with nogil:
        for i in range(n):
            res[i] = _digamma(flat[i])
    if arr.ndim == 0:
        return float(res[0])
    return res.reshape(arr.shape)


def trigamma(x):
    cdef cnp.ndarray[double, ndim=1] flat
    cdef cnp.ndarray[double, ndim=1] res
    cdef Py_ssize_t i, n
    arr = np.asarray(x, dtype=np.float64)
    _check_domain(arr)
    flat = np.ascontiguousarray(arr.ravel())
    n = flat.shape[0]
    res = np.empty(n)
    with nogil:
        for i in range(n):
            res[i] = _trigamma(flat[i])
    if arr.ndim == 0:
        return float(res[0])
    return res.reshape(arr.shape)


def e_step_corpus(const long long[::1] doc_ptr, const long long[::1] word_ids,
                  const double[::1] counts, const double[::1] alpha,
                  const double[:, ::1] log_beta, double tol, long long max_iter,
                  const double[:, ::1] gamma_init=None):
    cdef Py_ssize_t n_docs = doc_ptr.shape[0] - 1
    cdef Py_ssize_t n_topics = log_beta.shape[0]
    cdef Py_ssize_t n_words = log_beta.shape[1]
    cdef Py_ssize_t nnz = word_ids.shape[0]

    gamma_arr = np.empty((n_docs, n_topics))
    phi_arr = np.empty((nnz, n_topics))
    num_arr = np.zeros((n_topics, n_words))
    iters_arr = np.zeros(n_docs, dtype=np.int64)
    cdef double[:, ::1] gamma = gamma_arr
    cdef double[:, ::1] phi = phi_arr
    cdef double[:, ::1] beta_num = num_arr
    cdef long long[::1] iters = iters_arr

    cdef double[::1] g = np.empty(n_topics)
    cdef double[::1] new_g = np.empty(n_topics)
    cdef double[::1] elog = np.empty(n_topics)
    cdef Py_ssize_t d, n, k, start, stop, w
    cdef long long it
    cdef double total, mx, norm, v, change, c
    cdef Py_ssize_t bad = -1
    cdef bint warm = gamma_init is not None
    if warm and (gamma_init.shape[0] != n_docs or gamma_init.shape[1] != n_topics):
        raise ValueError("gamma_init has the wrong shape")

    with nogil:
        for d in range(n_docs):
            start = doc_ptr[d]
            stop = doc_ptr[d + 1]
            total = 0.0
            for n in range(start, stop):
                total += counts[n]
            for k in range(n_topics):
                if warm:
                    g[k] = gamma_init[d, k]
                else:
                    g[k] = alpha[k] + total / n_topics
            it = 0
            while it < max_iter:
                it += 1
                for k in range(n_topics):
                    elog[k] = _digamma(g[k])
                    new_g[k] = alpha[k]
                for n in range(start, stop):
                    w = word_ids[n]
                    mx = log_beta[0, w] + elog[0]
                    for k in range(1, n_topics):
                        v = log_beta[k, w] + elog[k]
                        if v > mx:
                            mx = v
                    norm = 0.0
                    for k in range(n_topics):
                        v = exp(log_beta[k, w] + elog[k] - mx)
                        phi[n, k] = v
                        norm += v
                    c = counts[n]
                    for k in range(n_topics):
                        phi[n, k] = phi[n, k] / norm
                        new_g[k] += c * phi[n, k]
                change = 0.0
                for k in range(n_topics):
                    change += fabs(new_g[k] - g[k])
                    g[k] = new_g[k]
                change /= n_topics
                if not isfinite(change):
                    bad = d
                    break
                if change < tol:
                    break
            if bad >= 0:
                break
            iters[d] = it
            for k in range(n_topics):
                gamma[d, k] = g[k]
            for n in range(start, stop):
                w = word_ids[n]
                c = counts[n]
                for k in range(n_topics):
                    beta_num[k, w] += c * phi[n, k]
    return gamma_arr, phi_arr, num_arr, iters_arr, bad
