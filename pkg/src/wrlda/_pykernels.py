"""Pure numpy implementations of the hot kernels.

These mirror ``_kernels.pyx`` function for function and are used when the
compiled extension is missing or ``WRLDA_PURE_PYTHON`` is set.
"""
import numpy as np

_SHIFT = 10.0
_SPLIT = 134217729.0  # 2**27 + 1


def _check_domain(x):
    if not np.all(x > 0):
        bad = x[~(x > 0)].ravel()[0]
        raise ValueError(f"digamma/trigamma domain error: x={bad!r} must be > 0")


def _split(a):
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def _recip_dd(x):
    """1/x as an unevaluated sum hi + lo (Dekker two-product residual)."""
    hi = 1.0 / x
    ah, al = _split(hi)
    bh, bl = _split(x)
    p = hi * x
    q = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    lo = ((1.0 - p) - q) / x
    return hi, lo


def _digamma_asym(s):
    z = 1.0 / (s * s)
    tail = z * (1.0 / 12 - z * (1.0 / 120 - z * (1.0 / 252 - z * (
        1.0 / 240 - z * (1.0 / 132 - z * (691.0 / 32760 - z / 12))))))
    return np.log(s) - 0.5 / s - tail


def _trigamma_asym(s):
    r = 1.0 / s
    z = r * r
    tail = z * (1.0 / 6 - z * (1.0 / 30 - z * (1.0 / 42 - z * (
        1.0 / 30 - z * (5.0 / 66 - z * (691.0 / 2730 - z * 7.0 / 6))))))
    return r + 0.5 * z + r * tail


def digamma(x):
    x = np.asarray(x, dtype=np.float64)
    _check_domain(x)
    s = x.copy()
    small = s < _SHIFT
    # the leading reciprocal dominates for tiny x; keep it in double-double
    first_hi = np.zeros_like(s)
    first_lo = np.zeros_like(s)
    if np.any(small):
        hi, lo = _recip_dd(s[small])
        first_hi[small] = hi
        first_lo[small] = lo
        s[small] += 1.0
    rest = np.zeros_like(s)
    while True:
        small = s < _SHIFT
        if not np.any(small):
            break
        rest[small] += 1.0 / s[small]
        s[small] += 1.0
    out = ((_digamma_asym(s) - rest) - first_lo) - first_hi
    return out if out.ndim else float(out)


def trigamma(x):
    x = np.asarray(x, dtype=np.float64)
    _check_domain(x)
    s = x.copy()
    acc = np.zeros_like(s)
    while True:
        small = s < _SHIFT
        if not np.any(small):
            break
        acc[small] += 1.0 / (s[small] * s[small])
        s[small] += 1.0
    out = _trigamma_asym(s) + acc
    return out if out.ndim else float(out)


def e_step_corpus(doc_ptr, word_ids, counts, alpha, log_beta, tol, max_iter, gamma_init=None):
    """Coordinate ascent on (gamma, phi) for every document.

    gamma starts at ``alpha + N_d / K`` unless ``gamma_init`` (M x K) is given.

    Returns ``(gamma, phi, beta_num, iters, bad_doc)``; ``bad_doc`` is -1 on
    success, otherwise the index of the first document whose updates went
    non-finite (outputs past it are undefined).
    """
    n_docs = doc_ptr.shape[0] - 1
    n_topics, n_words = log_beta.shape
    if gamma_init is not None and gamma_init.shape != (n_docs, n_topics):
        raise ValueError("gamma_init has the wrong shape")
    gamma = np.empty((n_docs, n_topics))
    phi = np.empty((word_ids.shape[0], n_topics))
    beta_num = np.zeros((n_topics, n_words))
    iters = np.zeros(n_docs, dtype=np.int64)

    for d in range(n_docs):
        start, stop = doc_ptr[d], doc_ptr[d + 1]
        ids = word_ids[start:stop]
        cts = counts[start:stop]
        lb = log_beta[:, ids].T
        g = alpha + cts.sum() / n_topics if gamma_init is None else gamma_init[d].copy()
        for it in range(max_iter):
            logp = lb + digamma(g)
            logp -= logp.max(axis=1, keepdims=True)
            p = np.exp(logp)
            p /= p.sum(axis=1, keepdims=True)
            new_g = alpha + cts @ p
            change = np.mean(np.abs(new_g - g))
            g = new_g
            if not np.isfinite(change):
                return gamma, phi, beta_num, iters, d
            if change < tol:
                break
        iters[d] = it + 1
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(g))):
            return gamma, phi, beta_num, iters, d
        gamma[d] = g
        phi[start:stop] = p
        beta_num[:, ids] += (cts[:, None] * p).T
    return gamma, phi, beta_num, iters, -1
