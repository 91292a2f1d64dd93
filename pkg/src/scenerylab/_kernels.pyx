# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops in ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, int32_t, uint8_t

cnp.import_array()


def multispectrum_dfs(bits, add_table, int arity):
    cdef uint8_t[::1] f = np.ascontiguousarray(bits, dtype=np.uint8)
    cdef int32_t[:, ::1] add = np.ascontiguousarray(add_table, dtype=np.int32)
    cdef Py_ssize_t n = f.shape[0]
    cdef Py_ssize_t i, j, s = 0
    for i in range(n):
        s += f[i]
    if arity == 0 or s == 0:
        if s and arity == 0:
            return np.array([0], dtype=np.int64), np.array([s], dtype=np.int64)
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)

    # alive[d, :cnt[d]] are the current positions after d lags
    cdef int64_t[:, ::1] alive = np.zeros((arity + 1, s), dtype=np.int64)
    cdef int64_t[::1] cnt = np.zeros(arity + 1, dtype=np.int64)
    cdef int64_t[::1] lag = np.zeros(arity + 1, dtype=np.int64)
    cdef int64_t[::1] code = np.zeros(arity + 1, dtype=np.int64)
    j = 0
    for i in range(n):
        if f[i]:
            alive[0, j] = i
            j += 1
    cnt[0] = s

    out_codes = []
    out_counts = []
    cdef Py_ssize_t depth = 0
    cdef int64_t l, p, m, c
    lag[0] = 0
    while depth >= 0:
        l = lag[depth]
        if l >= n:
            depth -= 1
            continue
        lag[depth] = l + 1
        m = 0
        for i in range(cnt[depth]):
            p = add[alive[depth, i], l]
            if f[p]:
                alive[depth + 1, m] = p
                m += 1
        if m == 0:
            continue
        c = code[depth] * n + l
        if depth + 1 == arity:
            out_codes.append(c)
            out_counts.append(m)
        else:
            cnt[depth + 1] = m
            code[depth + 1] = c
            lag[depth + 1] = 0
            depth += 1
    return np.asarray(out_codes, dtype=np.int64), np.asarray(out_counts, dtype=np.int64)


def walk_positions(start, steps, moduli):
    cdef int64_t[::1] st = np.ascontiguousarray(start, dtype=np.int64)
    cdef int64_t[:, ::1] inc = np.ascontiguousarray(steps, dtype=np.int64)
    cdef int64_t[::1] mod = np.ascontiguousarray(moduli, dtype=np.int64)
    cdef Py_ssize_t T = inc.shape[0], r = st.shape[0], t, i
    out_arr = np.empty((T + 1, r), dtype=np.int64)
    cdef int64_t[:, ::1] out = out_arr
    cdef int64_t v
    for i in range(r):
        v = st[i] % mod[i]
        out[0, i] = v + mod[i] if v < 0 else v
    for t in range(T):
        for i in range(r):
            v = (out[t, i] + inc[t, i] % mod[i]) % mod[i]
            out[t + 1, i] = v + mod[i] if v < 0 else v
    return out_arr


def alias_sample(prob, alias, u1, u2):
    cdef double[::1] pr = np.ascontiguousarray(prob, dtype=np.float64)
    cdef int64_t[::1] al = np.ascontiguousarray(alias, dtype=np.int64)
    cdef double[::1] a = np.ascontiguousarray(u1, dtype=np.float64)
    cdef double[::1] b = np.ascontiguousarray(u2, dtype=np.float64)
    cdef Py_ssize_t k = pr.shape[0], m = a.shape[0], t
    out_arr = np.empty(m, dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    cdef int64_t idx
    for t in range(m):
        idx = <int64_t>(a[t] * k)
        if idx > k - 1:
            idx = k - 1
        out[t] = idx if b[t] < pr[idx] else al[idx]
    return out_arr


def lag_batch_sums(obs, int max_lag, int n_batches):
    cdef uint8_t[::1] o = np.ascontiguousarray(obs, dtype=np.uint8)
    cdef Py_ssize_t width = o.shape[0] - max_lag
    cdef Py_ssize_t size = width // n_batches
    out_arr = np.zeros((max_lag + 1, n_batches), dtype=np.int64)
    cdef int64_t[:, ::1] out = out_arr
    cdef Py_ssize_t t, l, bt
    cdef int64_t acc
    for l in range(max_lag + 1):
        for bt in range(n_batches):
            acc = 0
            for t in range(bt * size, (bt + 1) * size):
                acc += o[t] * o[t + l]
            out[l, bt] = acc
    return out_arr
