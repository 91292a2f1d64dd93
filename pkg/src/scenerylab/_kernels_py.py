"""Pure numpy implementations of the hot loops; same signatures and outputs as ``_kernels``."""
from __future__ import annotations

import numpy as np


def multispectrum_dfs(bits, add_table, arity):
    """Nonzero entries of the spatial multispectrum.

    ``A(l_1..l_m) = #{k : f(k) = f(k + l_1) = ... = f(k + l_1 + ... + l_m) = 1}``.
    Returns ``(codes, counts)`` with codes in increasing order, where the code
    of a tuple reads it as base-``n`` digits, first lag most significant.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    add = np.asarray(add_table)
    n = bits.shape[0]
    ones = bits.astype(bool)
    codes: list[int] = []
    counts: list[int] = []
    if arity == 0:
        s = int(ones.sum())
        return np.array([0] if s else [], dtype=np.int64), np.array([s] if s else [], dtype=np.int64)
    start = np.flatnonzero(ones)
    if start.size == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    # iterative DFS: stack of (depth, code, alive positions, next lag to try)
    stack = [(0, 0, start, 0)]
    while stack:
        depth, code, pos, lag = stack.pop()
        if lag >= n:
            continue
        stack.append((depth, code, pos, lag + 1))
        moved = add[pos, lag]
        nxt = moved[ones[moved]]
        if nxt.size == 0:
            continue
        c = code * n + lag
        if depth + 1 == arity:
            codes.append(c)
            counts.append(int(nxt.size))
        else:
            stack.append((depth + 1, c, nxt, 0))
    return np.asarray(codes, dtype=np.int64), np.asarray(counts, dtype=np.int64)


def walk_positions(start, steps, moduli):
    """Coordinates of a walk: ``pos[0] = start``, ``pos[t+1] = pos[t] + steps[t]`` mod ``moduli``.

    ``start`` has shape ``(r,)``, ``steps`` ``(T, r)``; the result is ``(T + 1, r)`` int64.
    """
    start = np.asarray(start, dtype=np.int64)
    steps = np.asarray(steps, dtype=np.int64)
    mod = np.asarray(moduli, dtype=np.int64)
    out = np.empty((steps.shape[0] + 1, start.shape[0]), dtype=np.int64)
    out[0] = start % mod
    # chunk so that partial sums cannot overflow int64
    chunk = max(1, int((2**62) // max(1, int(mod.max()))))
    cur = out[0].copy()
    for lo in range(0, steps.shape[0], chunk):
        block = steps[lo : lo + chunk] % mod
        acc = (np.cumsum(block, axis=0) + cur) % mod
        out[lo + 1 : lo + 1 + block.shape[0]] = acc
        if block.shape[0]:
            cur = acc[-1]
    return out


def alias_sample(prob, alias, u1, u2):
    """Walker alias draws: column ``floor(u1 * K)``, kept if ``u2 < prob`` else its alias."""
    prob = np.asarray(prob, dtype=np.float64)
    alias = np.asarray(alias, dtype=np.int64)
    k = prob.shape[0]
    idx = np.minimum((np.asarray(u1) * k).astype(np.int64), k - 1)
    keep = np.asarray(u2) < prob[idx]
    return np.where(keep, idx, alias[idx])


def lag_batch_sums(obs, max_lag, n_batches):
    """``out[l, b] = sum_{t in batch b} obs[t] * obs[t + l]`` over the window ``t < len(obs) - max_lag``.

    The window is cut into ``n_batches`` equal batches (the remainder is dropped).
    """
    obs = np.asarray(obs, dtype=np.uint8)
    width = obs.shape[0] - max_lag
    size = width // n_batches
    used = size * n_batches
    out = np.zeros((max_lag + 1, n_batches), dtype=np.int64)
    head = obs[:used].astype(np.int64)
    for lag in range(max_lag + 1):
        prod = head * obs[lag : lag + used]
        out[lag] = prod.reshape(n_batches, size).sum(axis=1)
    return out
