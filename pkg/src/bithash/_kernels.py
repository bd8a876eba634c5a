"""Compiled inner loops.

Everything here works on raw numpy buffers: ``uint64`` word arrays for bit
vectors and ``float32`` arrays for float vectors. Loops write into
caller-provided output buffers and never allocate.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)
_S1 = np.uint64(1)
_S2 = np.uint64(2)
_S4 = np.uint64(4)
_S56 = np.uint64(56)

_JIT = dict(cache=True, nogil=True)


@njit(inline="always")
def popcount64(x):
    # LLVM folds this SWAR sequence into a single popcnt on targets that have it.
    x = x - ((x >> _S1) & _M1)
    x = (x & _M2) + ((x >> _S2) & _M2)
    x = (x + (x >> _S4)) & _M4
    return (x * _H01) >> _S56


@njit(**_JIT)
def popcount_words(w):
    c = np.uint64(0)
    for i in range(w.shape[0]):
        c += popcount64(w[i])
    return int(c)


@njit(**_JIT)
def and_count(a, b):
    c = np.uint64(0)
    for i in range(a.shape[0]):
        c += popcount64(a[i] & b[i])
    return int(c)


@njit(**_JIT)
def or_count(a, b):
    c = np.uint64(0)
    for i in range(a.shape[0]):
        c += popcount64(a[i] | b[i])
    return int(c)


@njit(**_JIT)
def xor_count(a, b):
    c = np.uint64(0)
    for i in range(a.shape[0]):
        c += popcount64(a[i] ^ b[i])
    return int(c)


@njit(inline="always")
def _ochiai(inter, pa, pb):
    if pa == 0 or pb == 0:
        return 0.0
    return inter / math.sqrt(pa * pb)


@njit(inline="always")
def _jaccard(inter, pa, pb):
    union = pa + pb - inter
    if union == 0:
        return 0.0
    return inter / union


@njit(**_JIT)
def ochiai_pair(a, b, pa, pb):
    if pa == 0 or pb == 0:
        return 0.0
    return _ochiai(and_count(a, b), pa, pb)


@njit(**_JIT)
def jaccard_pair(a, b, pa, pb):
    return _jaccard(and_count(a, b), pa, pb)


@njit(**_JIT, fastmath=True)
def cosine_pair(a, b):
    dot = 0.0
    na = 0.0
    nb = 0.0
    for i in range(a.shape[0]):
        x = np.float64(a[i])
        y = np.float64(b[i])
        dot += x * y
        na += x * x
        nb += y * y
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / math.sqrt(na * nb)


# -- one query against many rows ------------------------------------------


@njit(**_JIT)
def ochiai_many(q, pq, rows, pops, out):
    for j in range(rows.shape[0]):
        inter = np.uint64(0)
        for i in range(q.shape[0]):
            inter += popcount64(q[i] & rows[j, i])
        out[j] = _ochiai(int(inter), pq, pops[j])


@njit(**_JIT)
def jaccard_many(q, pq, rows, pops, out):
    for j in range(rows.shape[0]):
        inter = np.uint64(0)
        for i in range(q.shape[0]):
            inter += popcount64(q[i] & rows[j, i])
        out[j] = _jaccard(int(inter), pq, pops[j])


@njit(**_JIT)
def hamming_many(q, pq, rows, pops, out):
    for j in range(rows.shape[0]):
        d = np.uint64(0)
        for i in range(q.shape[0]):
            d += popcount64(q[i] ^ rows[j, i])
        out[j] = np.float64(d)


@njit(**_JIT, fastmath=True)
def cosine_many(q, rows, out):
    for j in range(rows.shape[0]):
        dot = 0.0
        nq = 0.0
        nr = 0.0
        for i in range(q.shape[0]):
            x = np.float64(q[i])
            y = np.float64(rows[j, i])
            dot += x * y
            nq += x * x
            nr += y * y
        out[j] = 0.0 if nq == 0.0 or nr == 0.0 else dot / math.sqrt(nq * nr)


# -- all history rows against all candidate rows, reduced by max ----------


@njit(**_JIT)
def ochiai_max(hist, hpops, cand, cpops, out):
    for j in range(cand.shape[0]):
        best = -np.inf
        for h in range(hist.shape[0]):
            inter = np.uint64(0)
            for i in range(cand.shape[1]):
                inter += popcount64(hist[h, i] & cand[j, i])
            s = _ochiai(int(inter), hpops[h], cpops[j])
            if s > best:
                best = s
        out[j] = best


@njit(**_JIT)
def jaccard_max(hist, hpops, cand, cpops, out):
    for j in range(cand.shape[0]):
        best = -np.inf
        for h in range(hist.shape[0]):
            inter = np.uint64(0)
            for i in range(cand.shape[1]):
                inter += popcount64(hist[h, i] & cand[j, i])
            s = _jaccard(int(inter), hpops[h], cpops[j])
            if s > best:
                best = s
        out[j] = best


@njit(**_JIT)
def neg_hamming_max(hist, hpops, cand, cpops, out):
    for j in range(cand.shape[0]):
        best = -np.inf
        for h in range(hist.shape[0]):
            d = np.uint64(0)
            for i in range(cand.shape[1]):
                d += popcount64(hist[h, i] ^ cand[j, i])
            s = -np.float64(d)
            if s > best:
                best = s
        out[j] = best


@njit(**_JIT, fastmath=True)
def cosine_max(hist, cand, out):
    for j in range(cand.shape[0]):
        best = -np.inf
        for h in range(hist.shape[0]):
            dot = 0.0
            nh = 0.0
            nc = 0.0
            for i in range(cand.shape[1]):
                x = np.float64(hist[h, i])
                y = np.float64(cand[j, i])
                dot += x * y
                nh += x * x
                nc += y * y
            s = 0.0 if nh == 0.0 or nc == 0.0 else dot / math.sqrt(nh * nc)
            if s > best:
                best = s
        out[j] = best


# -- combination -----------------------------------------------------------


@njit(**_JIT)
def or_reduce(rows, out):
    for i in range(rows.shape[1]):
        acc = np.uint64(0)
        for j in range(rows.shape[0]):
            acc |= rows[j, i]
        out[i] = acc
