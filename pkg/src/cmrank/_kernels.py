"""Dense elimination kernels (numba).  Both destroy their input."""
from __future__ import annotations

import numba
import numpy as np


@numba.njit(cache=True)
def gf2_rank_packed(m: np.ndarray, ncols: int) -> int:
    """Rank of a GF(2) matrix stored as rows of 64-bit words (bit j of word w is column 64w+j)."""
    nrows, nwords = m.shape
    rank = 0
    for col in range(ncols):
        if rank == nrows:
            break
        w = col >> 6
        bit = np.uint64(1) << np.uint64(col & 63)
        piv = -1
        for r in range(rank, nrows):
            if m[r, w] & bit:
                piv = r
                break
        if piv < 0:
            continue
        if piv != rank:
            for k in range(w, nwords):
                tmp = m[piv, k]
                m[piv, k] = m[rank, k]
                m[rank, k] = tmp
        for r in range(piv + 1, nrows):
            if m[r, w] & bit:
                for k in range(w, nwords):
                    m[r, k] ^= m[rank, k]
        rank += 1
    return rank


@numba.njit(cache=True)
def _inv_mod(a: int, p: int) -> int:
    t, newt, r, newr = 0, 1, p, a
    while newr != 0:
        q = r // newr
        t, newt = newt, t - q * newt
        r, newr = newr, r - q * newr
    return t % p


@numba.njit(cache=True)
def gfp_rank_dense(m: np.ndarray, p: int) -> int:
    """Rank over GF(p) of an int64 matrix with entries already reduced to [0, p)."""
    nrows, ncols = m.shape
    rank = 0
    for col in range(ncols):
        if rank == nrows:
            break
        piv = -1
        for r in range(rank, nrows):
            if m[r, col] != 0:
                piv = r
                break
        if piv < 0:
            continue
        if piv != rank:
            for k in range(col, ncols):
                tmp = m[piv, k]
                m[piv, k] = m[rank, k]
                m[rank, k] = tmp
        iv = _inv_mod(m[rank, col], p)
        for k in range(col, ncols):
            m[rank, k] = m[rank, k] * iv % p
        for r in range(rank + 1, nrows):
            f = m[r, col]
            if f != 0:
                for k in range(col, ncols):
                    m[r, k] = (m[r, k] - f * m[rank, k]) % p
        rank += 1
    return rank


def pack_gf2(dense: np.ndarray) -> np.ndarray:
    """Pack a 0/1 (nrows, ncols) array into (nrows, ceil(ncols/64)) uint64 words."""
    nrows, ncols = dense.shape
    nwords = max(1, (ncols + 63) // 64)
    padded = np.zeros((nrows, nwords * 64), dtype=np.uint8)
    padded[:, :ncols] = dense & 1
    bytes_ = np.packbits(padded, axis=1, bitorder="little")
    return bytes_.view("<u8").astype(np.uint64, copy=True).reshape(nrows, nwords)
