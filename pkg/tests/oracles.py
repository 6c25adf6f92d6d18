"""Independent reference implementations used only by the tests."""
from __future__ import annotations

from fractions import Fraction


def dense_rank(rows, p=None) -> int:
    """Textbook Gauss-Jordan rank over GF(p) (p given) or the rationals (p None)."""
    M = [[(int(x) % p) if p else Fraction(x) for x in r] for r in rows]
    if not M:
        return 0
    nr, nc = len(M), len(M[0])
    rank = 0
    for c in range(nc):
        piv = next((r for r in range(rank, nr) if M[r][c] != 0), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = pow(M[rank][c], -1, p) if p else 1 / M[rank][c]
        M[rank] = [(x * inv) % p if p else x * inv for x in M[rank]]
        for r in range(nr):
            if r != rank and M[r][c] != 0:
                f = M[r][c]
                M[r] = [((a - f * b) % p) if p else a - f * b for a, b in zip(M[r], M[rank])]
        rank += 1
    return rank
