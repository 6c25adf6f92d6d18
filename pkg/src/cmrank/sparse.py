"""Exact sparse matrices over a field, rank, and frozen-variable typing.

Indices are 0-based throughout.  Entries are stored as raw canonical values
(see :mod:`cmrank.ffield`); no zero is ever stored.

Rank uses right-looking sparse elimination with Markowitz-style pivot choice.
Over GF(p) the active part is handed to a dense numba kernel once fill-in
makes sparse pivots expensive.  Over the rationals elimination stays sparse
and fraction-free on integer rows.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from ._kernels import gf2_rank_packed, gfp_rank_dense, pack_gf2
from .ffield import FieldElement, FieldSpec, Raw

# sparse pivots whose Markowitz cost exceeds this trigger the dense kernel
MARKOWITZ_LIMIT = 40
# ... but only if the active block is at least this large
DENSE_MIN_SIZE = 48


class SparseMatrix:
    """Immutable nrows x ncols sparse matrix, stored as one dict per row."""

    __slots__ = ("nrows", "ncols", "field", "_rows", "symmetric", "_rank")

    def __init__(
        self,
        nrows: int,
        ncols: int,
        field: FieldSpec,
        rows: Sequence[dict[int, Raw]] | None = None,
        symmetric: bool = False,
    ) -> None:
        self.nrows = int(nrows)
        self.ncols = int(ncols)
        self.field = field
        if rows is None:
            rows = [{} for _ in range(self.nrows)]
        elif len(rows) != self.nrows:
            raise ValueError("row count mismatch")
        self._rows = [{int(c): field.coerce(v) for c, v in r.items()} for r in rows]
        self._rank: int | None = None
        for r in self._rows:
            for c, v in r.items():
                if not 0 <= c < self.ncols:
                    raise IndexError(f"column {c} out of range")
                if v == 0:
                    raise ValueError("stored zero entry")
        if symmetric and not self.is_symmetric():
            raise ValueError("matrix flagged symmetric is not symmetric")
        self.symmetric = symmetric

    @classmethod
    def _trusted(cls, nrows, ncols, field, rows, symmetric=False) -> SparseMatrix:
        obj = cls.__new__(cls)
        obj.nrows, obj.ncols, obj.field = nrows, ncols, field
        obj._rows, obj.symmetric, obj._rank = rows, symmetric, None
        return obj

    @classmethod
    def from_dense(cls, data, field: FieldSpec, symmetric: bool = False) -> SparseMatrix:
        data = [list(r) for r in data]
        nrows = len(data)
        ncols = len(data[0]) if nrows else 0
        rows = []
        for r in data:
            if len(r) != ncols:
                raise ValueError("ragged input")
            row = {}
            for c, x in enumerate(r):
                v = field.coerce(x)
                if v != 0:
                    row[c] = v
            rows.append(row)
        m = cls._trusted(nrows, ncols, field, rows)
        if symmetric and not m.is_symmetric():
            raise ValueError("matrix flagged symmetric is not")
        m.symmetric = symmetric
        return m

    @classmethod
    def from_entries(cls, nrows: int, ncols: int, field: FieldSpec,
                     entries: Iterable[tuple[int, int, object]], symmetric: bool = False) -> SparseMatrix:
        rows: list[dict[int, Raw]] = [{} for _ in range(nrows)]
        for i, j, x in entries:
            if not (0 <= i < nrows and 0 <= j < ncols):
                raise IndexError(f"entry ({i}, {j}) out of range")
            v = field.coerce(x)
            if v != 0:
                rows[i][j] = v
            else:
                rows[i].pop(j, None)
        return cls._trusted(nrows, ncols, field, rows, symmetric)

    @classmethod
    def zeros(cls, nrows: int, ncols: int, field: FieldSpec) -> SparseMatrix:
        return cls._trusted(nrows, ncols, field, [{} for _ in range(nrows)], nrows == ncols)

    # -- access -----------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    @property
    def nnz(self) -> int:
        return sum(len(r) for r in self._rows)

    def row(self, i: int) -> dict[int, Raw]:
        return dict(self._rows[i])

    def get(self, i: int, j: int) -> FieldElement:
        return FieldElement(self.field, self._rows[i].get(j, 0))

    def entries(self) -> Iterator[tuple[int, int, Raw]]:
        for i, r in enumerate(self._rows):
            for j in sorted(r):
                yield i, j, r[j]

    def to_dense(self) -> list[list[Raw]]:
        zero: Raw = 0 if self.field.is_prime else Fraction(0)
        out = [[zero] * self.ncols for _ in range(self.nrows)]
        for i, j, v in self.entries():
            out[i][j] = v
        return out

    def is_symmetric(self) -> bool:
        if self.nrows != self.ncols:
            return False
        return all(self._rows[j].get(i) == v for i, j, v in self.entries())

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (self.shape == other.shape and self.field == other.field
                and self._rows == other._rows)

    def __repr__(self) -> str:
        return f"SparseMatrix({self.nrows}x{self.ncols} over {self.field}, nnz={self.nnz})"

    # -- derived matrices ------------------------------------------------

    def transpose(self) -> SparseMatrix:
        if self.symmetric:
            return self
        rows: list[dict[int, Raw]] = [{} for _ in range(self.ncols)]
        for i, r in enumerate(self._rows):
            for j, v in r.items():
                rows[j][i] = v
        return SparseMatrix._trusted(self.ncols, self.nrows, self.field, rows)

    @property
    def T(self) -> SparseMatrix:
        return self.transpose()

    def zero_rows_cols(self, rows: Iterable[int] = (), cols: Iterable[int] = ()) -> SparseMatrix:
        """Return A<rows; cols>: A with the given rows and columns replaced by zeros."""
        rset, cset = set(rows), set(cols)
        for i in rset:
            if not 0 <= i < self.nrows:
                raise IndexError(f"row {i} out of range")
        for j in cset:
            if not 0 <= j < self.ncols:
                raise IndexError(f"column {j} out of range")
        out = []
        for i, r in enumerate(self._rows):
            if i in rset:
                out.append({})
            elif cset and not cset.isdisjoint(r):
                out.append({c: v for c, v in r.items() if c not in cset})
            else:
                out.append(r)
        return SparseMatrix._trusted(self.nrows, self.ncols, self.field, out,
                                     self.symmetric and rset == cset)

    def append_rows(self, vectors: Iterable[Sequence]) -> SparseMatrix:
        new = list(self._rows)
        for v in vectors:
            new.append(self._vector_to_row(v))
        return SparseMatrix._trusted(len(new), self.ncols, self.field, new)

    def scale_row(self, i: int, c) -> SparseMatrix:
        f = self.field.coerce(c)
        if f == 0:
            raise ValueError("scale factor must be nonzero")
        out = list(self._rows)
        out[i] = {j: self.field.mul(v, f) for j, v in out[i].items()}
        return SparseMatrix._trusted(self.nrows, self.ncols, self.field, out)

    def _vector_to_row(self, v) -> dict[int, Raw]:
        if isinstance(v, dict):
            return {int(c): self.field.coerce(x) for c, x in v.items() if self.field.coerce(x) != 0}
        v = list(v)
        if len(v) != self.ncols:
            raise ValueError(f"vector length {len(v)} != ncols {self.ncols}")
        row = {}
        for c, x in enumerate(v):
            val = self.field.coerce(x)
            if val != 0:
                row[c] = val
        return row

    def rows_raw(self) -> list[dict[int, Raw]]:
        return self._rows

    def rank(self) -> int:
        if self._rank is None:
            self._rank = _rank_rows(self._rows, self.ncols, self.field)
        return self._rank


# -- rank ------------------------------------------------------------------


def rank(A: SparseMatrix) -> int:
    """Exact rank of ``A`` over its field.  ``A`` is never modified."""
    return A.rank()


def _rank_rows(rows: Sequence[dict[int, Raw]], ncols: int, field: FieldSpec) -> int:
    if field.is_prime:
        r, rest = _markowitz(rows, field, dense_switch=True)
        if rest:
            r += _dense_rank(rest, field)
        return r
    r, _ = _markowitz(_integer_rows(rows), None, dense_switch=False)
    return r


def _integer_rows(rows: Sequence[dict[int, Raw]]) -> list[dict[int, int]]:
    """Clear denominators row by row (row scaling does not change rank)."""
    out = []
    for r in rows:
        if not r:
            continue
        den = math.lcm(*(Fraction(v).denominator for v in r.values()))
        out.append({c: int(Fraction(v) * den) for c, v in r.items()})
    return out


def _markowitz(rows, field: FieldSpec | None, dense_switch: bool):
    """Sparse elimination.  ``field=None`` means fraction-free over the integers.

    Returns (pivots found, remaining active rows).  The remainder is non-empty
    only when ``dense_switch`` stopped elimination early.
    """
    active: dict[int, dict[int, int]] = {}
    colrows: dict[int, set[int]] = {}
    for r, row in enumerate(rows):
        if row:
            active[r] = dict(row)
            for c in row:
                colrows.setdefault(c, set()).add(r)
    heap = [(len(s), c) for c, s in colrows.items()]
    heapq.heapify(heap)
    singles = [r for r, row in active.items() if len(row) == 1]
    p = field.modulus if field is not None else 0
    rank = 0
    while active:
        piv_r = -1
        while singles:
            r = singles.pop()
            if r in active and len(active[r]) == 1:
                piv_r = r
                piv_c = next(iter(active[r]))
                break
        if piv_r < 0:
            while heap:
                cnt, c = heapq.heappop(heap)
                s = colrows.get(c)
                if s and len(s) == cnt:
                    break
            else:
                break
            piv_r = min(s, key=lambda r: len(active[r]))
            piv_c = c
            cost = (len(active[piv_r]) - 1) * (cnt - 1)
            if (dense_switch and cost > MARKOWITZ_LIMIT
                    and len(active) >= DENSE_MIN_SIZE):
                heapq.heappush(heap, (cnt, c))
                return rank, list(active.values())
        prow = active.pop(piv_r)
        for c in prow:
            colrows[c].discard(piv_r)
        pv = prow[piv_c]
        others = list(colrows[piv_c])
        if field is not None:
            ipv = pow(pv, -1, p)
            for r2 in others:
                row2 = active[r2]
                f = row2[piv_c] * ipv % p
                for c, v in prow.items():
                    nv = (row2.get(c, 0) - f * v) % p
                    if nv:
                        if c not in row2:
                            colrows[c].add(r2)
                        row2[c] = nv
                    elif c in row2:
                        del row2[c]
                        colrows[c].discard(r2)
                _settle(r2, row2, active, singles)
        else:
            for r2 in others:
                row2 = active[r2]
                b = row2[piv_c]
                g = math.gcd(pv, b)
                a, b = pv // g, b // g
                for c in row2:
                    if c not in prow:
                        row2[c] *= a
                for c, v in prow.items():
                    nv = a * row2.get(c, 0) - b * v
                    if nv:
                        if c not in row2:
                            colrows[c].add(r2)
                        row2[c] = nv
                    elif c in row2:
                        del row2[c]
                        colrows[c].discard(r2)
                if row2:
                    g = math.gcd(*row2.values())
                    if g > 1:
                        for c in row2:
                            row2[c] //= g
                _settle(r2, row2, active, singles)
        for c in prow:
            if colrows[c]:
                heapq.heappush(heap, (len(colrows[c]), c))
        rank += 1
    return rank, []


def _settle(r2, row2, active, singles) -> None:
    if not row2:
        del active[r2]
    elif len(row2) == 1:
        singles.append(r2)


def _dense_rank(rows: list[dict[int, int]], field: FieldSpec) -> int:
    cols = sorted(set().union(*rows))
    index = {c: k for k, c in enumerate(cols)}
    m = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for i, row in enumerate(rows):
        for c, v in row.items():
            m[i, index[c]] = v
    return dense_rank(m, field)


def dense_rank(m: np.ndarray, field: FieldSpec) -> int:
    """Rank of a dense integer array over a prime field (input is not modified)."""
    if m.size == 0:
        return 0
    if m.shape[0] > m.shape[1]:
        m = m.T
    p = field.modulus
    if p == 2:
        return int(gf2_rank_packed(pack_gf2((m & 1).astype(np.uint8)), m.shape[1]))
    return int(gfp_rank_dense(np.mod(m, p).astype(np.int64), p))


# -- row space and frozen variables ---------------------------------------


class FrozenStatus(Enum):
    NOT_FROZEN = "NotFrozen"
    FRAIL = "FraillyFrozen"
    FIRM = "FirmlyFrozen"


class VariableType(Enum):
    X = "X"
    Y = "Y"
    Z = "Z"
    U = "U"
    V = "V"

    @property
    def drop(self) -> int:
        """Rank decrease when row and column of a variable of this type are zeroed."""
        return _DROP[self]


_DROP = {VariableType.X: 1, VariableType.Y: 2, VariableType.Z: 0,
         VariableType.U: 1, VariableType.V: 1}


class ConsistencyError(RuntimeError):
    """Raised when frozen statuses violate the frail-symmetry law."""


def unit_vector(n: int, i: int) -> dict[int, int]:
    return {i: 1}


def row_space_contains(A: SparseMatrix, v) -> bool:
    """True iff ``v`` is a linear combination of the rows of ``A``."""
    row = A._vector_to_row(v)
    if any(not 0 <= c < A.ncols for c in row):
        raise ValueError("vector index out of range")
    return A.append_rows([row]).rank() == A.rank()


def _check_index(A: SparseMatrix, i: int) -> None:
    if not 0 <= i < min(A.nrows, A.ncols):
        raise IndexError(f"index {i} outside [0, {min(A.nrows, A.ncols)})")


def frozen_status(A: SparseMatrix, i: int) -> FrozenStatus:
    _check_index(A, i)
    e = unit_vector(A.ncols, i)
    if not row_space_contains(A, e):
        return FrozenStatus.NOT_FROZEN
    if row_space_contains(A.zero_rows_cols(rows=[i]), e):
        return FrozenStatus.FIRM
    return FrozenStatus.FRAIL


def _combine(sa: FrozenStatus, st: FrozenStatus) -> VariableType:
    F = FrozenStatus
    if (sa is F.FRAIL) != (st is F.FRAIL):
        raise ConsistencyError(f"frail in exactly one of A, A^T ({sa}, {st})")
    if sa is F.FRAIL:
        return VariableType.X
    if sa is F.FIRM and st is F.FIRM:
        return VariableType.Y
    if sa is F.NOT_FROZEN and st is F.NOT_FROZEN:
        return VariableType.Z
    if st is F.FIRM:
        return VariableType.U
    return VariableType.V


def classify_variable(A: SparseMatrix, i: int) -> VariableType:
    return _combine(frozen_status(A, i), frozen_status(A.transpose(), i))


def rank_drop(A: SparseMatrix, i: int, check: bool = True) -> int:
    """rank(A) - rank(A<i;i>), optionally checked against the type of ``i``."""
    _check_index(A, i)
    drop = A.rank() - A.zero_rows_cols([i], [i]).rank()
    if check:
        t = classify_variable(A, i)
        if t.drop != drop:
            raise ConsistencyError(f"index {i}: type {t.value} predicts {t.drop}, rank drop {drop}")
    return drop


def classify_all(A: SparseMatrix, indices: Iterable[int] | None = None) -> list[VariableType]:
    """Types of many indices via four ranks per index.

    Uses that ``i`` is frozen in A iff zeroing column ``i`` lowers the rank, so
    with r = rank(A), rc = rank(A<;i>), rr = rank(A<i;>), rrc = rank(A<i;i>):
    frozen in A iff r - rc = 1, firm in A iff rr - rrc = 1, frozen in A^T iff
    r - rr = 1 and firm in A^T iff rc - rrc = 1.  Over prime fields the ranks
    are taken on a dense copy, which is much faster than :func:`classify_variable`.
    """
    m = min(A.nrows, A.ncols)
    idx = list(range(m)) if indices is None else list(indices)
    for i in idx:
        _check_index(A, i)
    if A.field.is_prime:
        dense = np.zeros(A.shape, dtype=np.int64)
        for i, j, v in A.entries():
            dense[i, j] = v
        rk = lambda rows=(), cols=(): _dense_zeroed_rank(dense, rows, cols, A.field)
    else:
        rk = lambda rows=(), cols=(): A.zero_rows_cols(rows, cols).rank()
    r = rk()
    out = []
    F = FrozenStatus
    for i in idx:
        rc, rr, rrc = rk(cols=[i]), rk(rows=[i]), rk(rows=[i], cols=[i])
        sa = F.NOT_FROZEN if r - rc == 0 else (F.FIRM if rr - rrc == 1 else F.FRAIL)
        st = F.NOT_FROZEN if r - rr == 0 else (F.FIRM if rc - rrc == 1 else F.FRAIL)
        out.append(_combine(sa, st))
    return out


def _dense_zeroed_rank(dense, rows, cols, field) -> int:
    m = dense.copy()
    m[list(rows), :] = 0
    m[:, list(cols)] = 0
    return dense_rank(m, field)


# -- perturbation -----------------------------------------------------------


@dataclass(frozen=True)
class Perturbation:
    """Bordering blocks: ``row_pos[a]`` is the column of the 1 in row a of the
    row block, ``col_pos[b]`` the row of the 1 in column b of the column block."""

    P: int
    n: int
    row_pos: tuple[int, ...]
    col_pos: tuple[int, ...]

    @property
    def theta_r(self) -> int:
        return len(self.row_pos)

    @property
    def theta_c(self) -> int:
        return len(self.col_pos)

    @classmethod
    def sample(cls, n: int, P: int, rng: np.random.Generator) -> Perturbation:
        if P < 1:
            raise ValueError("P must be >= 1")
        theta_r = int(rng.integers(1, P + 1))
        theta_c = int(rng.integers(1, P + 1))
        row_pos = tuple(int(x) for x in rng.integers(0, n, size=theta_r))
        col_pos = tuple(int(x) for x in rng.integers(0, n, size=theta_c))
        return cls(P, n, row_pos, col_pos)

    def vanishes_at(self, i: int) -> bool:
        """True if neither block has a 1 in row/column ``i``."""
        return i not in self.row_pos and i not in self.col_pos

    def border(self, A: SparseMatrix) -> SparseMatrix:
        """Return [[A, col block], [row block, 0]]."""
        if A.shape != (self.n, self.n):
            raise ValueError("perturbation built for a different size")
        n, one = self.n, A.field.coerce(1)
        rows = [dict(r) for r in A.rows_raw()]
        for b, i in enumerate(self.col_pos):
            rows[i][n + b] = one
        for j in self.row_pos:
            rows.append({j: one})
        return SparseMatrix._trusted(n + self.theta_r, n + self.theta_c, A.field, rows)


def attach_perturbation(A: SparseMatrix, P: int, rng: np.random.Generator):
    if A.nrows != A.ncols:
        raise ValueError("perturbation needs a square matrix")
    pert = Perturbation.sample(A.nrows, P, rng)
    return pert.border(A), pert


# -- relations ----------------------------------------------------------------


def frozen_set(A: SparseMatrix) -> set[int]:
    """Columns i with e(i) in the row space of A."""
    r = A.rank()
    return {i for i in range(A.ncols) if A.zero_rows_cols(cols=[i]).rank() < r}


def is_relation(A: SparseMatrix, cols: Iterable[int]) -> bool:
    """Some y has yA != 0 supported inside ``cols``.

    Such y lie in the left kernel of A with ``cols`` zeroed but not in that of A,
    so the test is a strict rank drop after zeroing ``cols``.
    """
    return A.zero_rows_cols(cols=sorted(set(cols))).rank() < A.rank()


def enumerate_proper_relations(A: SparseMatrix, ell: int,
                               columns: Iterable[int] | None = None) -> list[tuple[int, ...]]:
    """All size-``ell`` proper relations, optionally restricted to a column subset."""
    pool = list(range(A.ncols)) if columns is None else sorted(set(columns))
    if len(pool) > 24 or ell > 4:
        raise ValueError("enumeration limited to 24 columns and ell <= 4")
    frozen = frozen_set(A)
    out = []
    for I in itertools.combinations(pool, ell):
        rest = [c for c in I if c not in frozen]
        if rest and is_relation(A, I) and is_relation(A, rest):
            out.append(I)
    return out


# -- brute-force oracle -------------------------------------------------------


def solution_count_oracle(A: SparseMatrix) -> int:
    """Count x with Ax = 0 by enumerating GF(p)^ncols."""
    if not A.field.is_prime:
        raise ValueError("oracle needs a prime field")
    p, n = A.field.modulus, A.ncols
    if p**n > 2**24:
        raise ValueError("too many vectors to enumerate")
    M = np.zeros(A.shape, dtype=np.int64)
    for i, j, v in A.entries():
        M[i, j] = v
    total = 0
    chunk = 1 << 16
    for start in range(0, p**n, chunk):
        idx = np.arange(start, min(start + chunk, p**n), dtype=np.int64)
        X = np.empty((n, idx.size), dtype=np.int64)
        for k in range(n):
            X[k] = idx % p
            idx = idx // p
        total += int(np.count_nonzero(~((M @ X) % p).any(axis=0)))
    return total


# -- text I/O -----------------------------------------------------------------


def write_matrix(A: SparseMatrix, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{A.nrows} {A.ncols} {A.field}\n")
        for i, j, v in A.entries():
            fh.write(f"{i + 1} {j + 1} {v}\n")


def read_matrix(path) -> SparseMatrix:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ValueError("header must be 'nrows ncols field'")
        nrows, ncols, field = int(header[0]), int(header[1]), FieldSpec.parse(header[2])
        entries = []
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            i, j, v = parts
            entries.append((int(i) - 1, int(j) - 1, field.parse_value(v)))
    return SparseMatrix.from_entries(nrows, ncols, field, entries)
