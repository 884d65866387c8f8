"""
Supermatrices over a Grassmann algebra.

A :class:`SuperMatrix` has a row grading (m_r|n_r) and a column grading
(m_c|n_c). Rows and columns are ordered even-first, so for a square (m|n)
matrix the blocks are g00 (m×m), g01 (m×n), g10 (n×m), g11 (n×n). An entry
in row i and column j has parity |i| + |j|: diagonal blocks are even and
off-diagonal blocks odd. The constructor checks this.
"""

from __future__ import annotations

__all__ = [
    "SuperMatrix",
    "s_mul",
    "s_add",
    "s_transpose",
    "s_trace",
    "s_det",
    "s_inv",
    "s_exp",
    "superparity",
]

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from superrmt.errors import SingularityError, UsageError
from .grassmann import EVEN, MIXED, ODD, GeneratorPool, GrassmannElement, g_inv

logger = logging.getLogger(__name__)

Grading = tuple[int, int]


def _parities(grading: Grading) -> list[int]:
    even, odd = grading
    return [EVEN] * even + [ODD] * odd


@dataclass(frozen=True, eq=False)
class SuperMatrix:
    pool: GeneratorPool
    entries: tuple[tuple[GrassmannElement, ...], ...]
    rows: Grading
    cols: Grading

    def __post_init__(self):
        nrows, ncols = sum(self.rows), sum(self.cols)
        if len(self.entries) != nrows or any(len(r) != ncols for r in self.entries):
            raise UsageError(f"entry table does not match grading {self.rows}x{self.cols}")
        row_par, col_par = _parities(self.rows), _parities(self.cols)
        for i, row in enumerate(self.entries):
            for j, entry in enumerate(row):
                if entry.pool is not self.pool:
                    raise UsageError(f"entry ({i},{j}) belongs to another generator pool")
                expected = row_par[i] ^ col_par[j]
                actual = entry.parity
                if entry.is_zero():
                    continue
                if actual == MIXED or actual != expected:
                    raise UsageError(
                        f"entry ({i},{j}) must be {'odd' if expected else 'even'}: {entry.render()}"
                    )

    # -- construction ----------------------------------------------------

    @classmethod
    def from_rows(cls, pool: GeneratorPool, rows, row_grading: Grading, col_grading: Grading | None = None):
        col_grading = row_grading if col_grading is None else col_grading
        table = tuple(
            tuple(e if isinstance(e, GrassmannElement) else pool.scalar(e) for e in row)
            for row in rows
        )
        return cls(pool, table, tuple(row_grading), tuple(col_grading))

    @classmethod
    def from_blocks(cls, pool: GeneratorPool, g00, g01, g10, g11):
        """Assemble a square (m|n) matrix from nested-list blocks (scalars allowed)."""
        m, n = len(g00), len(g11)
        rows = []
        for i in range(m):
            rows.append(list(g00[i]) + (list(g01[i]) if n else []))
        for i in range(n):
            rows.append((list(g10[i]) if m else []) + list(g11[i]))
        return cls.from_rows(pool, rows, (m, n))

    @classmethod
    def from_array(cls, pool: GeneratorPool, array, grading: Grading):
        """Numeric (body-only) matrix; odd blocks must vanish."""
        array = np.asarray(array, dtype=complex)
        return cls.from_rows(pool, array.tolist(), grading)

    @classmethod
    def identity(cls, pool: GeneratorPool, grading: Grading):
        size = sum(grading)
        return cls.from_rows(pool, np.eye(size).tolist(), grading)

    @classmethod
    def zeros(cls, pool: GeneratorPool, rows: Grading, cols: Grading | None = None):
        cols = rows if cols is None else cols
        return cls.from_rows(pool, np.zeros((sum(rows), sum(cols))).tolist(), rows, cols)

    # -- views -----------------------------------------------------------

    @property
    def dims(self) -> Grading:
        return self.rows

    @property
    def shape(self) -> tuple[int, int]:
        return sum(self.rows), sum(self.cols)

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def _block(self, rsel: int, csel: int) -> list[list[GrassmannElement]]:
        m_r, m_c = self.rows[0], self.cols[0]
        rr = range(0, m_r) if rsel == 0 else range(m_r, sum(self.rows))
        cc = range(0, m_c) if csel == 0 else range(m_c, sum(self.cols))
        return [[self.entries[i][j] for j in cc] for i in rr]

    @property
    def g00(self):
        return self._block(0, 0)

    @property
    def g01(self):
        return self._block(0, 1)

    @property
    def g10(self):
        return self._block(1, 0)

    @property
    def g11(self):
        return self._block(1, 1)

    def body(self) -> np.ndarray:
        return np.array([[e.body for e in row] for row in self.entries], dtype=complex).reshape(self.shape)

    def __getitem__(self, ij) -> GrassmannElement:
        i, j = ij
        return self.entries[i][j]

    def map(self, fn) -> "SuperMatrix":
        return SuperMatrix(self.pool, tuple(tuple(fn(e) for e in row) for row in self.entries), self.rows, self.cols)

    def max_abs(self) -> float:
        return max((e.max_abs() for row in self.entries for e in row), default=0.0)

    def close_to(self, other: "SuperMatrix", atol: float = 1e-10) -> bool:
        return s_add(self, -other).max_abs() <= atol

    # -- arithmetic sugar ------------------------------------------------

    def __matmul__(self, other):
        return s_mul(self, other)

    def __add__(self, other):
        return s_add(self, other)

    def __sub__(self, other):
        return s_add(self, -other)

    def __neg__(self):
        return self.map(lambda e: -e)

    def scale(self, c) -> "SuperMatrix":
        """Multiply by an even scalar (complex number or even element) from the left."""
        return self.map(lambda e: c * e)

    def __repr__(self):
        rows = ["  [" + ", ".join(e.render() for e in row) + "]" for row in self.entries]
        return f"SuperMatrix({self.rows}x{self.cols},\n" + "\n".join(rows) + ")"


def _matmul(a, b, pool):
    n, k = len(a), len(b)
    p = len(b[0]) if b else 0
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = pool.zero()
            for t in range(k):
                acc = acc + a[i][t] * b[t][j]
            row.append(acc)
        out.append(row)
    return out


def s_mul(a: SuperMatrix, b: SuperMatrix) -> SuperMatrix:
    if a.pool is not b.pool:
        raise UsageError("supermatrices from different generator pools")
    if a.cols != b.rows:
        raise UsageError(f"grading mismatch: {a.rows}x{a.cols} times {b.rows}x{b.cols}")
    table = _matmul(a.entries, b.entries, a.pool)
    return SuperMatrix.from_rows(a.pool, table, a.rows, b.cols)


def s_add(a: SuperMatrix, b: SuperMatrix) -> SuperMatrix:
    if a.rows != b.rows or a.cols != b.cols:
        raise UsageError(f"grading mismatch: {a.rows}x{a.cols} plus {b.rows}x{b.cols}")
    table = [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a.entries, b.entries)]
    return SuperMatrix.from_rows(a.pool, table, a.rows, a.cols)


def superparity(pool: GeneratorPool, grading: Grading) -> SuperMatrix:
    """σ = diag(1_m, -1_n)."""
    m, n = grading
    return SuperMatrix.from_array(pool, np.diag([1.0] * m + [-1.0] * n), grading)


def s_transpose(a: SuperMatrix) -> SuperMatrix:
    """
    Supertranspose: (A^T)_ji = (-1)^(|j|(|i|+|j|)) A_ij.

    For a square matrix [[a, b], [c, d]] this is [[a^T, c^T], [-b^T, d^T]],
    so that (AB)^T = B^T A^T and A^TT = σ A σ.
    """
    rp, cp = _parities(a.rows), _parities(a.cols)
    table = []
    for j in range(len(cp)):
        row = []
        for i in range(len(rp)):
            e = a.entries[i][j]
            row.append(-e if cp[j] and not rp[i] else e)
        table.append(row)
    return SuperMatrix.from_rows(a.pool, table, a.cols, a.rows)


def s_trace(a: SuperMatrix) -> GrassmannElement:
    if not a.is_square:
        raise UsageError(f"supertrace of a non-square {a.rows}x{a.cols} matrix")
    m = a.rows[0]
    acc = a.pool.zero()
    for i in range(sum(a.rows)):
        acc = acc + a.entries[i][i] if i < m else acc - a.entries[i][i]
    return acc


# -- even-matrix helpers (entries commute) --------------------------------


def _pivot(rows, col, start):
    best, best_abs = None, 0.0
    for r in range(start, len(rows)):
        size = abs(rows[r][col].body)
        if size > best_abs:
            best, best_abs = r, size
    return best


def _even_det(matrix, pool) -> GrassmannElement:
    """Determinant of a square matrix of even elements by Gaussian elimination."""
    rows = [list(r) for r in matrix]
    n = len(rows)
    det = pool.one()
    for col in range(n):
        piv = _pivot(rows, col, col)
        if piv is None:
            raise SingularityError(f"even block has a singular body (column {col})")
        if piv != col:
            rows[col], rows[piv] = rows[piv], rows[col]
            det = -det
        inv = g_inv(rows[col][col])
        det = det * rows[col][col]
        for r in range(col + 1, n):
            factor = rows[r][col] * inv
            if factor.is_zero():
                continue
            rows[r] = [x - factor * y for x, y in zip(rows[r], rows[col])]
    return det


def _even_inv(matrix, pool):
    """Gauss-Jordan inverse of a square matrix of even elements."""
    n = len(matrix)
    rows = [list(r) + [pool.one() if i == j else pool.zero() for j in range(n)] for i, r in enumerate(matrix)]
    for col in range(n):
        piv = _pivot(rows, col, col)
        if piv is None:
            raise SingularityError(f"even block has a singular body (column {col})")
        rows[col], rows[piv] = rows[piv], rows[col]
        inv = g_inv(rows[col][col])
        rows[col] = [inv * x for x in rows[col]]
        for r in range(n):
            if r == col:
                continue
            factor = rows[r][col]
            if factor.is_zero():
                continue
            rows[r] = [x - factor * y for x, y in zip(rows[r], rows[col])]
    return [r[n:] for r in rows]


def _sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def s_det(a: SuperMatrix) -> GrassmannElement:
    """SDet = Det(g00 - g01 g11^-1 g10) / Det(g11)."""
    if not a.is_square:
        raise UsageError(f"superdeterminant of a non-square {a.rows}x{a.cols} matrix")
    m, n = a.rows
    pool = a.pool
    if n == 0:
        return _even_det(a.g00, pool)
    d_inv = _even_inv(a.g11, pool)
    det_d = _even_det(a.g11, pool)
    if m == 0:
        return g_inv(det_d)
    schur = _sub(a.g00, _matmul(_matmul(a.g01, d_inv, pool), a.g10, pool))
    return _even_det(schur, pool) * g_inv(det_d)


def s_inv(a: SuperMatrix) -> SuperMatrix:
    if not a.is_square:
        raise UsageError(f"inverse of a non-square {a.rows}x{a.cols} matrix")
    m, n = a.rows
    pool = a.pool
    if n == 0:
        return SuperMatrix.from_rows(pool, _even_inv(a.g00, pool), a.rows)
    d_inv = _even_inv(a.g11, pool)
    if m == 0:
        return SuperMatrix.from_rows(pool, d_inv, a.rows)
    schur = _sub(a.g00, _matmul(_matmul(a.g01, d_inv, pool), a.g10, pool))
    s_i = _even_inv(schur, pool)
    top_right = [[-x for x in row] for row in _matmul(_matmul(s_i, a.g01, pool), d_inv, pool)]
    dc = _matmul(d_inv, a.g10, pool)
    bottom_left = [[-x for x in row] for row in _matmul(dc, s_i, pool)]
    correction = _matmul(_matmul(dc, s_i, pool), _matmul(a.g01, d_inv, pool), pool)
    bottom_right = [[x + y for x, y in zip(r1, r2)] for r1, r2 in zip(d_inv, correction)]
    return SuperMatrix.from_blocks(pool, s_i, top_right, bottom_left, bottom_right)


def s_exp(a: SuperMatrix, tol: float = 1e-17, max_terms: int = 60) -> SuperMatrix:
    """exp(A) by scaling and squaring with a Taylor core."""
    if not a.is_square:
        raise UsageError("exp of a non-square supermatrix")
    norm = a.max_abs() * sum(a.rows)
    squarings = max(0, math.ceil(math.log2(norm / 0.5))) if norm > 0.5 else 0
    scaled = a.map(lambda e: e * (0.5 ** squarings))
    result = SuperMatrix.identity(a.pool, a.rows)
    term = result
    for k in range(1, max_terms + 1):
        term = s_mul(term, scaled).map(lambda e, k=k: e * (1.0 / k))
        result = s_add(result, term)
        if term.max_abs() < tol:
            break
    else:
        logger.warning("s_exp: Taylor core hit %d terms without reaching %.1e", max_terms, tol)
    for _ in range(squarings):
        result = s_mul(result, result)
    return result
