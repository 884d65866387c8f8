"""
Jacobian of the exponential map on a symmetric (super)space.

For Z in the tangent space, J(Z) = SDet T_Z with

    T_Z = sum_n ad(Z)^(2n) / (2n + 1)!

acting on the tangent space. Each eigenvalue lambda of ad(Z)^2 contributes
sinh(sqrt lambda) / sqrt lambda, to the numerator for even directions and
to the denominator for odd ones.
"""

from __future__ import annotations

__all__ = ["TangentSpace", "j_factor", "ad_squared"]

import logging
from dataclasses import dataclass

import numpy as np

from superalg.grassmann import GeneratorPool, GrassmannElement
from superalg.supermatrix import SuperMatrix, s_det, s_mul
from superrmt.errors import NumericalError, UsageError

logger = logging.getLogger(__name__)

SERIES_TOL = 1e-15
MAX_TERMS = 80


@dataclass(frozen=True, eq=False)
class TangentSpace:
    """
    A basis of the tangent space: ``even`` directions first, then ``odd``.

    Elements are numeric square matrices on W = W_B + W_F; an odd element
    lives in the off-diagonal blocks. Coordinates are found by least squares.
    """

    even: tuple[np.ndarray, ...]
    odd: tuple[np.ndarray, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "even", tuple(np.asarray(b, dtype=complex) for b in self.even))
        object.__setattr__(self, "odd", tuple(np.asarray(b, dtype=complex) for b in self.odd))
        if not self.even and not self.odd:
            raise UsageError("tangent space needs at least one direction")
        shapes = {b.shape for b in self.basis}
        if len(shapes) != 1:
            raise UsageError(f"tangent basis elements disagree in shape: {sorted(shapes)}")
        if np.linalg.matrix_rank(self.frame) < len(self.basis):
            raise UsageError("tangent basis is linearly dependent")

    @property
    def basis(self) -> tuple[np.ndarray, ...]:
        return self.even + self.odd

    @property
    def frame(self) -> np.ndarray:
        return np.array([b.ravel() for b in self.basis]).T

    @property
    def dims(self) -> tuple[int, int]:
        return len(self.even), len(self.odd)

    def coordinates(self, x: np.ndarray, atol: float = 1e-10) -> np.ndarray:
        coeffs, *_ = np.linalg.lstsq(self.frame, np.asarray(x, dtype=complex).ravel(), rcond=None)
        miss = np.linalg.norm(self.frame @ coeffs - x.ravel())
        if miss > atol * max(1.0, np.linalg.norm(x)):
            raise UsageError(f"ad(Z)^2 leaves the tangent space (residual {miss:.3g})")
        return coeffs


def _involute(e: GrassmannElement) -> GrassmannElement:
    return GrassmannElement(e.pool, {m: -c if m.bit_count() & 1 else c for m, c in e.terms.items()})


def _product(x, y, pool: GeneratorPool):
    inner = range(len(y))
    return [[sum((row[k] * y[k][j] for k in inner), pool.zero()) for j in range(len(y[0]))] for row in x]


def _bracket(z, x, r, pool: GeneratorPool):
    """z x - x r."""
    left, right = _product(z, x, pool), _product(x, r, pool)
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(left, right)]


def _as_supermatrix(z, space: TangentSpace) -> SuperMatrix:
    if isinstance(z, SuperMatrix):
        matrix = z
    else:
        z = np.asarray(z, dtype=complex)
        matrix = SuperMatrix.from_array(GeneratorPool(), z, (len(z), 0))
    if matrix.shape != space.basis[0].shape:
        raise UsageError(f"Z has shape {matrix.shape}, the tangent basis {space.basis[0].shape}")
    return matrix


def ad_squared(z, space: TangentSpace, atol: float = 1e-10) -> SuperMatrix:
    """
    Matrix of X -> [Z, [Z, X]] in the basis of ``space``, graded (even | odd).

    Z may carry Grassmann entries. An odd direction has an odd coefficient
    on its right, which picks up the grade involution of Z when moved past it.
    """
    z = _as_supermatrix(z, space)
    pool = z.pool
    entries = [list(row) for row in z.entries]
    involuted = [[_involute(e) for e in row] for row in entries]
    m, k = space.dims
    parities = [0] * m + [1] * k
    columns = []
    for b, odd in zip(space.basis, parities):
        r = involuted if odd else entries
        lifted = [[pool.scalar(v) for v in row] for row in b.tolist()]
        twice = _bracket(entries, _bracket(entries, lifted, r, pool), r, pool)
        masks = sorted({mask for row in twice for e in row for mask in e.terms})
        column = [dict() for _ in space.basis]
        for mask in masks:
            coords = space.coordinates(np.array([[e.coefficient(mask) for e in row] for row in twice]))
            for i, c in enumerate(coords):
                column[i][mask] = c
        columns.append(column)

    rows = []
    for i, row_parity in enumerate(parities):
        row = []
        for j, col_parity in enumerate(parities):
            terms = {}
            for mask, c in columns[j][i].items():
                if (mask.bit_count() & 1) == row_parity ^ col_parity:
                    terms[mask] = c
                elif abs(c) > atol:
                    raise UsageError("Z does not preserve the even/odd splitting of the tangent space")
            row.append(GrassmannElement(pool, terms))
        rows.append(row)
    return SuperMatrix.from_rows(pool, rows, (m, k))


def j_factor(z, space: TangentSpace) -> GrassmannElement:
    """SDet of T_Z; 1 at Z = 0. Z is a numeric matrix or a SuperMatrix with Grassmann entries."""
    ad2 = ad_squared(z, space)
    t = SuperMatrix.identity(ad2.pool, ad2.rows)
    term = t
    for n in range(1, MAX_TERMS):
        term = s_mul(term, ad2).scale(1.0 / ((2 * n) * (2 * n + 1)))
        t = t + term
        if term.max_abs() < SERIES_TOL * max(1.0, t.max_abs()):
            break
    else:
        raise NumericalError(f"T_Z series still at {term.max_abs():.3g} after {MAX_TERMS} terms")
    value = s_det(t)
    logger.debug("J(Z) = %s over a (%s|%s) tangent space", value.body, *space.dims)
    return value
