"""
The real supersphere S^{p|2}: x0^2 + ... + xp^2 + 2 xi1 xi2 = 1.

Two stereographic charts. ``north`` has its origin at the north pole
(x0 = +1) and covers everything but the south pole; ``south`` is the mirror
image. On the overlap

    y1 = -x1 / R^2,   yi = xi / R^2 (i >= 2),   eta_j = xi_j / R^2,

with R^2 = sum x_i^2 + 2 xi1 xi2. The principal densities are
(1 + R^2)^(2 - p) in either chart, and the anomaly carried by the north
chart is

    alpha_12 = -Omega |x|^(p-2) / (1 + |x|^2)^(p-2)  (x)  2 d_xi1 d_xi2 o xi1 xi2 .
"""

from __future__ import annotations

__all__ = [
    "AmbientPoint",
    "supersphere_measure",
    "supersphere_volume",
    "chart_consistency_residual",
    "transition_berezinian",
]

import logging
import math
from dataclasses import dataclass

import numpy as np

from superalg.grassmann import GeneratorPool, GrassmannElement, berezin_top, g_inv, g_pow
from superalg.supermatrix import SuperMatrix, s_det
from superrmt.errors import UsageError
from .measure import (
    DEFAULT_RTOL,
    BerezinChart,
    BerezinMeasure,
    BoundaryFace,
    Cell,
    berezin_integrate,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AmbientPoint:
    """Embedding coordinates (x0, x1..xp; xi1, xi2), each a Grassmann element."""

    x0: GrassmannElement
    xs: tuple[GrassmannElement, ...]
    xi: tuple[GrassmannElement, GrassmannElement]

    def constraint(self) -> GrassmannElement:
        total = self.x0 * self.x0 + 2 * self.xi[0] * self.xi[1]
        for x in self.xs:
            total = total + x * x
        return total


def _signs(p: int) -> np.ndarray:
    s = np.ones(p)
    s[0] = -1.0
    return s


def _r2(x: np.ndarray, xis) -> GrassmannElement:
    return float(np.dot(x, x)) + 2 * xis[0] * xis[1]


def _density(p: int):
    def density(x, xis):
        return g_pow(1 + _r2(x, xis), 2 - p)
    return density


def _embed_north(x: np.ndarray, xis) -> AmbientPoint:
    r2 = _r2(x, xis)
    inv = g_inv(1 + r2)
    x0 = (1 - r2) * inv
    xs = tuple(inv * (2.0 * float(c)) for c in x)
    return AmbientPoint(x0, xs, (2 * xis[0] * inv, 2 * xis[1] * inv))


def _embed_south(y: np.ndarray, etas) -> AmbientPoint:
    s2 = _r2(y, etas)
    inv = g_inv(1 + s2)
    x0 = (s2 - 1) * inv
    signs = _signs(len(y))
    xs = tuple(inv * (2.0 * float(sign * c)) for sign, c in zip(signs, y))
    return AmbientPoint(x0, xs, (2 * etas[0] * inv, 2 * etas[1] * inv))


def _anomaly_factor(p: int, r: float) -> float:
    return r ** (p - 2) / (1.0 + r * r) ** (p - 2)


def _alpha_12(p: int):
    def alpha(x, value):
        xi1, xi2 = value.pool.generators("xi")
        c = _anomaly_factor(p, float(np.linalg.norm(x)))
        return -c * 2 * berezin_top(xi1 * xi2 * value, value.pool.blocks["xi"]).body
    return alpha


def supersphere_measure(p: int, cut: float = 1.0, *, gauge: str = "north",
                        single_chart: bool = False) -> BerezinMeasure:
    """
    Two-cell measure: the ball |x| <= cut in the north chart and |y| <= 1/cut
    in the south chart, glued along |x| = cut.

    ``gauge`` chooses the chart carrying the anomaly (the other one has zero
    anomaly). ``single_chart`` drops the south cell entirely; valid for p >= 3
    where the anomaly vanishes at infinity.
    """
    if int(p) != p or p < 1:
        raise UsageError(f"supersphere dimension p must be a positive integer, got {p}")
    if gauge not in ("north", "south"):
        raise UsageError(f"gauge must be 'north' or 'south', got {gauge!r}")
    density = _density(p)
    if single_chart:
        if p < 3:
            raise UsageError(f"a single chart covers S^{{{p}|2}} only for p >= 3")
        chart = BerezinChart("north", p, 2, density, _embed_north, Cell(math.inf))
        return BerezinMeasure(f"S^{p}|2", (chart,), (), {"p": p, "single_chart": True})
    if not cut > 0 or not math.isfinite(cut):
        raise UsageError(f"equator cut must be positive and finite, got {cut}")

    alpha = _alpha_12(p)
    if gauge == "north":
        anomalies = {"north": alpha}
    else:
        anomalies = {"south": lambda x, value: -alpha(x, value)}
    north = BerezinChart("north", p, 2, density, _embed_north, Cell(cut))
    south = BerezinChart("south", p, 2, density, _embed_south, Cell(1.0 / cut))
    face = BoundaryFace("north", "south", cut, anomalies)
    return BerezinMeasure(f"S^{p}|2", (north, south), (face,), {"p": p, "cut": cut, "gauge": gauge})


def supersphere_volume(p: int, cut: float = 1.0, *, single_chart: bool = False,
                       rtol: float = DEFAULT_RTOL) -> complex:
    """int omega[1]: 0 for p = 1, 4 pi for p = 2, 2 pi^2 for p = 3."""
    measure = supersphere_measure(p, cut, single_chart=single_chart)
    return berezin_integrate(measure, lambda point: 1.0, radial=True, rtol=rtol).value


def _transition(x: np.ndarray, xis):
    """(y, eta) as Grassmann elements of the north coordinates."""
    inv = g_inv(_r2(x, xis))
    ys = [inv * float(sign * c) for sign, c in zip(_signs(len(x)), x)]
    etas = [xis[0] * inv, xis[1] * inv]
    return ys, etas


def transition_berezinian(x: np.ndarray, pool: GeneratorPool) -> GrassmannElement:
    """
    Ber of d(y, eta)/d(x, xi) on the overlap, odd columns taken as right
    derivatives.
    """
    x = np.asarray(x, dtype=float)
    p = len(x)
    xis = pool.generators("xi")
    inv = g_inv(_r2(x, xis))
    inv2 = inv * inv
    # right derivatives of R^2 along xi1, xi2
    d_r2 = [-2 * xis[1], 2 * xis[0]]
    signs = _signs(p)
    rows = []
    for i in range(p):
        row = []
        for j in range(p):
            entry = inv2 * (-2.0 * float(x[i] * x[j]))
            if i == j:
                entry = entry + inv
            row.append(entry * float(signs[i]))
        for k in range(2):
            row.append(inv2 * d_r2[k] * float(-signs[i] * x[i]))
        rows.append(row)
    for a in range(2):
        row = [xis[a] * inv2 * (-2.0 * float(x[j])) for j in range(p)]
        for k in range(2):
            entry = -1 * xis[a] * inv2 * d_r2[k]
            if a == k:
                entry = entry + inv
            row.append(entry)
        rows.append(row)
    return s_det(SuperMatrix.from_rows(pool, rows, (p, 2)))


def chart_consistency_residual(p: int, points) -> float:
    """
    max over overlap points of |density_north - Ber(transition) * density_south o transition|,
    taken over every Grassmann coefficient.
    """
    pool = GeneratorPool()
    pool.allocate("xi", 2)
    xis = pool.generators("xi")
    density = _density(p)
    worst = 0.0
    for x in points:
        x = np.asarray(x, dtype=float)
        if len(x) != p:
            raise UsageError(f"overlap point {x} is not in R^{p}")
        if not np.dot(x, x) > 0:
            raise UsageError("the north pole is not in the overlap")
        ys, etas = _transition(x, xis)
        s2 = etas[0] * etas[1] * 2
        for y in ys:
            s2 = s2 + y * y
        south = g_pow(1 + s2, 2 - p)
        diff = density(x, xis) - transition_berezinian(x, pool) * south
        worst = max(worst, diff.max_abs())
    logger.debug("S^%s|2 chart consistency residual %.3g over %s points", p, worst, len(points))
    return worst
