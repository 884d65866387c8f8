"""
Large-N class-C generating function for n = 1 as a superspace integral.

The fermion-fermion base is Sp(1)/U(1), a two-sphere, and the boson-boson
base is a point. The ``north`` chart is the Cayley chart

    Q = Sigma_z (1 + P)(1 - P)^-1,      Sigma_z = diag(sigma_z, sigma_z),

with P = [[0, B], [C, K]], K = [[0, x], [-x*, 0]], B = [[0, eta1], [eta2, 0]]
and C = [[0, eta1], [-eta2, 0]]. The ``south`` chart is its conjugate by the
fermion-fermion Weyl element W and is centred on the antipode; body points
are related by y = -1/x. Both charts carry the density

    rho = -(1/2pi) (1 + |x|^2)^-1 u^-1,     u = Tr(sigma_z Q_BB) / 2,

and the integrand is exp(-i pi STr(omega Q)) with
omega = diag(alpha sigma_z, beta sigma_z). The cells are |x| <= cut and
|y| <= 1/cut. On the face the anomaly per unit solid angle is

    alpha = r^4 / 2 * rho * f * D(eta)[|y|^2]    (bodies of rho and f),

the supersphere's alpha_12 pattern: it only sees the nilpotent part of the
outer radius. The constant in rho is the one making Z(alpha, alpha) = 1.
"""

from __future__ import annotations

__all__ = [
    "classc_measure",
    "classc_superspace_result",
    "classc_superspace_z",
    "cayley_q",
    "cayley_radius2",
    "source_traces",
    "to_chart_frame",
]

import logging
import math

import numpy as np

from superalg.grassmann import GrassmannElement, berezin_top, g_exp, g_inv
from superalg.supermatrix import SuperMatrix, s_inv, s_mul
from superrmt.errors import UsageError
from .measure import (
    DEFAULT_RTOL,
    BerezinChart,
    BerezinMeasure,
    BerezinResult,
    BoundaryFace,
    Cell,
    berezin_integrate,
)

logger = logging.getLogger(__name__)

POLES = ("north", "south")

SIGMA = np.diag([1, -1, 1, -1])
WEYL = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]])


def _complex_point(x) -> complex:
    if np.ndim(x) == 0:
        return complex(x)
    x1, x2 = x
    return complex(x1, x2)


def cayley_q(x, etas) -> SuperMatrix:
    """Q at the north chart point x (a radius, a complex number or a point of R^2)."""
    eta1, eta2 = etas
    pool = eta1.pool
    z = _complex_point(x)
    zero = pool.zero()
    p = SuperMatrix.from_blocks(
        pool,
        [[zero, zero], [zero, zero]],
        [[zero, eta1], [eta2, zero]],
        [[zero, eta1], [-eta2, zero]],
        [[zero, pool.scalar(z)], [pool.scalar(-z.conjugate()), zero]],
    )
    one = SuperMatrix.identity(pool, (2, 2))
    sigma = SuperMatrix.from_array(pool, SIGMA, (2, 2))
    return s_mul(sigma, s_mul(one + p, s_inv(one - p)))


def _conjugate(q: SuperMatrix, g: np.ndarray) -> SuperMatrix:
    left = SuperMatrix.from_array(q.pool, g, (2, 2))
    right = SuperMatrix.from_array(q.pool, g.T, (2, 2))
    return s_mul(left, s_mul(q, right))


def _south_q(y, etas) -> SuperMatrix:
    return _conjugate(cayley_q(y, etas), WEYL)


def to_chart_frame(q: SuperMatrix, chart: str) -> SuperMatrix:
    """The point q written in the frame of ``chart``, where its Cayley inverse is the chart point."""
    if chart == "north":
        return q
    return _conjugate(q, WEYL.T)


def cayley_radius2(q: SuperMatrix) -> GrassmannElement:
    """|x|^2 of the north chart point carrying q: P = (Sigma Q + 1)^-1 (Sigma Q - 1)."""
    one = SuperMatrix.identity(q.pool, (2, 2))
    sq = s_mul(SuperMatrix.from_array(q.pool, SIGMA, (2, 2)), q)
    p = s_mul(s_inv(sq + one), sq - one)
    # K = [[0, x], [-x*, 0]]
    return -(p[2, 3] * p[3, 2])


def source_traces(q: SuperMatrix):
    """(u, w) = (Tr sigma_z Q_BB / 2, Tr sigma_z Q_FF / 2)."""
    u = (q[0, 0] - q[1, 1]) * 0.5
    w = (q[2, 2] - q[3, 3]) * 0.5
    return u, w


def _density(x, etas):
    u, _ = source_traces(cayley_q(x, etas))
    r2 = abs(_complex_point(x)) ** 2
    return g_inv(u) * (-1.0 / (2.0 * math.pi * (1.0 + r2)))


EMBEDDINGS = {"north": cayley_q, "south": _south_q}


def _anomaly(inner: str, outer: str):
    embed = EMBEDDINGS[inner]

    def alpha(x, value):
        pool = value.pool
        xis = pool.generators("xi")
        radius2 = cayley_radius2(to_chart_frame(embed(x, xis), outer))
        shift = berezin_top(radius2, pool.blocks["xi"]).body
        r = float(np.linalg.norm(x))
        return 0.5 * r ** 4 * _density(x, xis).body * value.body * shift
    return alpha


def classc_measure(cut: float = 1.0, *, pole: str = "north") -> BerezinMeasure:
    """
    Two-cell measure on the n = 1 superspace: |x| <= cut on the ``pole``
    chart and the rest on the other one, glued along |x| = cut.
    """
    if pole not in POLES:
        raise UsageError(f"pole must be one of {POLES}, got {pole!r}")
    if not cut > 0 or not math.isfinite(cut):
        raise UsageError(f"chart cut must be positive and finite, got {cut}")
    other = "south" if pole == "north" else "north"
    inner = BerezinChart(pole, 2, 2, _density, EMBEDDINGS[pole], Cell(cut))
    outer = BerezinChart(other, 2, 2, _density, EMBEDDINGS[other], Cell(1.0 / cut))
    face = BoundaryFace(pole, other, cut, {pole: _anomaly(pole, other)})
    return BerezinMeasure("classC_n1", (inner, outer), (face,), {"cut": cut, "pole": pole})


def _source_phase(alpha: complex, beta: complex):
    def f(q):
        u, w = source_traces(q)
        return g_exp((alpha * u - beta * w) * (-2j * math.pi))
    return f


def classc_superspace_result(alpha_hat: complex, beta_hat: complex, *, pole: str = "north",
                             cut: float = 1.0, rtol: float = DEFAULT_RTOL) -> BerezinResult:
    alpha_hat = complex(alpha_hat)
    beta_hat = complex(beta_hat)
    if not alpha_hat.imag < 0:
        raise UsageError(f"class C requires Im alpha_hat < 0, got {alpha_hat}")
    measure = classc_measure(cut, pole=pole)
    result = berezin_integrate(measure, _source_phase(alpha_hat, beta_hat), radial=True, rtol=rtol)
    logger.debug("Z(%s, %s) = %s +- %.2g, %s atlas cut at %s",
                 alpha_hat, beta_hat, result.value, result.error, pole, cut)
    return result


def classc_superspace_z(alpha_hat: complex, beta_hat: complex, *, pole: str = "north",
                        cut: float = 1.0, rtol: float = DEFAULT_RTOL) -> complex:
    """
    Z for n = 1 in the scaled sources alpha_hat = N alpha / (pi v),
    beta_hat = N beta / (pi v).
    """
    return classc_superspace_result(alpha_hat, beta_hat, pole=pole, cut=cut, rtol=rtol).value
