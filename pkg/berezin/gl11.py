"""
Berezin-Haar integral on Gl(1|1) over the real form R+ x S^1.

A single cell -inf < x < inf, -pi < y < pi in the Lie-algebra coordinates
g = exp([[x, zeta1], [zeta2, iy]]) gives

    int omega[f] = 1/4pi  int dx dy  w^2 / (cosh w - 1)  d_zeta1 d_zeta2 f(g)
                 + 1/2    int dx  f(diag(e^x, -1)) / (cosh x + 1),      w = x - iy,

the second line being the anomaly picked up on the cell boundary y = +-pi.
"""

from __future__ import annotations

__all__ = ["gl11_exp", "gl11_integral", "Gl11Result"]

import cmath
import logging
import math
from dataclasses import dataclass

import numpy as np

from superalg.grassmann import GeneratorPool, GrassmannElement, berezin_top
from superalg.supermatrix import SuperMatrix
from superrmt.errors import DivergenceError, QuadratureError
from .measure import DEFAULT_RTOL, _complex_dblquad, complex_quad

logger = logging.getLogger(__name__)

DEFAULT_CUTOFF = 30.0
SMALL = 1e-2


def _divided(delta: complex) -> complex:
    """(e^delta - 1) / delta."""
    if abs(delta) < SMALL:
        return 1 + delta / 2 + delta**2 / 6 + delta**3 / 24 + delta**4 / 120 + delta**5 / 720
    return (cmath.exp(delta) - 1) / delta


def _second(delta: complex) -> complex:
    """(e^delta - 1 - delta) / delta^2."""
    if abs(delta) < SMALL:
        return 0.5 + delta / 6 + delta**2 / 24 + delta**3 / 120 + delta**4 / 720 + delta**5 / 5040
    return (cmath.exp(delta) - 1 - delta) / delta**2


def gl11_exp(z1: complex, z2: complex, zeta1: GrassmannElement, zeta2: GrassmannElement) -> SuperMatrix:
    """
    exp([[z1, zeta1], [zeta2, z2]]) in closed form:

        a = e^z1 (1 + zeta1 zeta2 h(d)),   d = e^z2 (1 - zeta1 zeta2 h(-d)),
        beta = zeta1 e^z1 E(d),            gamma = zeta2 e^z1 E(d),

    with d = z2 - z1, E(d) = (e^d - 1)/d and h(d) = (e^d - 1 - d)/d^2.
    """
    pool = zeta1.pool
    delta = complex(z2) - complex(z1)
    e1 = cmath.exp(z1)
    e2 = cmath.exp(z2)
    pair = zeta1 * zeta2
    a = (1 + pair * _second(delta)) * e1
    d = (1 - pair * _second(-delta)) * e2
    spread = e1 * _divided(delta)
    return SuperMatrix.from_blocks(pool, [[a]], [[zeta1 * spread]], [[zeta2 * spread]], [[d]])


def _haar_weight(w: complex) -> complex:
    """w^2 / (cosh w - 1) = 2 (s / sinh s)^2 with s = w/2; equals 2 at w = 0."""
    s = w / 2
    if s == 0:
        return 2.0 + 0j
    return 2.0 * (s / cmath.sinh(s)) ** 2


@dataclass(frozen=True)
class Gl11Result:
    value: complex
    principal: complex
    anomaly: complex
    cutoff: float

    def as_record(self) -> dict:
        return {
            "value": [self.value.real, self.value.imag],
            "cells": {"principal": [self.principal.real, self.principal.imag],
                      "anomaly": [self.anomaly.real, self.anomaly.imag]},
            "cutoff": self.cutoff,
        }


def _lift(pool: GeneratorPool, value) -> GrassmannElement:
    if isinstance(value, GrassmannElement):
        return value
    return pool.scalar(complex(value))


def _truncated(f, cutoff: float, rtol: float) -> Gl11Result:
    pool = GeneratorPool()
    pool.allocate("zeta", 2)
    zeta1, zeta2 = pool.generators("zeta")

    def principal(x, y):
        g = gl11_exp(x, 1j * y, zeta1, zeta2)
        top = berezin_top(_lift(pool, f(g)), pool.blocks["zeta"]).body
        return _haar_weight(complex(x, -y)) * top / (4.0 * math.pi)

    def anomaly(x):
        g = SuperMatrix.from_array(pool, np.diag([math.exp(x), -1.0]), (1, 1))
        return 0.5 * _lift(pool, f(g)).body / (math.cosh(x) + 1.0)

    p_value, _ = _complex_dblquad(principal, (-cutoff, cutoff), (-math.pi, math.pi), rtol, "Gl(1|1) principal")
    a_value, _ = complex_quad(anomaly, -cutoff, cutoff, rtol=rtol, label="Gl(1|1) anomaly")
    return Gl11Result(p_value + a_value, p_value, a_value, cutoff)


def gl11_integral(f, *, cutoff: float = DEFAULT_CUTOFF, rtol: float = DEFAULT_RTOL,
                  tail_tol: float = 1e-6) -> Gl11Result:
    """
    Integrate ``f(g)``, g a (1|1) SuperMatrix, against the Berezin-Haar measure.

    The x range is cut at +-cutoff and again at +-2 cutoff; disagreement
    beyond ``tail_tol`` means the integrand does not decay.
    """
    try:
        near = _truncated(f, cutoff, rtol)
        far = _truncated(f, 2 * cutoff, rtol)
    except QuadratureError as exc:
        raise DivergenceError(f"Gl(1|1) integral did not converge: {exc}") from exc
    gap = abs(far.value - near.value)
    if gap > tail_tol * max(1.0, abs(far.value)):
        raise DivergenceError(
            f"Gl(1|1) integral depends on the cutoff: {near.value:.8g} at {cutoff:g}, "
            f"{far.value:.8g} at {2 * cutoff:g}")
    logger.debug("Gl(1|1) integral %s (principal %s, anomaly %s)", far.value, far.principal, far.anomaly)
    return far
