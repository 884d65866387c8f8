"""
Berezin measures given chart by chart.

A measure is a list of charts, each with a principal density (the factor
multiplying the flat Berezin form D(x, xi) in that chart) and a cell of the
partition, plus the boundary faces between cells carrying the anomaly
differences. The integral of a superfunction is

    sum over cells  int_cell dx D(xi)[density * f]
  + sum over faces  int_face (alpha_i - alpha_j)[f] dOmega

Cells are balls |x| <= radius around the chart origin (radius may be
infinite); faces are the spheres bounding them, oriented as the boundary of
the cell on their own chart.
"""

from __future__ import annotations

__all__ = [
    "Cell",
    "BerezinChart",
    "BoundaryFace",
    "BerezinMeasure",
    "BerezinResult",
    "berezin_integrate",
    "complex_quad",
    "ball_integral",
    "sphere_integral",
    "sphere_area",
    "DEFAULT_RTOL",
]

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np
from scipy import integrate

from superalg.grassmann import GeneratorPool, GrassmannElement, berezin_top
from superrmt.errors import QuadratureError, UsageError

logger = logging.getLogger(__name__)

DEFAULT_RTOL = 1e-8
ABS_FLOOR = 1e-10

# density(x, xis) -> GrassmannElement, embed(x, xis) -> argument handed to f
Density = Callable[[np.ndarray, list], GrassmannElement]
Embedding = Callable[[np.ndarray, list], Any]
# anomaly(x, value) -> coefficient of the outward solid-angle form at x
Anomaly = Callable[[np.ndarray, GrassmannElement], complex]


def sphere_area(p: int) -> float:
    """Total solid angle of S^(p-1); 2 for p = 1 (two oriented points)."""
    return 2.0 * math.pi ** (p / 2.0) / math.gamma(p / 2.0)


def _tolerances(rtol: float) -> dict:
    return {"epsabs": ABS_FLOOR * 0.01, "epsrel": rtol}


def _check(value: complex, error: float, rtol: float, label: str) -> tuple[complex, float]:
    if error > max(ABS_FLOOR, 10.0 * rtol * abs(value)):
        raise QuadratureError(f"{label}: error estimate {error:.3g} for value {value:.10g}",
                              partial=value, achieved=error)
    return value, error


def complex_quad(fn, lower, upper, *, rtol: float = DEFAULT_RTOL, label: str = "quad") -> tuple[complex, float]:
    opts = dict(_tolerances(rtol), limit=200)
    re, re_err = integrate.quad(lambda t: complex(fn(t)).real, lower, upper, **opts)
    im, im_err = integrate.quad(lambda t: complex(fn(t)).imag, lower, upper, **opts)
    return _check(complex(re, im), math.hypot(re_err, im_err), rtol, label)


def _complex_dblquad(fn, x_range, y_range, rtol, label):
    """fn(x, y); y is the inner variable."""
    opts = _tolerances(rtol)
    re, re_err = integrate.dblquad(lambda y, x: complex(fn(x, y)).real, *x_range, *y_range, **opts)
    im, im_err = integrate.dblquad(lambda y, x: complex(fn(x, y)).imag, *x_range, *y_range, **opts)
    return _check(complex(re, im), math.hypot(re_err, im_err), rtol, label)


def _complex_tplquad(fn, ranges, rtol, label):
    """fn(r, theta, phi) over a box; phi innermost."""
    (r0, r1), (t0, t1), (p0, p1) = ranges
    opts = _tolerances(rtol)
    re, re_err = integrate.tplquad(lambda ph, th, r: complex(fn(r, th, ph)).real,
                                   r0, r1, t0, t1, p0, p1, **opts)
    im, im_err = integrate.tplquad(lambda ph, th, r: complex(fn(r, th, ph)).imag,
                                   r0, r1, t0, t1, p0, p1, **opts)
    return _check(complex(re, im), math.hypot(re_err, im_err), rtol, label)


def _direction(p: int, angles) -> np.ndarray:
    if p == 2:
        (theta,) = angles
        return np.array([math.cos(theta), math.sin(theta)])
    theta, phi = angles
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


def _axis(p: int) -> np.ndarray:
    e = np.zeros(p)
    e[0] = 1.0
    return e


def ball_integral(g: Callable[[np.ndarray], complex], p: int, radius: float, *, radial: bool = False,
                  rtol: float = DEFAULT_RTOL, label: str = "cell") -> tuple[complex, float]:
    """
    int_{|x| <= radius} g(x) d^p x.

    With ``radial`` the integrand is assumed rotation invariant and sampled
    along the first axis. Non-radial integrands are supported for p <= 3.
    """
    if radius == 0:
        return 0j, 0.0
    if radial:
        area = sphere_area(p)
        e = _axis(p)
        return complex_quad(lambda r: area * r ** (p - 1) * g(r * e), 0.0, radius, rtol=rtol, label=label)
    if p == 1:
        return complex_quad(lambda t: g(np.array([t])), -radius, radius, rtol=rtol, label=label)
    if p == 2:
        return _complex_dblquad(lambda r, th: r * g(r * _direction(2, (th,))),
                                (0.0, radius), (0.0, 2.0 * math.pi), rtol, label)
    if p == 3:
        return _complex_tplquad(
            lambda r, th, ph: r * r * math.sin(th) * g(r * _direction(3, (th, ph))),
            ((0.0, radius), (0.0, math.pi), (0.0, 2.0 * math.pi)), rtol, label)
    raise UsageError(f"non-radial cell integrals are implemented for p <= 3, got p = {p}")


def sphere_integral(g: Callable[[np.ndarray], complex], p: int, radius: float, *, radial: bool = False,
                    rtol: float = DEFAULT_RTOL, label: str = "face") -> tuple[complex, float]:
    """int over |x| = radius of g against the outward unit solid-angle form."""
    if radial or p == 1:
        if p == 1:
            # outward orientation: +1 at x = +radius, -1 at x = -radius, Omega = sign(x)
            return complex(g(np.array([radius])) + g(np.array([-radius]))), 0.0
        return complex(sphere_area(p) * g(radius * _axis(p))), 0.0
    if p == 2:
        return complex_quad(lambda th: g(radius * _direction(2, (th,))), 0.0, 2.0 * math.pi,
                            rtol=rtol, label=label)
    if p == 3:
        return _complex_dblquad(lambda th, ph: math.sin(th) * g(radius * _direction(3, (th, ph))),
                                (0.0, math.pi), (0.0, 2.0 * math.pi), rtol, label)
    raise UsageError(f"non-radial face integrals are implemented for p <= 3, got p = {p}")


@dataclass(frozen=True)
class Cell:
    radius: float = math.inf

    def __post_init__(self):
        if not self.radius >= 0:
            raise UsageError(f"cell radius must be non-negative, got {self.radius}")


@dataclass(frozen=True)
class BerezinChart:
    name: str
    p: int
    q: int
    density: Density
    embed: Embedding
    cell: Cell = field(default_factory=Cell)

    def evaluate(self, f, x: np.ndarray, pool: GeneratorPool) -> GrassmannElement:
        xis = pool.generators("xi")
        value = f(self.embed(x, xis))
        if not isinstance(value, GrassmannElement):
            value = pool.scalar(complex(value))
        return value

    def principal(self, f, x: np.ndarray, pool: GeneratorPool) -> complex:
        """D(xi)[density * f] at the bosonic point x."""
        xis = pool.generators("xi")
        top = berezin_top(self.density(x, xis) * self.evaluate(f, x, pool), pool.blocks["xi"])
        return top.body


@dataclass(frozen=True)
class BoundaryFace:
    """
    The sphere |x| = radius on ``chart``, bounding that chart's cell.

    ``anomalies`` maps chart names to alpha_i written in the coordinates of
    ``chart``; the face contributes alpha_inner - alpha_outer.
    """
    chart: str
    outer: str
    radius: float
    anomalies: Mapping[str, Anomaly] = field(default_factory=dict)

    def coefficient(self, x: np.ndarray, value: GrassmannElement) -> complex:
        inner = self.anomalies.get(self.chart)
        outer = self.anomalies.get(self.outer)
        total = 0j
        if inner is not None:
            total += complex(inner(x, value))
        if outer is not None:
            total -= complex(outer(x, value))
        return total


@dataclass(frozen=True)
class BerezinMeasure:
    name: str
    charts: tuple[BerezinChart, ...]
    faces: tuple[BoundaryFace, ...] = ()
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        names = [c.name for c in self.charts]
        if len(set(names)) != len(names):
            raise UsageError(f"{self.name}: duplicate chart names {names}")
        if len({(c.p, c.q) for c in self.charts}) > 1:
            raise UsageError(f"{self.name}: charts disagree on the dimension")
        for face in self.faces:
            if face.chart not in names or face.outer not in names:
                raise UsageError(f"{self.name}: face refers to unknown chart")

    @property
    def p(self) -> int:
        return self.charts[0].p

    @property
    def q(self) -> int:
        return self.charts[0].q

    def chart(self, name: str) -> BerezinChart:
        for c in self.charts:
            if c.name == name:
                return c
        raise KeyError(name)

    def pool(self) -> GeneratorPool:
        pool = GeneratorPool()
        pool.allocate("xi", self.q)
        return pool


@dataclass(frozen=True)
class BerezinResult:
    value: complex
    error: float
    cells: dict[str, complex]

    def as_record(self) -> dict:
        return {
            "value": [self.value.real, self.value.imag],
            "error": self.error,
            "cells": {k: [v.real, v.imag] for k, v in self.cells.items()},
        }


def berezin_integrate(measure: BerezinMeasure, f, *, radial: bool = False,
                      rtol: float = DEFAULT_RTOL) -> BerezinResult:
    """
    Cell sum plus anomaly faces.

    A failing cell raises :class:`QuadratureError` whose ``partial`` is the
    breakdown accumulated so far.
    """
    pool = measure.pool()
    breakdown: dict[str, complex] = {}
    errors = []

    def run(label, job):
        try:
            value, err = job()
        except QuadratureError as exc:
            breakdown[label] = exc.partial
            raise QuadratureError(f"{measure.name}: {exc}", partial=dict(breakdown),
                                  achieved=exc.achieved) from exc
        breakdown[label] = value
        errors.append(err)

    for chart in measure.charts:
        run(f"cell:{chart.name}", lambda chart=chart: ball_integral(
            lambda x: chart.principal(f, x, pool), chart.p, chart.cell.radius,
            radial=radial, rtol=rtol, label=f"{measure.name} cell {chart.name}"))
    for face in measure.faces:
        chart = measure.chart(face.chart)

        def coefficient(x, chart=chart, face=face):
            return face.coefficient(x, chart.evaluate(f, x, pool))

        run(f"face:{face.chart}|{face.outer}", lambda chart=chart, face=face, coefficient=coefficient:
            sphere_integral(coefficient, chart.p, face.radius, radial=radial, rtol=rtol,
                            label=f"{measure.name} face {face.chart}|{face.outer}"))
    value = complex(math.fsum(v.real for v in breakdown.values()),
                    math.fsum(v.imag for v in breakdown.values()))
    logger.debug("%s: %s from %s", measure.name, value, breakdown)
    return BerezinResult(value, math.fsum(errors), breakdown)
