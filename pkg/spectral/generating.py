"""
Generating function of ratios of spectral determinants

    Z(alpha, beta) = < prod_i Det(H - beta_i) / Det(H - alpha_i) >

by Monte Carlo over any ensemble, by deterministic quadrature at N = 1 for
classes A and C, and in the large-N class-C limit in closed form.
"""

from __future__ import annotations

__all__ = [
    "SourceMatrix",
    "ratio_kernel",
    "z_gen_mc",
    "z_gen_quadrature",
    "classc_limit_closed_form",
    "scaled_sources",
    "resolvent_from_z",
]

import logging
import math
from dataclasses import dataclass
from functools import partial

import numpy as np
from scipy import integrate

from ensembles.classes import get_class
from ensembles.montecarlo import run_estimator
from ensembles.sampling import EnsembleSpec
from ensembles.structure import SIGMA_Z, kron
from superrmt.errors import QuadratureError, UnsupportedClassError, UsageError

logger = logging.getLogger(__name__)

QUADRATURE_TOL = 1e-8


@dataclass(frozen=True)
class SourceMatrix:
    alphas: tuple[complex, ...]
    betas: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(complex(a) for a in self.alphas))
        object.__setattr__(self, "betas", tuple(complex(b) for b in self.betas))
        if not self.alphas or len(self.alphas) != len(self.betas):
            raise UsageError(
                f"need equally many alphas and betas, got {len(self.alphas)} and {len(self.betas)}")

    @property
    def n(self) -> int:
        return len(self.alphas)

    @property
    def n_advanced(self) -> int:
        return sum(1 for a in self.alphas if a.imag < 0)

    @property
    def n_retarded(self) -> int:
        return self.n - self.n_advanced

    def validate(self, cls) -> "SourceMatrix":
        cls = get_class(cls)
        for a in self.alphas:
            if a.imag == 0:
                raise UsageError(f"alpha = {a} lies on the real axis")
        if cls.particle_hole:
            if any(a.imag > 0 for a in self.alphas):
                raise UsageError(f"class {cls.label} requires Im alpha_i < 0 for every i")
        else:
            signs = [a.imag < 0 for a in self.alphas]
            if signs != sorted(signs, reverse=True):
                raise UsageError(
                    f"class {cls.label}: list the n_A alphas with Im < 0 before the n_R with Im > 0")
        return self

    def reversed_pair(self, k: int) -> "SourceMatrix":
        """(alpha_k, beta_k) -> (-alpha_k, -beta_k)."""
        alphas, betas = list(self.alphas), list(self.betas)
        alphas[k], betas[k] = -alphas[k], -betas[k]
        return SourceMatrix(alphas, betas)

    def omega(self, cls) -> np.ndarray:
        """
        Diagonal source matrix on W = W_B + W_F.

        Particle-hole classes carry a sigma_z particle-hole factor, the
        Wigner-Dyson doublings (AI, AII) a unit 2x2 factor.
        """
        cls = get_class(cls)
        blocks = []
        for values in (self.alphas, self.betas):
            d = np.diag(np.asarray(values, dtype=complex))
            if cls.label in ("CI", "DIII", "BDI", "CII"):
                d = kron(SIGMA_Z, np.eye(2), d)
            elif cls.particle_hole:
                d = kron(SIGMA_Z, d)
            elif cls.label in ("AI", "AII"):
                d = kron(np.eye(2), d)
            blocks.append(d)
        m_b, m_f = (len(b) for b in blocks)
        out = np.zeros((m_b + m_f, m_b + m_f), dtype=complex)
        out[:m_b, :m_b] = blocks[0]
        out[m_b:, m_b:] = blocks[1]
        return out

    def snapshot(self) -> dict:
        return {
            "alphas": [[a.real, a.imag] for a in self.alphas],
            "betas": [[b.real, b.imag] for b in self.betas],
        }


def ratio_kernel(alphas, betas, h: np.ndarray) -> complex:
    """prod_i prod_lambda (lambda - beta_i) / (lambda - alpha_i) over the spectrum of h."""
    levels = np.linalg.eigvalsh(h)
    out = 1.0 + 0j
    for a, b in zip(alphas, betas):
        if a == b:
            continue
        out *= np.prod((levels - b) / (levels - a))
    return complex(out)


def z_gen_mc(spec: EnsembleSpec, src: SourceMatrix, nsamples: int, rng=None, *,
             workers: int = 1, progress: bool = False) -> tuple[complex, float]:
    src.validate(spec.cls)
    if nsamples < 2:
        raise UsageError(f"z_gen_mc needs at least 2 samples, got {nsamples}")
    kernel = partial(ratio_kernel, src.alphas, src.betas)
    result = run_estimator(spec, kernel, nsamples, rng, workers=workers, progress=progress)
    estimate, stderr = result.mean(), result.stderr()
    logger.info("%s: Z = %s +- %.3g over %s samples", spec, estimate, stderr, nsamples)
    return estimate, stderr


def _ratio(alphas, betas, x):
    out = 1.0 + 0j
    for a, b in zip(alphas, betas):
        out *= (x - b) / (x - a)
    return out


def _complex_quad(fn, lower, upper, label: str) -> complex:
    re, re_err = integrate.quad(lambda x: fn(x).real, lower, upper, epsabs=1e-12, epsrel=1e-12, limit=400)
    im, im_err = integrate.quad(lambda x: fn(x).imag, lower, upper, epsabs=1e-12, epsrel=1e-12, limit=400)
    achieved = max(re_err, im_err)
    if achieved > QUADRATURE_TOL:
        raise QuadratureError(f"{label}: quadrature error {achieved:.3g} above {QUADRATURE_TOL:g}",
                              partial=complex(re, im), achieved=achieved)
    return complex(re, im)


def z_gen_quadrature(spec: EnsembleSpec, src: SourceMatrix) -> complex:
    """
    Deterministic ensemble average at N = 1.

    Class A: H = h is a real Gaussian of variance v^2. Class C: H =
    [[a, b], [b*, -a]] with (a, Re b, Im b) Gaussian of variance v^2/2 each;
    Det((H - beta)/(H - alpha)) = (beta^2 - r^2)/(alpha^2 - r^2) with
    r^2 = a^2 + |b|^2, so the three-dimensional integral is done radially.
    """
    if spec.N != 1:
        raise UsageError(f"z_gen_quadrature needs N = 1, got N = {spec.N}")
    src.validate(spec.cls)
    v = spec.v
    label = spec.cls.label
    if label == "A":
        norm = 1.0 / math.sqrt(2.0 * math.pi * v * v)

        def integrand(h):
            return norm * math.exp(-h * h / (2.0 * v * v)) * _ratio(src.alphas, src.betas, h)

        return _complex_quad(integrand, -np.inf, np.inf, f"{spec} quadrature")
    if label == "C":
        norm = 4.0 * math.pi / (math.pi * v * v) ** 1.5
        alphas2 = [a * a for a in src.alphas]
        betas2 = [b * b for b in src.betas]

        def integrand(r):
            return norm * r * r * math.exp(-r * r / (v * v)) * _ratio(alphas2, betas2, r * r)

        return _complex_quad(integrand, 0.0, np.inf, f"{spec} quadrature")
    raise UnsupportedClassError(f"z_gen_quadrature covers classes A and C, not {label}")


def classc_limit_closed_form(alpha_hat, beta_hat) -> complex:
    """
    Large-N class-C limit of Z for n = 1 in the scaled sources
    alpha_hat = N alpha / (pi v), beta_hat = N beta / (pi v):

        exp(-2 pi i alpha_hat) [cos(2 pi beta_hat) + 2 pi i alpha_hat sinc(2 beta_hat)]

    which equals [(a+b) e^{-2pi i(a-b)} - (a-b) e^{-2pi i(a+b)}] / 2b and is
    regular at beta_hat = 0.
    """
    a = complex(alpha_hat)
    b = complex(beta_hat)
    return complex(np.exp(-2j * np.pi * a) * (np.cos(2 * np.pi * b) + 2j * np.pi * a * np.sinc(2 * b)))


def scaled_sources(spec: EnsembleSpec, src_hat: SourceMatrix) -> SourceMatrix:
    """omega = pi v omega_hat / N."""
    scale = math.pi * spec.v / spec.N
    return SourceMatrix([scale * a for a in src_hat.alphas], [scale * b for b in src_hat.betas])


def resolvent_from_z(spec: EnsembleSpec, z: complex, step: float = 1e-4) -> complex:
    """< Tr (H - z)^-1 > as the central difference of Z in alpha at alpha = beta = z."""
    z = complex(z)
    upper = z_gen_quadrature(spec, SourceMatrix([z + step], [z]))
    lower = z_gen_quadrature(spec, SourceMatrix([z - step], [z]))
    return (upper - lower) / (2.0 * step)
