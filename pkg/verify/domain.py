"""
The boundary-free integration domain for the boson-boson block of Q.

A point is b (X + e^Y beta e^-Y) with X antihermitian and commuting with
beta, Y Hermitian and anticommuting with beta, both inside the normalizer
algebra of the class. The Gaussian weight exp(-Tr(Z psi psi^dagger beta))
then has a real part that is never positive.
"""

from __future__ import annotations

__all__ = [
    "DomainGenerators",
    "schafer_wegner_embed",
    "domain_exponent",
    "random_generators",
    "domain_probe",
]

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.spatial.distance import pdist

from ensembles.structure import ClassStructure, class_structure
from superrmt.errors import NumericalError, UsageError
from .reports import VerificationReport, pair

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-10
MAX_SWEEPS = 50


@dataclass(frozen=True, eq=False)
class DomainGenerators:
    """Boson-boson block data of a class structure."""

    structure: ClassStructure

    @property
    def size(self) -> int:
        return self.structure.aux_grading[0]

    @property
    def beta(self) -> np.ndarray:
        m = self.size
        return self.structure.beta[:m, :m]

    def algebra_residual(self, x: np.ndarray) -> float:
        """Distance of a boson-boson block from the normalizer algebra."""
        m_b, m_f = self.structure.aux_grading
        full = np.zeros((m_b + m_f, m_b + m_f), dtype=complex)
        full[:m_b, :m_b] = x
        out = 0.0
        for c in self.structure.aux_constraints:
            out = max(out, float(np.linalg.norm(x - c.apply(full, m_b)[:m_b, :m_b])))
        return out

    def project_algebra(self, x: np.ndarray) -> np.ndarray:
        m_b, m_f = self.structure.aux_grading
        for c in self.structure.aux_constraints:
            full = np.zeros((m_b + m_f, m_b + m_f), dtype=complex)
            full[:m_b, :m_b] = x
            x = 0.5 * (x + c.apply(full, m_b)[:m_b, :m_b])
        return x

    def compact_residual(self, x: np.ndarray) -> float:
        beta = self.beta
        return max(
            float(np.linalg.norm(x + x.conj().T)),
            float(np.linalg.norm(x @ beta - beta @ x)),
            self.algebra_residual(x),
        )

    def noncompact_residual(self, y: np.ndarray) -> float:
        beta = self.beta
        return max(
            float(np.linalg.norm(y - y.conj().T)),
            float(np.linalg.norm(y @ beta + beta @ y)),
            self.algebra_residual(y),
        )


def schafer_wegner_embed(b: float, x, y, structure: ClassStructure) -> np.ndarray:
    """b (X + e^Y beta e^-Y) for an admissible pair (X, Y)."""
    if not b > 0:
        raise UsageError(f"the domain scale b must be positive, got {b}")
    gens = DomainGenerators(structure)
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    m = gens.size
    if x.shape != (m, m) or y.shape != (m, m):
        raise UsageError(f"X and Y must be {m}x{m} boson-boson blocks, got {x.shape} and {y.shape}")
    scale = max(1.0, float(np.linalg.norm(x)), float(np.linalg.norm(y)))
    if (res := gens.compact_residual(x)) > RESIDUAL_TOL * scale:
        raise UsageError(f"X is not in the compact part (residual {res:.3g})")
    if (res := gens.noncompact_residual(y)) > RESIDUAL_TOL * scale:
        raise UsageError(f"Y is not in the noncompact part (residual {res:.3g})")
    return b * (x + expm(y) @ gens.beta @ expm(-y))


def domain_exponent(z: np.ndarray, psi: np.ndarray, structure: ClassStructure) -> complex:
    """-Tr(Z psi psi^dagger beta) for one boson column psi."""
    beta = DomainGenerators(structure).beta
    psi = np.asarray(psi, dtype=complex).reshape(-1, 1)
    return complex(-np.trace(z @ psi @ psi.conj().T @ beta))


def _alternate(x: np.ndarray, steps, residual) -> np.ndarray:
    for _ in range(MAX_SWEEPS):
        for step in steps:
            x = step(x)
        if residual(x) < 1e-13 * max(1.0, float(np.linalg.norm(x))):
            return x
    raise NumericalError(f"alternating projections stalled at residual {residual(x):.3g}")


def random_generators(structure: ClassStructure, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """A random admissible pair (X, Y), Gaussian before projection."""
    gens = DomainGenerators(structure)
    m = gens.size
    beta = gens.beta

    def draw():
        return rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))

    x = _alternate(draw(), (
        lambda a: 0.5 * (a - a.conj().T),
        lambda a: 0.5 * (a + beta @ a @ beta),
        gens.project_algebra,
    ), gens.compact_residual)
    y = _alternate(draw(), (
        lambda a: 0.5 * (a + a.conj().T),
        lambda a: 0.5 * (a - beta @ a @ beta),
        gens.project_algebra,
    ), gens.noncompact_residual)
    return x, y


def domain_probe(cls, n: int = 1, n_advanced: int | None = None, *, samples: int = 1000,
                 b: float = 1.0, rng=None) -> VerificationReport:
    """
    Injectivity of the embedding on random pairs and the sign of the
    Gaussian exponent at random points with random psi.
    """
    if samples < 2:
        raise UsageError(f"domain_probe needs at least 2 samples, got {samples}")
    rng = np.random.default_rng(rng)
    structure = class_structure(cls, 1, n, n_advanced=n_advanced)
    gens = DomainGenerators(structure)
    points = []
    worst = -np.inf
    for _ in range(samples):
        x, y = random_generators(structure, rng)
        z = schafer_wegner_embed(b, x, y, structure)
        points.append(np.concatenate([z.real.ravel(), z.imag.ravel()]))
        psi = rng.standard_normal(gens.size) + 1j * rng.standard_normal(gens.size)
        worst = max(worst, domain_exponent(z, psi, structure).real)
    min_distance = float(pdist(np.array(points)).min())
    label = structure.cls.label
    excess = max(float(worst), 0.0)
    logger.info("domain probe %s: min distance %.3g, max Re exponent %.3g", label, min_distance, worst)
    return VerificationReport(
        identity=f"domain[{label},n={n}]",
        lhs=pair(worst),
        rhs=(0.0, 0.0),
        abs_deviation=excess,
        rel_deviation=excess,
        abs_tol=RESIDUAL_TOL,
        rel_tol=0.0,
        passed=bool(min_distance > 0 and excess <= RESIDUAL_TOL),
        method={"samples": samples, "b": b, "n_advanced": structure.n_advanced, "block_size": gens.size},
        rows=[{"min_pairwise_distance": min_distance, "max_re_exponent": float(worst)}],
        message="max Re exponent against 0; injectivity by min pairwise distance",
    )
