"""
Gaussian ensembles over the constrained Hamiltonian spaces.

``sample_h`` draws an isotropic complex Gaussian matrix and projects it,
orthogonally in the Frobenius metric, onto the admissible Hamiltonians of the
class. The projection of an isotropic Gaussian onto a subspace is isotropic
on that subspace, so the result is distributed as exp(-N Tr H^2 / 2v^2) dH
without building a basis.
"""

from __future__ import annotations

__all__ = [
    "EnsembleSpec",
    "sample_h",
    "symmetry_residual",
    "second_moment_exact",
    "second_moment_mc",
    "eigenvalues",
    "export_matrices_csv",
]

import csv
import logging
from dataclasses import dataclass
from functools import cached_property, partial
from pathlib import Path

import numpy as np

from superrmt.errors import OutputError, UsageError
from superrmt.keyvalue import parse_key_values, render_key_values
from .classes import SymmetryClass, get_class
from .structure import ClassStructure, class_structure

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EnsembleSpec:
    cls: SymmetryClass
    N: int
    v: float = 1.0
    seed: int | None = None
    p: int | None = None
    q: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "cls", get_class(self.cls))
        if int(self.N) != self.N or self.N < 1:
            raise UsageError(f"N must be a positive integer, got {self.N}")
        if not self.v > 0:
            raise UsageError(f"width v must be positive, got {self.v}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "v", float(self.v))
        # validates p = q for the chiral classes
        self.structure

    @cached_property
    def structure(self) -> ClassStructure:
        return class_structure(self.cls, self.N, 1, p=self.p, q=self.q)

    @property
    def dimension(self) -> int:
        """Size of the physical space V."""
        return self.structure.dimension

    @property
    def layout(self):
        return self.structure.constraints

    def rng(self, seed: int | None = None) -> np.random.Generator:
        return np.random.default_rng(self.seed if seed is None else seed)

    def snapshot(self) -> dict:
        return {"cls": self.cls.label, "N": self.N, "v": self.v, "seed": self.seed,
                "p": self.p, "q": self.q}

    def to_config(self) -> str:
        return render_key_values(self.snapshot())

    @classmethod
    def from_config(spec_type, text: str, source: str = "<config>") -> "EnsembleSpec":
        values = parse_key_values(text, source)
        unknown = set(values) - {"cls", "class", "N", "v", "seed", "p", "q"}
        if unknown:
            raise UsageError(f"{source}: unknown ensemble keys {sorted(unknown)}")
        try:
            return spec_type(
                cls=values.get("cls", values.get("class", "A")),
                N=int(values["N"]),
                v=float(values.get("v", 1.0)),
                seed=int(values["seed"]) if "seed" in values else None,
                p=int(values["p"]) if "p" in values else None,
                q=int(values["q"]) if "q" in values else None,
            )
        except KeyError as exc:
            raise UsageError(f"{source}: missing key {exc.args[0]!r}") from None
        except ValueError as exc:
            if isinstance(exc, UsageError):
                raise
            raise UsageError(f"{source}: {exc}") from None

    def __str__(self):
        return f"{self.cls.label}(N={self.N}, v={self.v:g})"


def sample_h(spec: EnsembleSpec, rng: np.random.Generator) -> np.ndarray:
    d = spec.dimension
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = spec.structure.project_hermitian(g)
    return h * (spec.v / np.sqrt(spec.N))


def _check_square(spec: EnsembleSpec, *matrices) -> None:
    d = spec.dimension
    for m in matrices:
        if np.shape(m) != (d, d):
            raise UsageError(f"{spec}: expected a {d}x{d} matrix, got shape {np.shape(m)}")


def symmetry_residual(spec: EnsembleSpec, h: np.ndarray) -> float:
    h = np.asarray(h, dtype=complex)
    _check_square(spec, h)
    return spec.structure.residual(h)


def second_moment_exact(spec: EnsembleSpec, a: np.ndarray, b: np.ndarray) -> complex:
    """
    (v^2/N) Tr(A Pi(B)), Pi the group average over the class involutions.

    Expands to the printed laws, e.g. (v^2/2N) Tr(AB - A C B^T C^-1) for
    class C and (v^2/2N) Tr(AB + A B^T) for class AI.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    _check_square(spec, a, b)
    return complex(spec.v**2 / spec.N * np.trace(a @ spec.structure.project(b)))


def moment_kernel(a: np.ndarray, b: np.ndarray, h: np.ndarray) -> complex:
    return np.trace(a @ h) * np.trace(b @ h)


def second_moment_mc(spec: EnsembleSpec, a, b, nsamples: int, rng=None, *,
                     workers: int = 1, progress: bool = False) -> tuple[complex, float]:
    """Sample mean of Tr(AH) Tr(BH) and its standard error."""
    from .montecarlo import run_estimator

    if nsamples < 2:
        raise UsageError(f"second_moment_mc needs at least 2 samples, got {nsamples}")
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    _check_square(spec, a, b)
    result = run_estimator(spec, partial(moment_kernel, a, b), nsamples, rng,
                           workers=workers, progress=progress)
    return result.mean(), result.stderr()


def eigenvalues(h: np.ndarray, atol: float = 1e-10) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise UsageError(f"eigenvalues needs a square matrix, got shape {h.shape}")
    scale = max(1.0, float(np.linalg.norm(h)))
    if np.linalg.norm(h - h.conj().T) > atol * scale:
        raise UsageError("eigenvalues: matrix is not self-adjoint")
    return np.linalg.eigvalsh(h)


def export_matrices_csv(matrices, path) -> Path:
    """
    One CSV line per matrix row: sample index, row index, then re/im pairs.
    """
    path = Path(path)
    matrices = [np.asarray(m, dtype=complex) for m in matrices]
    d = matrices[0].shape[1] if matrices else 0
    header = ["sample", "row"]
    for j in range(d):
        header += [f"re_{j}", f"im_{j}"]
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for s, m in enumerate(matrices):
                for i, row in enumerate(m):
                    cells = [s, i]
                    for z in row:
                        cells += [repr(float(z.real)), repr(float(z.imag))]
                    writer.writerow(cells)
    except OSError as exc:
        raise OutputError(f"could not write matrices: {exc.strerror or exc}", path) from exc
    logger.info("wrote %s matrices to %s", len(matrices), path)
    return path
