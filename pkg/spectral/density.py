"""
Level density: Wigner's semicircle and Monte Carlo histograms.
"""

from __future__ import annotations

__all__ = [
    "semicircle_density",
    "SpectralHistogram",
    "dos_estimate",
    "spectral_symmetry_residual",
    "spectrum",
]

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ensembles.montecarlo import run_estimator
from ensembles.sampling import EnsembleSpec
from superrmt.errors import UsageError

logger = logging.getLogger(__name__)

MIN_DOS_SAMPLES = 100


def semicircle_density(E, N, v):
    """(N / pi v) sqrt(1 - (E/2v)^2) inside |E| <= 2v, zero outside."""
    E = np.asarray(E, dtype=float)
    x = E / (2.0 * v)
    inside = np.clip(1.0 - x * x, 0.0, None)
    rho = N / (math.pi * v) * np.sqrt(inside)
    return float(rho) if rho.ndim == 0 else rho


def spectrum(h: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(h)


def spectral_symmetry_residual(evals) -> float:
    """max_i |lambda_i + lambda_(rev i)| for an ascending spectrum."""
    ev = np.sort(np.asarray(evals, dtype=float))
    return float(np.max(np.abs(ev + ev[::-1]))) if ev.size else 0.0


@dataclass(frozen=True, eq=False)
class SpectralHistogram:
    edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray
    stderr: np.ndarray
    nsamples: int
    spec: dict = field(default_factory=dict)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    def total(self) -> float:
        """Bin sum of the density; the mean number of eigenvalues per matrix in range."""
        return math.fsum(self.density * self.widths)

    def deviation_from(self, reference, window: float) -> float:
        """sup |density - reference| over bins with |center| <= window, relative to reference(0)."""
        centers = self.centers
        mask = np.abs(centers) <= window
        ref = np.asarray(reference(centers[mask]))
        scale = float(reference(np.array([0.0]))[0])
        return float(np.max(np.abs(self.density[mask] - ref)) / scale)

    def rows(self) -> list[dict]:
        return [
            {"bin_lo": float(lo), "bin_hi": float(hi), "density": float(d), "stderr": float(s)}
            for lo, hi, d, s in zip(self.edges[:-1], self.edges[1:], self.density, self.stderr)
        ]


def dos_estimate(spec: EnsembleSpec, nsamples: int, bins: int = 60, rng=None, *,
                 energy_range: tuple[float, float] | None = None, workers: int = 1,
                 progress: bool = False) -> SpectralHistogram:
    """
    Histogram of all eigenvalues, normalized to a density per matrix.

    Per-bin standard errors come from the spread of the per-matrix counts.
    """
    if nsamples < MIN_DOS_SAMPLES:
        raise UsageError(f"dos_estimate needs at least {MIN_DOS_SAMPLES} samples, got {nsamples}")
    if bins < 1:
        raise UsageError(f"bins must be positive, got {bins}")
    result = run_estimator(spec, spectrum, nsamples, rng, workers=workers, progress=progress)
    levels = result.values.real
    if energy_range is None:
        reach = 1.05 * float(np.max(np.abs(levels)))
        energy_range = (-reach, reach)
    edges = np.linspace(energy_range[0], energy_range[1], bins + 1)
    per_matrix = np.array([np.histogram(row, bins=edges)[0] for row in levels], dtype=float)
    widths = np.diff(edges)
    counts = per_matrix.sum(axis=0)
    density = per_matrix.mean(axis=0) / widths
    stderr = per_matrix.std(axis=0, ddof=1) / math.sqrt(nsamples) / widths
    logger.info("%s: %s levels histogrammed into %s bins", spec, levels.size, bins)
    snapshot = dict(spec.snapshot(), seed=result.seed)
    return SpectralHistogram(edges, counts, density, stderr, nsamples, snapshot)
