"""
Seeded, chunked Monte Carlo over an ensemble.

The sample index range is cut into fixed-size chunks. Chunk ``k`` draws from
its own stream ``default_rng(SeedSequence(seed).spawn(n_chunks)[k])``, so the
samples depend on (seed, nsamples, chunk_size) only and not on the number of
workers. Reductions use ``math.fsum``, which is exactly rounded and therefore
independent of the order chunks come back in.
"""

from __future__ import annotations

__all__ = ["MonteCarloResult", "run_estimator", "resolve_seed", "fsum_complex"]

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from tqdm import tqdm

from superrmt.errors import UsageError
from .sampling import EnsembleSpec, sample_h

logger = logging.getLogger(__name__)

DEFAULT_CHUNK = 500


def resolve_seed(rng, spec: EnsembleSpec | None = None) -> int:
    """An integer root seed from an int, a Generator, or EnsembleSpec.seed."""
    if rng is None:
        if spec is not None and spec.seed is not None:
            return int(spec.seed)
        return int(np.random.SeedSequence().entropy % (1 << 63))
    if isinstance(rng, np.random.Generator):
        return int(rng.integers(0, 1 << 63))
    if isinstance(rng, np.random.SeedSequence):
        return int(rng.generate_state(2, dtype=np.uint64)[0] >> 1)
    return int(rng)


def fsum_complex(values) -> complex:
    values = np.asarray(values, dtype=complex).ravel()
    return complex(math.fsum(values.real), math.fsum(values.imag))


@dataclass(frozen=True, eq=False)
class MonteCarloResult:
    """Per-sample values (first axis indexes samples) plus the seed that made them."""

    values: np.ndarray
    seed: int
    chunk_size: int

    @property
    def nsamples(self) -> int:
        return int(self.values.shape[0])

    def mean(self) -> complex:
        return fsum_complex(self.values) / self.nsamples

    def stderr(self) -> float:
        """max(stderr of Re, stderr of Im)."""
        n = self.nsamples
        if n < 2:
            return math.inf
        mu = self.mean()
        out = 0.0
        for part, centre in ((self.values.real, mu.real), (self.values.imag, mu.imag)):
            var = math.fsum(((part - centre) ** 2).ravel()) / (n - 1)
            out = max(out, math.sqrt(var / n))
        return out

    def stacked(self) -> np.ndarray:
        return self.values


def _run_chunk(spec: EnsembleSpec, kernel, seed_seq: np.random.SeedSequence, count: int) -> np.ndarray:
    rng = np.random.default_rng(seed_seq)
    return np.array([kernel(sample_h(spec, rng)) for _ in range(count)])


def run_estimator(spec: EnsembleSpec, kernel, nsamples: int, rng=None, *, workers: int = 1,
                  chunk_size: int = DEFAULT_CHUNK, progress: bool = False) -> MonteCarloResult:
    """
    Evaluate ``kernel(H)`` on ``nsamples`` draws of the ensemble.

    ``kernel`` must be picklable (a module-level function or a ``partial`` of
    one) when ``workers > 1``.
    """
    if nsamples < 1:
        raise UsageError(f"need at least one sample, got {nsamples}")
    if workers < 1:
        raise UsageError(f"worker count must be positive, got {workers}")
    seed = resolve_seed(rng, spec)
    counts = [chunk_size] * (nsamples // chunk_size)
    if nsamples % chunk_size:
        counts.append(nsamples % chunk_size)
    streams = np.random.SeedSequence(seed).spawn(len(counts))
    logger.debug("%s: %s samples in %s chunks, seed %s, %s workers",
                 spec, nsamples, len(counts), seed, workers)

    bar = tqdm(total=nsamples, desc=str(spec), unit="H", disable=not progress, leave=False)
    try:
        if workers == 1:
            chunks = []
            for stream, count in zip(streams, counts):
                chunks.append(_run_chunk(spec, kernel, stream, count))
                bar.update(count)
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_run_chunk, spec, kernel, s, c) for s, c in zip(streams, counts)]
                chunks = []
                for future, count in zip(futures, counts):
                    chunks.append(future.result())
                    bar.update(count)
    finally:
        bar.close()
    return MonteCarloResult(np.concatenate(chunks, axis=0), seed, chunk_size)
