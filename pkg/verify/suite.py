"""
Verification suites.

A suite is a list of independent jobs. Jobs run in a process pool and the
reports come back sorted by identity, so the merged output does not depend
on the worker count or completion order.
"""

from __future__ import annotations

__all__ = ["Job", "SUITES", "build_jobs", "run_suite", "suite_passed"]

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np
from tqdm import tqdm

from berezin.gl11 import gl11_integral
from berezin.supersphere import supersphere_volume
from ensembles.classes import CLASS_LABELS
from ensembles.sampling import EnsembleSpec, sample_h, second_moment_exact, second_moment_mc
from ensembles.structure import normalizer_algebra, normalizer_dims
from spectral.density import dos_estimate, semicircle_density
from spectral.generating import SourceMatrix
from superrmt.errors import UsageError, WorkbenchError
from .domain import domain_probe
from .gaussian import gaussian_identity_check, hs_step_check
from .qintegral import large_n_convergence, q_integral_check
from .reports import VerificationReport, pair
from .saddle import rss_table_json, saddle_info

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20240611
SNAPSHOT = Path(__file__).resolve().parent / "data" / "rss_table.json"


@dataclass(frozen=True)
class Job:
    identity: str
    fn: Callable[..., VerificationReport]
    kwargs: dict = field(default_factory=dict)


def _execute(job: Job) -> VerificationReport:
    try:
        report = job.fn(**job.kwargs)
    except WorkbenchError as exc:
        logger.warning("%s failed: %s", job.identity, exc)
        return VerificationReport.failure(job.identity, exc)
    return report.model_copy(update={"identity": job.identity})


# -- checks that only make sense as suite entries -----------------------------


def structure_audit() -> VerificationReport:
    """Correspondence table snapshot, saddle equations and normalizer dimensions for every class."""
    rows, mismatches = [], 0
    snapshot_ok = SNAPSHOT.read_text(encoding="utf-8") == rss_table_json()
    mismatches += not snapshot_ok
    rows.append({"check": "rss table snapshot", "ok": snapshot_ok})
    for label in CLASS_LABELS:
        for n in (1, 2):
            residual = max(saddle_info(label, n).residuals().values())
            if n > 1:
                mismatches += residual != 0.0
                rows.append({"cls": label, "n": n, "saddle_residual": residual, "ok": residual == 0.0})
                continue
            name, expected = normalizer_algebra(label, n)
            dims = normalizer_dims(label, n)
            ok = residual == 0.0 and dims == expected
            mismatches += not ok
            rows.append({"cls": label, "n": n, "saddle_residual": residual, "algebra": name,
                         "dims": list(dims), "expected": list(expected), "ok": ok})
    return VerificationReport.compare("structure_audit", mismatches, 0, abs_tol=0.0, rel_tol=0.0,
                                      method={"classes": len(CLASS_LABELS), "n": [1, 2]}, rows=rows,
                                      message=f"{mismatches} mismatches")


def volume_check(p: int, expected: float, atol: float) -> VerificationReport:
    value = supersphere_volume(p)
    return VerificationReport.compare(f"supersphere_volume[p={p}]", value, expected, abs_tol=atol, rel_tol=0.0,
                                      method={"p": p, "cells": 2})


def _unit(g):
    return 1.0


def gl11_unit_check(atol: float = 1e-8) -> VerificationReport:
    result = gl11_integral(_unit)
    return VerificationReport.compare("gl11_haar[1]", result.value, 1.0, abs_tol=atol, rel_tol=0.0,
                                      method=result.as_record())


def semicircle_check(N: int, nsamples: int, seed: int, *, v: float = 1.0, bins: int = 60,
                     tol: float = 0.03, workers: int = 1) -> VerificationReport:
    spec = EnsembleSpec("A", N, v, seed=seed)
    hist = dos_estimate(spec, nsamples, bins, energy_range=(-2.2 * v, 2.2 * v), workers=workers)
    deviation = hist.deviation_from(lambda e: semicircle_density(e, N, v), window=1.5 * v)
    return VerificationReport.compare(f"semicircle[A,N={N}]", deviation, 0.0, abs_tol=tol, rel_tol=0.0,
                                      method={"nsamples": nsamples, "bins": bins, "window": 1.5 * v, **hist.spec},
                                      message="relative sup-norm deviation of the histogram")


def covariance_check(cls: str, N: int, nsamples: int, seed: int, *, pairs: int = 3,
                     workers: int = 1) -> VerificationReport:
    """
    Tr(AH) Tr(BH) sampled against second_moment_exact for ``pairs`` seeded
    random (A, B); the report carries the pair furthest out in standard errors.
    """
    spec = EnsembleSpec(cls, N, seed=seed)
    rng = np.random.default_rng(seed)
    d = spec.dimension
    rows = []
    worst = None
    for k in range(pairs):
        a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        b = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        exact = second_moment_exact(spec, a, b)
        estimate, stderr = second_moment_mc(spec, a, b, nsamples, seed + k, workers=workers)
        score = abs(estimate - exact) / stderr
        rows.append({"pair": k, "estimate": pair(estimate), "exact": pair(exact), "stderr": stderr,
                     "standard_errors": score})
        if worst is None or score > worst[0]:
            worst = (score, estimate, exact, stderr)
    _, estimate, exact, stderr = worst
    return VerificationReport.compare(f"covariance[{cls},N={N}]", estimate, exact, abs_tol=5.0 * stderr,
                                      rel_tol=0.0, method={"nsamples": nsamples, "pairs": pairs, **spec.snapshot()},
                                      rows=rows)


# -- suites -------------------------------------------------------------------


def _random_sources(rng: np.random.Generator, lower_only: bool) -> SourceMatrix:
    alpha = complex(rng.uniform(-1.5, 1.5), -rng.uniform(0.4, 1.5))
    if not lower_only and rng.random() < 0.5:
        alpha = alpha.conjugate()
    beta = complex(rng.uniform(-1.5, 1.5), rng.uniform(-0.5, 0.5))
    return SourceMatrix([alpha], [beta])


def _gaussian_jobs(rng: np.random.Generator) -> list[Job]:
    jobs = [
        Job("gaussian_identity[c=1/2,golden]", gaussian_identity_check,
            {"c": Fraction(1, 2), "a": np.diag([1.0, -1.0]), "src": SourceMatrix([-1j], [2.0])}),
        Job("gaussian_identity[c=1,golden]", gaussian_identity_check,
            {"c": 1, "a": np.array([[0.7]]), "src": SourceMatrix([-1j], [0.3])}),
        Job("gaussian_identity[c=1,alpha=beta]", gaussian_identity_check,
            {"c": 1, "a": np.array([[0.4, 0.2j], [-0.2j, -1.1]]), "src": SourceMatrix([0.3 - 0.8j], [0.3 - 0.8j])}),
    ]
    for c, cls in ((1, "A"), (Fraction(1, 2), "C")):
        for k in range(10):
            N = 1 + k % 2
            levels = rng.uniform(-2.0, 2.0, N)
            a = np.diag(levels) if c == 1 else np.diag(np.concatenate([levels, -levels]))
            jobs.append(Job(f"gaussian_identity[c={c},diagonal,{k:02d}]", gaussian_identity_check,
                            {"c": c, "a": a, "src": _random_sources(rng, c != 1)}))
        for k in range(3):
            a = sample_h(EnsembleSpec(cls, 1 + k % 2), rng)
            jobs.append(Job(f"gaussian_identity[c={c},dense,{k:02d}]", gaussian_identity_check,
                            {"c": c, "a": a, "src": _random_sources(rng, c != 1)}))
    return jobs


Q_INTEGRAL_CASES = {
    "A": ((-1j, 0.0), (-0.5 - 1j, 0.3), (0.4 + 0.8j, -0.2), (-1j, -1j)),
    "C": ((-1j, 0.3), (0.2 - 0.7j, 0.5), (-1.2j, -0.4), (-1j, -1j)),
}


def _core(seed: int) -> list[Job]:
    rng = np.random.default_rng(seed)
    jobs = _gaussian_jobs(rng)
    jobs += [
        Job("hs_step[psi=0]", hs_step_check, {"psi_b": 0.0, "symbolic_fermions": False}),
        Job("hs_step[boson]", hs_step_check, {"psi_b": 0.8 + 0.3j, "symbolic_fermions": False}),
        Job("hs_step[symbolic]", hs_step_check, {"psi_b": 0.8 + 0.3j, "symbolic_fermions": True}),
        Job("domain[A,n=2]", domain_probe, {"cls": "A", "n": 2, "n_advanced": 1, "rng": seed}),
        Job("domain[C,n=1]", domain_probe, {"cls": "C", "n": 1, "rng": seed}),
        Job("structure_audit", structure_audit),
        Job("supersphere_volume[p=1]", volume_check, {"p": 1, "expected": 0.0, "atol": 1e-8}),
        Job("supersphere_volume[p=2]", volume_check, {"p": 2, "expected": 4 * math.pi, "atol": 1e-6}),
        Job("gl11_haar[1]", gl11_unit_check),
    ]
    for label, cases in Q_INTEGRAL_CASES.items():
        scales = (0.5, 1.0, 2.0) if label == "C" else (1.0,)
        for k, (alpha, beta) in enumerate(cases):
            for b in scales:
                jobs.append(Job(f"q_integral[{label},{k},b={b:g}]", q_integral_check,
                                {"cls": label, "src": SourceMatrix([alpha], [beta]), "b": b}))
    return jobs


def _full(seed: int) -> list[Job]:
    jobs = _core(seed)
    jobs.append(Job("large_n_limit[C]", large_n_convergence,
                    {"alpha_hat": -0.3j, "beta_hat": 0.25, "N_list": (50, 100, 200),
                     "nsamples": 100_000, "rng": seed}))
    jobs.append(Job("semicircle[A,N=200]", semicircle_check, {"N": 200, "nsamples": 10_000, "seed": seed}))
    for label in CLASS_LABELS:
        for N in (2, 4):
            jobs.append(Job(f"covariance[{label},N={N}]", covariance_check,
                            {"cls": label, "N": N, "nsamples": 10_000, "seed": seed}))
    return jobs


SUITES = {"core": _core, "full": _full}


def build_jobs(name: str, seed: int = DEFAULT_SEED) -> list[Job]:
    try:
        builder = SUITES[name]
    except KeyError:
        raise UsageError(f"unknown suite {name!r}; expected one of {sorted(SUITES)}") from None
    return builder(seed)


def run_suite(name: str = "core", *, seed: int = DEFAULT_SEED, workers: int = 1,
              progress: bool = False) -> list[VerificationReport]:
    if workers < 1:
        raise UsageError(f"worker count must be positive, got {workers}")
    jobs = build_jobs(name, seed)
    logger.info("suite %s: %s jobs on %s workers, seed %s", name, len(jobs), workers, seed)
    bar = tqdm(total=len(jobs), desc=f"verify {name}", unit="check", disable=not progress, leave=False)
    reports = []
    try:
        if workers == 1:
            for job in jobs:
                reports.append(_execute(job))
                bar.update(1)
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for report in pool.map(_execute, jobs):
                    reports.append(report)
                    bar.update(1)
    finally:
        bar.close()
    reports.sort(key=lambda r: r.identity)
    failed = sum(not r.passed for r in reports)
    logger.info("suite %s: %s passed, %s failed", name, len(reports) - failed, failed)
    return reports


def suite_passed(reports) -> bool:
    return all(r.passed for r in reports)
