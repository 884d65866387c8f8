"""
Finite-N equality of the ensemble average with the Q-integral, and the
large-N approach of class C to the superspace integral.

The Q-integral runs over Q = [[Q_BB, sigma], [sigma', Q_FF]]. Q_BB lives on
the embedded domain b (X + e^Y beta e^-Y) (times i), Q_FF on the compact
real form. The Gaussian directions of Q_FF are summed with Gauss-Hermite
rules, which are exact here because the Berezin integral leaves a
polynomial of low degree in them. Q_BB is done by adaptive quadrature.
The measure constant is calibrated once per (class, v, b, half-plane) on
alpha = beta and frozen.
"""

from __future__ import annotations

__all__ = [
    "q_integral_check",
    "large_n_convergence",
    "classc_grassmann_constants",
    "classc_point_integrand",
    "classc_point_integrand_direct",
    "classa_point_integrand",
    "classc_n1_closed_form",
]

import functools
import logging
import math

import numpy as np
from scipy.special import wofz

from berezin.classc import classc_superspace_z
from berezin.measure import complex_quad
from ensembles.classes import get_class
from ensembles.montecarlo import resolve_seed
from ensembles.sampling import EnsembleSpec
from ensembles.structure import SIGMA_Z, class_structure
from spectral.generating import SourceMatrix, scaled_sources, z_gen_mc, z_gen_quadrature
from superalg.grassmann import GeneratorPool, berezin_top, g_exp, g_inv
from superalg.supermatrix import SuperMatrix, s_det, s_mul, s_trace
from superrmt.errors import NormalizationDriftError, UnsupportedClassError, UsageError
from .domain import schafer_wegner_embed
from .gaussian import GH_NODES, QUAD_RTOL, gauss_hermite
from .reports import VerificationReport, pair
from .saddle import saddle_action, saddle_info

logger = logging.getLogger(__name__)

Q_INTEGRAL_RTOL = 1e-4
CONTROL_TOL = 1e-8


# -- class A ------------------------------------------------------------------


def _contour_a(theta: float, b: float, advanced: bool) -> complex:
    structure = class_structure("A", 1, 1, n_advanced=1 if advanced else 0)
    z = schafer_wegner_embed(b, [[-1j * theta]], [[0.0]], structure)
    return complex(1j * z[0, 0])


def classa_point_integrand(q_b: complex, t: float, alpha: complex, beta: complex, v: float) -> complex:
    """D(sigma)[exp(-STr Q^2 / 2v^2) SDet(Q - omega)^-1] at Q_BB = q_b, Q_FF = it."""
    pool = GeneratorPool(2, "sigma")
    s1, s2 = pool.generators("sigma")
    q = SuperMatrix.from_blocks(pool, [[q_b]], [[s1]], [[s2]], [[1j * t]])
    omega = SuperMatrix.from_array(pool, np.diag([alpha, beta]), (1, 1))
    weight = g_exp(s_trace(s_mul(q, q)) * (-1.0 / (2.0 * v * v)))
    return berezin_top(weight * g_inv(s_det(q - omega))).body


def _raw_a(alpha: complex, beta: complex, v: float, b: float, rtol: float) -> complex:
    nodes, weights = gauss_hermite()
    scale = math.sqrt(2.0) * v
    advanced = alpha.imag < 0

    def over_t(theta):
        q_b = _contour_a(theta, b, advanced)
        total = 0j
        for u, w in zip(nodes, weights):
            total += w * math.exp(u * u) * classa_point_integrand(q_b, scale * u, alpha, beta, v)
        return b * scale * total

    value, _ = complex_quad(over_t, -math.inf, math.inf, rtol=rtol, label="class A Q-integral")
    return value


# -- class C ------------------------------------------------------------------


def _odd_blocks(pool: GeneratorPool):
    """B and C = i sigma_y B^T sigma_x on four generators."""
    x1, x2, x3, x4 = pool.generators("xi")
    return [[x1, x2], [x3, x4]], [[x4, x2], [-x3, -x1]]


@functools.lru_cache(maxsize=None)
def classc_grassmann_constants() -> tuple[complex, tuple[tuple[complex, ...], ...], complex]:
    """
    (D(T^2), D(T G_ji), D(det G)) with T = Tr BC and G = C sigma_z B.

    These are all the Berezin integral ever needs of the odd blocks.
    """
    pool = GeneratorPool(4, "xi")
    b, c = _odd_blocks(pool)
    sz = (1.0, -1.0)
    t = pool.zero()
    for i in range(2):
        for j in range(2):
            t = t + b[i][j] * c[j][i]
    g = [[sum((c[i][k] * b[k][j] * sz[k] for k in range(2)), pool.zero()) for j in range(2)] for i in range(2)]
    tau2 = berezin_top(t * t).body
    kappa = tuple(tuple(berezin_top(t * g[j][i]).body for j in range(2)) for i in range(2))
    delta = berezin_top(g[0][0] * g[1][1] - g[0][1] * g[1][0]).body
    logger.debug("class C Grassmann constants: tau2=%s kappa=%s delta=%s", tau2, kappa, delta)
    return tau2, kappa, delta


_PAULI = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex)


def _ff_block(a, beta: complex) -> np.ndarray:
    """i (a . sigma) - beta sigma_z."""
    a1, a2, a3 = a
    return np.array([[1j * a3 - beta, 1j * a1 + a2], [1j * a1 - a2, -1j * a3 + beta]], dtype=complex)


def _adjugate(d: np.ndarray) -> np.ndarray:
    return np.array([[d[1, 1], -d[0, 1]], [-d[1, 0], d[0, 0]]], dtype=complex)


def classc_point_integrand(q: complex, a, alpha: complex, beta: complex, v: float) -> complex:
    """The Berezin integral over the odd blocks in closed form, at Q_BB = q sigma_z, Q_FF = i a.sigma."""
    tau2, kappa, delta = classc_grassmann_constants()
    d = _ff_block(a, beta)
    big_a = q - alpha
    mixed = sum(_adjugate(d)[i, j] * kappa[i][j] for i in range(2) for j in range(2))
    bracket = tau2 * np.linalg.det(d) / (2 * v**4) + mixed / (v * v * big_a) + delta / big_a**2
    return complex(np.exp(-(q * q + np.dot(a, a)) / (v * v)) * (-1.0 / big_a**2) * bracket)


def classc_point_integrand_direct(q: complex, a, alpha: complex, beta: complex, v: float) -> complex:
    """Same quantity expanded in the Grassmann engine."""
    pool = GeneratorPool(4, "xi")
    b, c = _odd_blocks(pool)
    bb = (q * SIGMA_Z).tolist()
    ff = (1j * np.einsum("k,kij->ij", np.asarray(a, dtype=float), _PAULI)).tolist()
    big_q = SuperMatrix.from_blocks(pool, bb, b, c, ff)
    omega = SuperMatrix.from_array(pool, np.diag([alpha, -alpha, beta, -beta]), (2, 2))
    weight = g_exp(s_trace(s_mul(big_q, big_q)) * (-1.0 / (2.0 * v * v)))
    return berezin_top(weight * g_inv(s_det(big_q - omega))).body


def _ff_moments(beta: complex, v: float):
    """int d^3a exp(-|a|^2/v^2) times 1, det D and adj D; exact on a tensor Gauss-Hermite grid."""
    nodes, weights = gauss_hermite()
    i0 = 0.0
    i_det = 0j
    i_adj = np.zeros((2, 2), dtype=complex)
    for u1, w1 in zip(nodes, weights):
        for u2, w2 in zip(nodes, weights):
            for u3, w3 in zip(nodes, weights):
                w = w1 * w2 * w3
                d = _ff_block((v * u1, v * u2, v * u3), beta)
                i0 += w
                i_det += w * np.linalg.det(d)
                i_adj += w * _adjugate(d)
    scale = v**3
    return i0 * scale, i_det * scale, i_adj * scale


def _raw_c(alpha: complex, beta: complex, v: float, b: float, rtol: float) -> complex:
    tau2, kappa, delta = classc_grassmann_constants()
    i0, i_det, i_adj = _ff_moments(beta, v)
    mixed = sum(i_adj[i, j] * kappa[i][j] for i in range(2) for j in range(2))
    structure = class_structure("C", 1, 1)

    def over_theta(theta):
        z = schafer_wegner_embed(b, -1j * theta * SIGMA_Z, np.zeros((2, 2)), structure)
        q = complex(1j * z[0, 0])
        big_a = q - alpha
        bracket = tau2 * i_det / (2 * v**4) + mixed / (v * v * big_a) + delta * i0 / big_a**2
        return b * np.exp(-q * q / (v * v)) * (-1.0 / big_a**2) * bracket

    value, _ = complex_quad(over_theta, -math.inf, math.inf, rtol=rtol, label="class C Q-integral")
    return value


def classc_n1_closed_form(alpha: complex, beta: complex, v: float = 1.0) -> complex:
    """
    < Det(H - beta) / Det(H - alpha) > for class C at N = 1, Im alpha < 0:

        1 + (a^2 - b^2) [2 + 2 a K(a) / sqrt(pi)],   K(a) = int e^-x^2 / (x - a) dx,

    in units a = alpha / v, b = beta / v, with K from the Faddeeva function.
    """
    a, b = complex(alpha) / v, complex(beta) / v
    if not a.imag < 0:
        raise UsageError(f"class C requires Im alpha < 0, got {alpha}")
    k = -1j * math.pi * np.conj(wofz(np.conj(a)))
    return complex(1.0 + (a * a - b * b) * (2.0 + 2.0 * a * k / math.sqrt(math.pi)))


# -- check --------------------------------------------------------------------

_RAW = {"A": _raw_a, "C": _raw_c}


@functools.lru_cache(maxsize=None)
def _reference_raw(label: str, v: float, b: float, advanced: bool, rtol: float) -> complex:
    ref = -1j if advanced else 1j
    value = _RAW[label](ref, ref, v, b, rtol)
    logger.debug("measure constant for %s (v=%s, b=%s, advanced=%s): %s", label, v, b, advanced, value)
    return value


def q_integral_check(cls, src: SourceMatrix, *, b: float = 1.0, v: float = 1.0, N: int = 1, n: int = 1,
                    rtol: float = Q_INTEGRAL_RTOL, quad_rtol: float = QUAD_RTOL) -> VerificationReport:
    """
    Z at N = 1 by quadrature over H against the normalized Q-integral.

    Raises NormalizationDriftError when the alpha = beta control, with the
    frozen measure constant, moves away from 1.
    """
    sym = get_class(cls)
    if sym.label not in _RAW:
        raise UnsupportedClassError(f"the Q-integral check covers classes A and C, not {sym.label}")
    if N != 1 or n != 1 or src.n != 1:
        raise UnsupportedClassError(f"the Q-integral check covers N = n = 1, got N={N}, n={max(n, src.n)}")
    if not b > 0:
        raise UsageError(f"the domain scale b must be positive, got {b}")
    src.validate(sym)
    alpha, beta = src.alphas[0], src.betas[0]
    advanced = alpha.imag < 0
    raw = _RAW[sym.label]
    norm = _reference_raw(sym.label, float(v), float(b), advanced, quad_rtol)
    control = raw(alpha, alpha, v, b, quad_rtol) / norm
    if abs(control - 1.0) > CONTROL_TOL:
        raise NormalizationDriftError(
            f"alpha = beta control is {control:.12g}, not 1, with the frozen measure constant")
    rhs = raw(alpha, beta, v, b, quad_rtol) / norm
    lhs = z_gen_quadrature(EnsembleSpec(sym, 1, v), src)
    method = {
        "cls": sym.label,
        "N": 1,
        "n": 1,
        "v": v,
        "b": b,
        "measure_constant": list(pair(norm)),
        "gauss_hermite_nodes": GH_NODES,
        "compact_dims": 1 if sym.label == "A" else 3,
        "grassmann_generators": 2 if sym.label == "A" else 4,
        **src.snapshot(),
    }
    rows = [{"control": "alpha=beta", "value": pair(control), "abs_deviation": abs(control - 1.0)}]
    report = VerificationReport.compare(f"q_integral[{sym.label},b={b:g}]", lhs, rhs, rel_tol=rtol,
                                        method=method, rows=rows)
    logger.info(report.summary_line())
    return report


# -- large N ------------------------------------------------------------------


def large_n_convergence(alpha_hat, beta_hat, N_list, nsamples: int, rng=None, *, v: float = 1.0,
                          workers: int = 1, progress: bool = False) -> VerificationReport:
    """
    Monte Carlo Z_{1,N}(pi v omega_hat / N) for class C against the superspace
    integral, N ascending.

    Passes when the deviations do not grow (one increase is tolerated as MC
    noise) and the last one lies within 3 standard errors.
    """
    N_list = [int(N) for N in N_list]
    if len(N_list) < 3 or N_list != sorted(set(N_list)):
        raise UsageError(f"N_list must be strictly ascending with at least 3 entries, got {N_list}")
    src_hat = SourceMatrix([alpha_hat], [beta_hat]).validate("C")
    limit = classc_superspace_z(src_hat.alphas[0], src_hat.betas[0])
    seed = resolve_seed(rng)
    streams = np.random.SeedSequence(seed).spawn(len(N_list))

    rows, deviations, errors = [], [], []
    for N, stream in zip(N_list, streams):
        spec = EnsembleSpec("C", N, v)
        estimate, stderr = z_gen_mc(spec, scaled_sources(spec, src_hat), nsamples, stream,
                                    workers=workers, progress=progress)
        deviation = abs(estimate - limit)
        deviations.append(deviation)
        errors.append(stderr)
        rows.append({"N": N, "z": pair(estimate), "stderr": stderr, "deviation": deviation})

    increases = sum(1 for d0, d1 in zip(deviations, deviations[1:]) if d1 > d0)
    monotone = increases <= 1
    q0 = saddle_info("C", 1, v).q0
    rows.append({"saddle_action_Q0": pair(saddle_action(q0, (2, 2), v))})

    report = VerificationReport.compare(
        "large_n_limit[C]", estimate, limit, abs_tol=3.0 * errors[-1] + 1e-8, rel_tol=0.0,
        method={"N_list": N_list, "nsamples": nsamples, "seed": seed, "v": v, "workers": workers,
                "alpha_hat": list(pair(alpha_hat)), "beta_hat": list(pair(beta_hat)),
                "increases": increases},
        rows=rows,
    )
    inconclusive = errors[-1] > deviations[0]
    return report.model_copy(update={"passed": report.passed and monotone, "inconclusive": inconclusive})
