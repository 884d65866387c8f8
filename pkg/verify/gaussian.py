"""
The Gaussian superintegral identity and the Hubbard-Stratonovich step.

Bosonic integrals are quadratures, fermionic ones are Berezin integrals
expanded in the Grassmann kernel; neither side borrows the other's answer.
"""

from __future__ import annotations

__all__ = [
    "gaussian_identity_check",
    "hs_step_check",
    "bosonic_gaussian",
    "fermionic_gaussian",
    "coefficient_quad",
    "gauss_hermite",
]

import cmath
import logging
import math
from fractions import Fraction

import numpy as np
from numpy.polynomial.hermite import hermgauss

from berezin.measure import complex_quad
from ensembles.structure import I_SIGMA_Y, SIGMA_X, SIGMA_Z, class_structure, kron
from spectral.generating import SourceMatrix
from superalg.grassmann import GeneratorPool, GrassmannElement, berezin_top, g_exp
from superalg.supermatrix import SuperMatrix, s_det, s_mul, s_trace
from superrmt.errors import DivergenceError, UsageError
from .reports import VerificationReport, pair

logger = logging.getLogger(__name__)

IDENTITY_RTOL = 1e-6
BRANCH_ATOL = 1e-8
CONSTRAINT_ATOL = 1e-10
HS_ATOL = 1e-8
QUAD_RTOL = 1e-10
GH_NODES = 6


def gauss_hermite(count: int = GH_NODES):
    """Nodes and weights for int exp(-u^2) p(u) du, exact up to degree 2 count - 1."""
    return hermgauss(count)


def _fraction(c) -> Fraction:
    try:
        value = Fraction(str(c)) if isinstance(c, str) else Fraction(c)
    except (ValueError, TypeError):
        raise UsageError(f"c must be 1 or 1/2, got {c!r}") from None
    if value not in (Fraction(1), Fraction(1, 2)):
        raise UsageError(f"c must be 1 or 1/2, got {c}")
    return value


def bosonic_gaussian(k: np.ndarray, *, rtol: float = QUAD_RTOL) -> complex:
    """
    int d^2m phi / pi^m  exp(-phi^dagger K phi).

    The Hermitian part P of K has to be positive definite. Substituting
    phi = L^-dagger w with P = L L^dagger turns the form into w^dagger (1 + iS) w,
    S Hermitian; in the eigenbasis of S each mode contributes the radial
    integral int_0^inf exp(-(1 + i lambda) t) dt, done by quadrature.
    """
    k = np.asarray(k, dtype=complex)
    herm = 0.5 * (k + k.conj().T)
    try:
        chol = np.linalg.cholesky(herm)
    except np.linalg.LinAlgError:
        raise DivergenceError(
            "bosonic Gaussian diverges: the Hermitian part of the quadratic form is not positive definite"
        ) from None
    inv = np.linalg.inv(chol)
    skew = (k - k.conj().T) / 2j
    s = inv @ skew @ inv.conj().T
    value = 1.0 / float(np.prod(np.diag(chol).real) ** 2)
    for lam in np.linalg.eigvalsh(0.5 * (s + s.conj().T)):
        mode, _ = complex_quad(lambda t, lam=lam: cmath.exp(-(1.0 + 1j * lam) * t), 0.0, math.inf,
                               rtol=rtol, label="bosonic mode")
        value *= mode
    return complex(value)


def fermionic_gaussian(matrix: np.ndarray) -> complex:
    """int D(theta_bar, theta) exp(-theta_bar L theta), generators ordered theta_bar_1, theta_1, ..."""
    matrix = np.asarray(matrix, dtype=complex)
    m = len(matrix)
    pool = GeneratorPool(2 * m, "theta")
    gens = pool.generators("theta")
    bars, thetas = gens[0::2], gens[1::2]
    exponent = pool.zero()
    for a in range(m):
        for b in range(m):
            if matrix[a, b] != 0:
                exponent = exponent + bars[a] * thetas[b] * complex(-matrix[a, b])
    return berezin_top(g_exp(exponent), pool.blocks["theta"]).body


def _check_hermitian(a: np.ndarray) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise UsageError(f"A must be a square matrix, got shape {a.shape}")
    if np.linalg.norm(a - a.conj().T) > 1e-10 * max(1.0, np.linalg.norm(a)):
        raise UsageError("A must be Hermitian")


def _rhs(c, a: np.ndarray, src: SourceMatrix) -> tuple[complex, complex]:
    """(SDet^-c on the chosen branch, SDet itself) of A (x) 1 - 1 (x) B."""
    d = len(a)
    if c == 1:
        b_b, b_f = np.diag(src.alphas), np.diag(src.betas)
    else:
        b_b, b_f = kron(SIGMA_Z, np.diag(src.alphas)), kron(SIGMA_Z, np.diag(src.betas))
    w = len(b_b)
    m_b = kron(a, np.eye(w)) - kron(np.eye(d), b_b)
    m_f = kron(a, np.eye(w)) - kron(np.eye(d), b_f)
    size = d * w
    full = np.zeros((2 * size, 2 * size), dtype=complex)
    full[:size, :size] = m_b
    full[size:, size:] = m_f
    sdet = s_det(SuperMatrix.from_array(GeneratorPool(), full, (size, size))).body
    if c == 1:
        return 1.0 / sdet, sdet
    # SDet = prod_j Det(A - alpha_j)^2 / Det(A - beta_j)^2; the root keeps the unsquared ratio
    value = 1.0 + 0j
    one = np.eye(d)
    for alpha, beta in zip(src.alphas, src.betas):
        value *= np.linalg.det(a - beta * one) / np.linalg.det(a - alpha * one)
    return complex(value), sdet


# -- constrained fields for c = 1/2 ---------------------------------------------


def _tilde(psi, gamma: np.ndarray, c_inv: np.ndarray):
    """psi~ = -gamma psi^T C^-1, entries numbers or Grassmann elements."""
    d, w = len(psi), len(gamma)
    gamma, c_inv = gamma.tolist(), c_inv.tolist()
    out = []
    for k in range(w):
        row = []
        for x in range(d):
            entry = 0
            for b in range(w):
                for y in range(d):
                    coeff = gamma[k][b] * c_inv[y][x]
                    if coeff:
                        entry = entry - coeff * psi[y][b]
            row.append(entry)
        out.append(row)
    return out


def _pair_exponent(psi, tilde, a: np.ndarray, weights):
    """i psi~ (A (x) 1 - 1 (x) diag(weights)) psi, the order psi~ ... psi kept."""
    d = len(psi)
    rows = a.tolist()
    total = 0
    for k, weight in enumerate(weights):
        for x in range(d):
            for y in range(d):
                if rows[x][y]:
                    total = total + tilde[k][x] * rows[x][y] * psi[y][k]
            total = total - tilde[k][x] * weight * psi[x][k]
    return total * 1j


def _boson_field(u: np.ndarray, c: np.ndarray) -> list:
    # psi_B = [u, C u*]: the hole column is fixed by the reality condition
    return np.column_stack([u, c @ u.conj()]).tolist()


def _bosonic_form(a: np.ndarray, alpha: complex, c: np.ndarray):
    """
    The Hermitian form K with E_B(u) = -u^dagger K u, read off the assembled
    exponent by polarization, and the residuals of the reality condition and
    of the sesquilinear reading.
    """
    d = len(a)
    c_inv = np.linalg.inv(c)
    weights = (alpha, -alpha)

    def tilde(u):
        return _tilde(_boson_field(u, c), SIGMA_X, c_inv)

    def q(u):
        return complex(_pair_exponent(_boson_field(u, c), tilde(u), a, weights))

    basis = np.eye(d, dtype=complex)
    m = np.zeros((d, d), dtype=complex)
    for k in range(d):
        for l in range(d):
            e, f = basis[k], basis[l]
            m[k, l] = ((q(e + f) - q(e - f)) - 1j * (q(e + 1j * f) - q(e - 1j * f))) / 4
    rng = np.random.default_rng(0)
    reality = sesquilinear = 0.0
    for _ in range(3):
        u = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        psi = np.array(_boson_field(u, c))
        target = SIGMA_Z @ psi.conj().T
        reality = max(reality, float(np.max(np.abs(np.array(tilde(u)) - target))))
        sesquilinear = max(sesquilinear, abs(q(u) - u.conj() @ m @ u), abs(q(1j * u) - q(u)))
    return -m, reality, sesquilinear


def _fermionic_pair(a: np.ndarray, beta: complex, c: np.ndarray) -> complex:
    """
    Berezin integral over psi_F = [theta, chi] with theta = (alpha; gamma) and
    chi = (beta; delta) in the generators, psi~_F = -(i sigma_y) psi_F^T C^-1.
    Generators are ordered chi_1, theta_1, chi_2, theta_2, ...
    """
    d = len(a)
    pool = GeneratorPool()
    block = pool.allocate("psi", 2 * d)
    gens = pool.generators("psi")
    chi, theta = gens[0::2], gens[1::2]
    psi = [[theta[x], chi[x]] for x in range(d)]
    tilde = _tilde(psi, I_SIGMA_Y, np.linalg.inv(c))
    exponent = _pair_exponent(psi, tilde, a, (beta, -beta))
    return berezin_top(g_exp(exponent), block).body


def _constrained_pair(a: np.ndarray, alpha: complex, beta: complex) -> tuple[complex, complex, float, float]:
    d = len(a)
    c = kron(I_SIGMA_Y, np.eye(d // 2))
    k, reality, sesquilinear = _bosonic_form(a, alpha, c)
    return bosonic_gaussian(k), _fermionic_pair(a, beta, c), reality, sesquilinear


def gaussian_identity_check(c, a, src: SourceMatrix, *, rtol: float = IDENTITY_RTOL) -> VerificationReport:
    """
    int Dpsi exp(i psi~ (A (x) 1 - 1 (x) B) psi) = SDet(A (x) 1 - 1 (x) B)^-c

    with B = diag(alphas | betas). For c = 1 the bosonic field is free
    (psi~_B = psi_B^dagger). For c = 1/2, A is a class-C Hamiltonian, B
    carries a sigma_z particle-hole factor and psi~ = -gamma psi^T C^-1 with
    gamma = (sigma_x | i sigma_y). The reality condition
    psi~_B = (sigma_z (x) 1) psi_B^dagger then leaves one free column
    u = (a; b*) per source, and the fermions keep all four blocks alpha..delta.
    The exponent is assembled from these fields; the bosonic form is read off
    it and integrated by quadrature, the fermionic one is expanded exactly.
    The RHS for c = 1/2 is the root prod_j Det(A - beta_j) / Det(A - alpha_j),
    and a report whose RHS is not a root of SDet^-1 fails.
    """
    c = _fraction(c)
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    _check_hermitian(a)
    d = len(a)
    if c == Fraction(1, 2):
        if d % 2:
            raise UsageError(f"c = 1/2 needs a class-C A of even size, got {d}")
        residual = class_structure("C", d // 2).residual(a)
        if residual > 1e-10 * max(1.0, float(np.linalg.norm(a))):
            raise UsageError(f"A violates the particle-hole condition H = -C H^T C^-1 (residual {residual:.3g})")
        src.validate("C")

    lhs = 1.0 + 0j
    rows = []
    constraint = 0.0
    for alpha, beta in zip(src.alphas, src.betas):
        if alpha.imag == 0:
            raise DivergenceError(f"bosonic Gaussian diverges: Im alpha must not vanish, got alpha = {alpha}")
        if c == 1:
            # rotate so that the Hermitian part of the bosonic form is -|Im alpha|
            s = 1.0 if alpha.imag < 0 else -1.0
            bos = bosonic_gaussian(-1j * s * (a - alpha * np.eye(d)))
            ferm = fermionic_gaussian(-1j * s * (a - beta * np.eye(d)))
            row = {}
        else:
            bos, ferm, reality, sesquilinear = _constrained_pair(a, alpha, beta)
            scale = max(1.0, float(np.linalg.norm(a)), abs(alpha))
            constraint = max(constraint, reality / scale, sesquilinear / scale ** 2)
            row = {"reality_residual": reality, "sesquilinear_residual": sesquilinear}
        rows.append({"alpha": pair(alpha), "beta": pair(beta), "bosonic": pair(bos), "fermionic": pair(ferm), **row})
        lhs *= bos * ferm

    rhs, sdet = _rhs(c, a, src)
    branch = abs(rhs ** int(1 / c) * sdet - 1.0)
    method = {
        "c": str(c),
        "dim_V": d,
        "n": src.n,
        "bosonic_real_dims": 2 * d * src.n,
        "grassmann_generators": 2 * d * src.n,
        "sdet": list(pair(sdet)),
        "branch_residual": branch,
        "constraint_residual": constraint,
    }
    report = VerificationReport.compare(f"gaussian_identity[c={c}]", lhs, rhs, rel_tol=rtol,
                                        method=method, rows=rows)
    problems = []
    if branch > BRANCH_ATOL:
        problems.append(f"RHS is not a root of SDet^-1 (branch residual {branch:.3g})")
    if constraint > CONSTRAINT_ATOL:
        problems.append(f"constrained field off its reality condition (residual {constraint:.3g})")
    if problems:
        report = report.model_copy(update={"passed": False, "message": "; ".join(problems)})
    logger.debug("%s: lhs %s rhs %s", report.identity, lhs, rhs)
    return report



# -- Hubbard-Stratonovich -----------------------------------------------------


def coefficient_quad(fn, masks, lower, upper, *, rtol: float = QUAD_RTOL, label: str = "coefficients") -> dict:
    """
    int fn(x) dx coefficient by coefficient, fn returning a GrassmannElement.

    Evaluations are cached so the real and imaginary passes share points.
    """
    cache: dict[float, GrassmannElement] = {}

    def at(x):
        if x not in cache:
            cache[x] = fn(x)
        return cache[x]

    out = {}
    for mask in masks:
        out[mask], _ = complex_quad(lambda x, mask=mask: at(x).coefficient(mask), lower, upper,
                                    rtol=rtol, label=f"{label} [{mask:b}]")
    return out


def _outer(pool: GeneratorPool, z: complex, theta_bar, theta) -> SuperMatrix:
    """psi psi~ for one site: psi = (z, theta), psi~ = (z*, theta_bar)."""
    return SuperMatrix.from_blocks(
        pool,
        [[abs(z) ** 2]],
        [[theta_bar * z]],
        [[theta * z.conjugate()]],
        [[theta * theta_bar]],
    )


def hs_step_check(psi_b: complex = 0.8 + 0.3j, *, v: float = 0.7, N: int = 1,
                  symbolic_fermions: bool = True, atol: float = HS_ATOL) -> VerificationReport:
    """
    exp(-(v^2/2N) STr(psi psi~)^2) against

        (1/2pi) int_{R x iR} dQ D(sigma) exp(i STr(Q psi psi~) - N STr Q^2 / 2v^2),
        Q = [[q_B, sigma_1], [sigma_2, q_F]],

    for class A, n = 1, coefficient by coefficient in the fermion components.
    The q_F = it direction is Gaussian times a polynomial and is summed with
    a Gauss-Hermite rule; q_B is done by adaptive quadrature.
    """
    if N != 1:
        raise UsageError(f"hs_step_check covers N = 1, got {N}")
    if not v > 0:
        raise UsageError(f"v must be positive, got {v}")
    z = complex(psi_b)
    pool = GeneratorPool()
    psi = pool.allocate("psi", 2)
    sigma = pool.allocate("sigma", 2)
    theta_bar, theta = pool.generators("psi")
    if not symbolic_fermions:
        theta_bar, theta = pool.zero(), pool.zero()
    s1, s2 = pool.generators("sigma")
    outer = _outer(pool, z, theta_bar, theta)
    lhs = g_exp(s_trace(s_mul(outer, outer)) * (-v * v / (2.0 * N)))

    k = N / (v * v)
    nodes, weights = gauss_hermite()
    scale = math.sqrt(2.0 / k)

    def integrand(q_b):
        total = pool.zero()
        for u, w in zip(nodes, weights):
            q = SuperMatrix.from_blocks(pool, [[q_b]], [[s1]], [[s2]], [[1j * scale * u]])
            exponent = s_trace(s_mul(q, outer)) * 1j - s_trace(s_mul(q, q)) * (k / 2.0)
            total = total + berezin_top(g_exp(exponent), sigma) * (w * math.exp(u * u) * scale)
        return total * (1.0 / (2.0 * math.pi))

    masks = [0, 1 << psi[0], 1 << psi[1], (1 << psi[0]) | (1 << psi[1])]
    rhs = coefficient_quad(integrand, masks, -math.inf, math.inf, label="HS step")
    rows = []
    worst = None
    for mask in masks:
        left, right = lhs.coefficient(mask), rhs[mask]
        dev = abs(left - right)
        rows.append({"mask": mask, "lhs": pair(left), "rhs": pair(right), "abs_deviation": dev})
        if worst is None or dev > worst[2]:
            worst = (left, right, dev)
    method = {"psi_b": list(pair(z)), "v": v, "N": N, "symbolic_fermions": symbolic_fermions,
              "gauss_hermite_nodes": GH_NODES}
    return VerificationReport.compare("hs_step", worst[0], worst[1], abs_tol=atol, rel_tol=0.0,
                                      method=method, rows=rows)
