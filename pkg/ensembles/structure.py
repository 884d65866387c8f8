"""
Constraint structures per symmetry class.

On the physical side a class is a list of linear involutions of End(V)

    H  ->  sign * M op(H) M^-1,      op = transpose or identity,

which H has to be fixed by, on top of H = H^dagger. On the auxiliary side it
is the set of even structure matrices (gamma, tau, pi, beta) acting on
W = W_B + W_F, together with the linear conditions defining the Lie
superalgebra of the normalizer G_Lambda.

Matrix layouts follow the tensor-factor order used throughout, first factor
outermost, so kron(isy, 1_N) is [[0, 1_N], [-1_N, 0]].
"""

from __future__ import annotations

__all__ = [
    "Constraint",
    "ClassStructure",
    "class_structure",
    "normalizer_dims",
    "normalizer_algebra",
    "tangent_dimension",
    "physical_dimension",
    "supertranspose",
    "kron",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "I_SIGMA_Y",
]

import functools
import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.linalg import null_space

from superrmt.errors import UnsupportedClassError, UsageError
from .classes import SymmetryClass, get_class

logger = logging.getLogger(__name__)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
I_SIGMA_Y = 1j * SIGMA_Y
ONE_2 = np.eye(2, dtype=complex)

TRANSPOSE = "transpose"
CONJUGATION = "conjugation"


def kron(*factors) -> np.ndarray:
    return functools.reduce(np.kron, [np.asarray(f, dtype=complex) for f in factors])


def _eye(n: int) -> np.ndarray:
    return np.eye(n, dtype=complex)


def _unit(n: int, i: int) -> np.ndarray:
    e = np.zeros((n, n), dtype=complex)
    e[i, i] = 1
    return e


def _bf(b_part: np.ndarray, f_part: np.ndarray) -> np.ndarray:
    """E_BB (x) b_part + E_FF (x) f_part."""
    m_b, m_f = len(b_part), len(f_part)
    out = np.zeros((m_b + m_f, m_b + m_f), dtype=complex)
    out[:m_b, :m_b] = b_part
    out[m_b:, m_b:] = f_part
    return out


def supertranspose(x: np.ndarray, m: int) -> np.ndarray:
    """[[a, b], [c, d]] -> [[a^T, c^T], [-b^T, d^T]] with a of size m x m."""
    a, b = x[:m, :m], x[:m, m:]
    c, d = x[m:, :m], x[m:, m:]
    return np.block([[a.T, c.T], [-b.T, d.T]])


@dataclass(frozen=True, eq=False)
class Constraint:
    """One involution ``H -> sign * M op(H) M^-1`` fixing the admissible H."""

    name: str
    kind: str
    matrix: np.ndarray
    sign: int
    inverse: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.kind not in (TRANSPOSE, CONJUGATION):
            raise UsageError(f"unknown constraint kind {self.kind!r}")
        object.__setattr__(self, "inverse", np.linalg.inv(self.matrix))

    def apply(self, h: np.ndarray) -> np.ndarray:
        x = h.T if self.kind == TRANSPOSE else h
        return self.sign * (self.matrix @ x @ self.inverse)

    def residual(self, h: np.ndarray) -> float:
        return float(np.linalg.norm(h - self.apply(h)))

    def describe(self) -> str:
        op = "H^T" if self.kind == TRANSPOSE else "H"
        sign = "+" if self.sign > 0 else "-"
        return f"H = {sign}{self.name} {op} {self.name}^-1"


@dataclass(frozen=True, eq=False)
class AuxiliaryConstraint:
    """Linearized normalizer condition ``X = sign * M X^T M^-1`` or ``X = M X M^-1`` on End(W)."""

    name: str
    kind: str
    matrix: np.ndarray
    sign: int

    def apply(self, x: np.ndarray, m: int) -> np.ndarray:
        y = supertranspose(x, m) if self.kind == TRANSPOSE else x
        return self.sign * (self.matrix @ y @ np.linalg.inv(self.matrix))


@dataclass(frozen=True, eq=False)
class ClassStructure:
    cls: SymmetryClass
    N: int
    n: int
    n_advanced: int
    dimension: int
    constraints: tuple[Constraint, ...]
    aux_grading: tuple[int, int]
    beta: np.ndarray
    gamma: np.ndarray | None = None
    tau: np.ndarray | None = None
    pi: np.ndarray | None = None
    aux_constraints: tuple[AuxiliaryConstraint, ...] = ()

    @property
    def c_exponent(self) -> Fraction:
        return self.cls.c_exponent

    @property
    def sigma(self) -> np.ndarray:
        m_b, m_f = self.aux_grading
        return _bf(_eye(m_b), -_eye(m_f))

    @property
    def tangent_dimension(self) -> int:
        return tangent_dimension(self.cls, self.N)

    def constraint(self, name: str) -> Constraint:
        for c in self.constraints:
            if c.name == name:
                return c
        raise KeyError(name)

    def project(self, x: np.ndarray) -> np.ndarray:
        """
        Complex-linear projector onto the complexified constraint space.

        The class involutions commute, so the product of the (1 + iota)/2
        factors is the group average over all their compositions.
        """
        for c in self.constraints:
            x = 0.5 * (x + c.apply(x))
        return x

    def project_hermitian(self, x: np.ndarray) -> np.ndarray:
        """Real-orthogonal projector (Frobenius metric) onto the admissible H."""
        y = self.project(x)
        return 0.5 * (y + y.conj().T)

    def residual(self, h: np.ndarray) -> float:
        """Largest Frobenius residual over hermiticity and the class involutions."""
        residuals = [float(np.linalg.norm(h - h.conj().T))]
        residuals.extend(c.residual(h) for c in self.constraints)
        return max(residuals)

    def real_basis(self) -> np.ndarray:
        """
        Orthonormal real basis of the admissible H as an array (k, d, d).

        Solves the stacked real-linear system (hermiticity plus each involution)
        with ``null_space``; only meant for small d.
        """
        d = self.dimension
        columns = []
        for k in range(2 * d * d):
            e = np.zeros(2 * d * d)
            e[k] = 1.0
            x = (e[: d * d] + 1j * e[d * d:]).reshape(d, d)
            parts = [x - x.conj().T] + [x - c.apply(x) for c in self.constraints]
            stacked = np.concatenate([p.ravel() for p in parts])
            columns.append(np.concatenate([stacked.real, stacked.imag]))
        system = np.array(columns).T
        kernel = null_space(system)
        basis = kernel[: d * d].T + 1j * kernel[d * d:].T
        return basis.reshape(-1, d, d)

    def constraint_dimension(self) -> int:
        return int(self.real_basis().shape[0])

    def consistency_residuals(self) -> dict[str, float]:
        """Defining identities of the auxiliary structure matrices (all should vanish)."""
        sigma = self.sigma
        m = self.aux_grading[0]
        out = {}
        label = self.cls.label
        if self.gamma is not None:
            g = self.gamma
            gt = supertranspose(g, m)
            if label == "C":
                out["gamma - gamma^T sigma"] = _norm(g - gt @ sigma)
            elif label == "D":
                out["gamma + gamma^T sigma"] = _norm(g + gt @ sigma)
        if self.gamma is not None and self.tau is not None:
            g, t = self.gamma, self.tau
            target = sigma if label == "CI" else -sigma
            out["gamma^2 - s*sigma"] = _norm(g @ g - target)
            out["tau^2 - s*sigma"] = _norm(t @ t - target)
            out["gamma tau + tau gamma"] = _norm(g @ t + t @ g)
        if self.tau is not None and self.gamma is None:
            t = self.tau
            s = 1 if label in ("AI", "BDI") else -1
            out["tau - s*tau^T sigma"] = _norm(t - s * supertranspose(t, m) @ sigma)
        if self.pi is not None:
            p = self.pi
            out["pi^2 + 1"] = _norm(p @ p + np.eye(len(p)))
        for c in self.constraints:
            mat = c.matrix
            out[f"{c.name} orthogonal"] = _norm(mat @ mat.conj().T - np.eye(len(mat)))
        return out

    def describe(self) -> list[str]:
        return [c.describe() for c in self.constraints]


def _norm(x) -> float:
    return float(np.linalg.norm(x))


# -- physical side ---------------------------------------------------------------


def physical_dimension(cls, N: int) -> int:
    label = get_class(cls).label
    if label in ("A", "AI"):
        return N
    if label in ("CII", "DIII"):
        return 4 * N
    return 2 * N


def tangent_dimension(cls, N: int) -> int:
    """Real dimension of the tangent space of the class's symmetric space."""
    label = get_class(cls).label
    return {
        "A": N * N,
        "AI": N * (N + 1) // 2,
        "AII": N * (2 * N - 1),
        "AIII": 2 * N * N,
        "BDI": N * N,
        "CII": 4 * N * N,
        "C": N * (2 * N + 1),
        "CI": N * (N + 1),
        "D": N * (2 * N - 1),
        "DIII": 2 * N * (2 * N - 1),
    }[label]


def _physical_constraints(label: str, N: int) -> tuple[Constraint, ...]:
    one = _eye(N)
    if label == "A":
        return ()
    if label == "AI":
        return (Constraint("1", TRANSPOSE, one, +1),)
    if label == "AII":
        return (Constraint("T", TRANSPOSE, kron(I_SIGMA_Y, one), +1),)
    if label == "AIII":
        return (Constraint("P", CONJUGATION, kron(SIGMA_Z, one), -1),)
    if label == "BDI":
        return (
            Constraint("1", TRANSPOSE, _eye(2 * N), +1),
            Constraint("P", CONJUGATION, kron(SIGMA_Z, one), -1),
        )
    if label == "CII":
        return (
            Constraint("P", CONJUGATION, kron(SIGMA_Z, ONE_2, one), -1),
            Constraint("T", TRANSPOSE, kron(ONE_2, I_SIGMA_Y, one), -1),
        )
    if label == "C":
        return (Constraint("C", TRANSPOSE, kron(I_SIGMA_Y, one), -1),)
    if label == "CI":
        return (
            Constraint("1", TRANSPOSE, _eye(2 * N), +1),
            Constraint("C", TRANSPOSE, kron(I_SIGMA_Y, one), -1),
        )
    if label == "D":
        return (Constraint("C", TRANSPOSE, kron(SIGMA_X, one), -1),)
    if label == "DIII":
        return (
            Constraint("C", TRANSPOSE, kron(SIGMA_X, ONE_2, one), -1),
            Constraint("T", TRANSPOSE, kron(ONE_2, I_SIGMA_Y, one), +1),
        )
    raise UnsupportedClassError(f"no constraint layout for class {label}")


# -- auxiliary side --------------------------------------------------------------


def _advanced_signs(n: int, n_advanced: int) -> np.ndarray:
    return np.diag([1.0] * n_advanced + [-1.0] * (n - n_advanced)).astype(complex)


def _auxiliary(label: str, n: int, n_advanced: int) -> dict:
    one = _eye(n)
    if label == "A":
        beta_n = _advanced_signs(n, n_advanced)
        return {"grading": (n, n), "beta": _bf(beta_n, beta_n)}
    if label in ("AI", "AII"):
        beta_n = kron(ONE_2, _advanced_signs(n, n_advanced))
        if label == "AI":
            tau = _bf(kron(SIGMA_X, one), kron(I_SIGMA_Y, one))
        else:
            tau = _bf(kron(I_SIGMA_Y, one), kron(SIGMA_X, one))
        return {
            "grading": (2 * n, 2 * n),
            "beta": _bf(beta_n, beta_n),
            "tau": tau,
            "aux": (AuxiliaryConstraint("tau", TRANSPOSE, tau, -1),),
        }
    if label == "AIII":
        pi = _bf(kron(I_SIGMA_Y, one), kron(I_SIGMA_Y, one))
        beta = kron(SIGMA_Z, one)
        return {
            "grading": (2 * n, 2 * n),
            "beta": _bf(beta, beta),
            "pi": pi,
            "aux": (AuxiliaryConstraint("pi", CONJUGATION, pi, +1),),
        }
    if label in ("BDI", "CII"):
        pi_b = kron(I_SIGMA_Y, ONE_2, one)
        pi = _bf(pi_b, pi_b)
        if label == "BDI":
            tau = _bf(kron(ONE_2, SIGMA_X, one), kron(ONE_2, I_SIGMA_Y, one))
        else:
            tau = _bf(kron(ONE_2, I_SIGMA_Y, one), kron(ONE_2, SIGMA_X, one))
        beta = kron(SIGMA_Z, ONE_2, one)
        return {
            "grading": (4 * n, 4 * n),
            "beta": _bf(beta, beta),
            "pi": pi,
            "tau": tau,
            "aux": (
                AuxiliaryConstraint("pi", CONJUGATION, pi, +1),
                AuxiliaryConstraint("tau", TRANSPOSE, tau, -1),
            ),
        }
    if label in ("C", "D"):
        if label == "C":
            gamma = _bf(kron(SIGMA_X, one), kron(I_SIGMA_Y, one))
        else:
            gamma = _bf(kron(I_SIGMA_Y, one), kron(SIGMA_X, one))
        beta = kron(SIGMA_Z, one)
        return {
            "grading": (2 * n, 2 * n),
            "beta": _bf(beta, beta),
            "gamma": gamma,
            "aux": (AuxiliaryConstraint("gamma", TRANSPOSE, gamma, -1),),
        }
    if label in ("CI", "DIII"):
        if label == "CI":
            gamma = _bf(kron(SIGMA_X, SIGMA_Z, one), kron(I_SIGMA_Y, ONE_2, one))
            tau = _bf(kron(ONE_2, SIGMA_X, one), kron(SIGMA_Z, I_SIGMA_Y, one))
        else:
            gamma = _bf(kron(I_SIGMA_Y, ONE_2, one), kron(SIGMA_X, SIGMA_Z, one))
            tau = _bf(kron(SIGMA_Z, I_SIGMA_Y, one), kron(ONE_2, SIGMA_X, one))
        beta = kron(SIGMA_Z, ONE_2, one)
        return {
            "grading": (4 * n, 4 * n),
            "beta": _bf(beta, beta),
            "gamma": gamma,
            "tau": tau,
            "aux": (
                AuxiliaryConstraint("gamma", TRANSPOSE, gamma, -1),
                AuxiliaryConstraint("tau", TRANSPOSE, tau, -1),
            ),
        }
    raise UnsupportedClassError(f"no auxiliary structure for class {label}")


def _check_chiral(label: str, N: int, p: int | None, q: int | None) -> None:
    if p is None and q is None:
        return
    if label not in ("AIII", "BDI", "CII"):
        raise UsageError(f"p and q only apply to the chiral classes, not {label}")
    if p != q:
        raise UnsupportedClassError(
            f"class {label} with p={p}, q={q}: only the case p = q is supported"
        )
    if p != N:
        raise UsageError(f"class {label}: p = q = {p} does not match N = {N}")


def class_structure(cls, N: int, n: int = 1, *, n_advanced: int | None = None,
                    p: int | None = None, q: int | None = None) -> ClassStructure:
    """
    Physical constraints and auxiliary structure matrices of a class.

    ``n_advanced`` is n_A for the Wigner-Dyson classes (number of alpha with
    Im alpha < 0); it defaults to n and is ignored elsewhere.
    """
    sym = get_class(cls)
    if N < 1 or n < 1:
        raise UsageError(f"class_structure needs N >= 1 and n >= 1, got N={N}, n={n}")
    _check_chiral(sym.label, N, p, q)
    n_adv = n if n_advanced is None else n_advanced
    if not 0 <= n_adv <= n:
        raise UsageError(f"n_A = {n_adv} outside 0..{n}")
    aux = _auxiliary(sym.label, n, n_adv)
    return ClassStructure(
        cls=sym,
        N=N,
        n=n,
        n_advanced=n_adv,
        dimension=physical_dimension(sym, N),
        constraints=_physical_constraints(sym.label, N),
        aux_grading=aux["grading"],
        beta=aux["beta"],
        gamma=aux.get("gamma"),
        tau=aux.get("tau"),
        pi=aux.get("pi"),
        aux_constraints=aux.get("aux", ()),
    )


# -- normalizer ------------------------------------------------------------------


def normalizer_dims(cls, n: int) -> tuple[int, int]:
    """
    (even, odd) complex dimensions of Lie(G_Lambda), by numerical rank.

    Each linearized condition ``X - iota(X) = 0`` is assembled as a matrix on
    the even (BB, FF) and odd (BF, FB) block positions separately; the
    conditions preserve parity so the two counts decouple.
    """
    if n < 1:
        raise UsageError(f"normalizer_dims needs n >= 1, got {n}")
    structure = class_structure(cls, 1, n)
    m_b, m_f = structure.aux_grading
    size = m_b + m_f
    even, odd = [], []
    for i in range(size):
        for j in range(size):
            (even if (i < m_b) == (j < m_b) else odd).append((i, j))

    def kernel_dim(positions):
        if not structure.aux_constraints:
            return len(positions)
        columns = []
        for i, j in positions:
            x = np.zeros((size, size), dtype=complex)
            x[i, j] = 1
            parts = [x - c.apply(x, m_b) for c in structure.aux_constraints]
            columns.append(np.concatenate([p.ravel() for p in parts]))
        rank = np.linalg.matrix_rank(np.array(columns).T, tol=1e-9)
        return len(positions) - int(rank)

    dims = (kernel_dim(even), kernel_dim(odd))
    logger.debug("normalizer of %s (n=%s): %s", structure.cls, n, dims)
    return dims


def _gl(m: int, k: int) -> tuple[int, int]:
    return (m * m + k * k, 2 * m * k)


def _osp(m: int, k2: int) -> tuple[int, int]:
    """osp(m|k2) with k2 even."""
    k = k2 // 2
    return (m * (m - 1) // 2 + k * (2 * k + 1), m * k2)


def _add(*dims) -> tuple[int, int]:
    return (sum(d[0] for d in dims), sum(d[1] for d in dims))


def normalizer_algebra(cls, n: int) -> tuple[str, tuple[int, int]]:
    """Name and (even, odd) dimension of the superalgebra Lie(G_Lambda) is known to be."""
    label = get_class(cls).label
    two_n = 2 * n
    if label == "A":
        return f"gl({n}|{n})", _gl(n, n)
    if label in ("AI", "AII", "C", "D"):
        return f"osp({two_n}|{two_n})", _osp(two_n, two_n)
    if label == "AIII":
        return f"gl({n}|{n}) + gl({n}|{n})", _add(_gl(n, n), _gl(n, n))
    if label in ("BDI", "CII"):
        return f"gl({two_n}|{two_n})", _gl(two_n, two_n)
    return (
        f"osp({two_n}|{two_n}) + osp({two_n}|{two_n})",
        _add(_osp(two_n, two_n), _osp(two_n, two_n)),
    )
