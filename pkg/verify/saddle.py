"""
Saddle-point data per class: Q_0, the second orbit representative Q_1 for
D and DIII, and the names of the coset and of its boson and fermion bases.
"""

from __future__ import annotations

__all__ = [
    "SaddleData",
    "saddle_info",
    "saddle_action",
    "algebra_residual",
    "rss_table",
    "rss_table_json",
]

import cmath
import json
import logging
from dataclasses import dataclass

import numpy as np

from ensembles.classes import CLASS_LABELS, get_class
from ensembles.structure import ONE_2, SIGMA_X, SIGMA_Z, class_structure, kron
from superrmt.errors import UsageError

logger = logging.getLogger(__name__)

# coset G/H, stability group H, boson base M_B, fermion base M_F
SADDLE_NAMES = {
    "A": ("Gl(n|n)/Gl(n_A|n_A) x Gl(n_R|n_R)", "Gl(n_A|n_A) x Gl(n_R|n_R)",
          "U(n_A,n_R)/U(n_A) x U(n_R)", "U(n_A+n_R)/U(n_A) x U(n_R)"),
    "AI": ("Osp(2n|2n)/Osp(2n_A|2n_A) x Osp(2n_R|2n_R)", "Osp(2n_A|2n_A) x Osp(2n_R|2n_R)",
           "SO(2n_A,2n_R)/SO(2n_A) x SO(2n_R)", "Sp(n_A+n_R)/Sp(n_A) x Sp(n_R)"),
    "AII": ("Osp(2n|2n)/Osp(2n_A|2n_A) x Osp(2n_R|2n_R)", "Osp(2n_A|2n_A) x Osp(2n_R|2n_R)",
            "Sp(n_A,n_R)/Sp(n_A) x Sp(n_R)", "SO(2n_A+2n_R)/SO(2n_A) x SO(2n_R)"),
    "AIII": ("Gl(n|n)", "Gl(n|n) (diagonal)", "Gl(n,C)/U(n)", "U(n)"),
    "BDI": ("Gl(2n|2n)/Osp(2n|2n)", "Osp(2n|2n)", "Gl(2n,R)/O(2n)", "U(2n)/Sp(n)"),
    "CII": ("Gl(2n|2n)/Osp(2n|2n)", "Osp(2n|2n)", "U*(2n)/Sp(n)", "U(2n)/O(2n)"),
    "C": ("Osp(2n|2n)/Gl(n|n)", "Gl(n|n)", "SO*(2n)/U(n)", "Sp(n)/U(n)"),
    "D": ("Osp(2n|2n)/Gl(n|n)", "Gl(n|n)", "Sp(n,R)/U(n)", "SO(2n)/U(n)"),
    "CI": ("Osp(2n|2n)", "Osp(2n|2n) (diagonal)", "SO(2n,C)/SO(2n)", "Sp(n)"),
    "DIII": ("Osp(2n|2n)", "Osp(2n|2n) (diagonal)", "Sp(n,C)/Sp(n)", "SO(2n)"),
}


def _matrix_record(m: np.ndarray | None):
    if m is None:
        return None
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def _block_diag(b_part: np.ndarray, f_part: np.ndarray) -> np.ndarray:
    m_b, m_f = len(b_part), len(f_part)
    out = np.zeros((m_b + m_f, m_b + m_f), dtype=complex)
    out[:m_b, :m_b] = b_part
    out[m_b:, m_b:] = f_part
    return out


@dataclass(frozen=True, eq=False)
class SaddleData:
    label: str
    n: int
    v: float
    grading: tuple[int, int]
    q0: np.ndarray
    q1: np.ndarray | None
    coset: str
    stability_group: str
    boson_base: str
    fermion_base: str
    rss_row: tuple[str, str, str, str]
    saddle_count: int

    def residuals(self) -> dict[str, float]:
        """Frobenius norms of Q^2 + v^2 for each orbit representative."""
        eye = np.eye(sum(self.grading))
        out = {"Q0": float(np.linalg.norm(self.q0 @ self.q0 + self.v * self.v * eye))}
        if self.q1 is not None:
            out["Q1"] = float(np.linalg.norm(self.q1 @ self.q1 + self.v * self.v * eye))
        return out

    def as_record(self) -> dict:
        return {
            "cls": self.label,
            "n": self.n,
            "v": self.v,
            "grading": list(self.grading),
            "saddle_count": self.saddle_count,
            "coset": self.coset,
            "stability_group": self.stability_group,
            "M_B": self.boson_base,
            "M_F": self.fermion_base,
            "rss_row": list(self.rss_row),
            "q0": _matrix_record(self.q0),
            "q1": _matrix_record(self.q1),
            "residuals": self.residuals(),
        }


def _second_orbit(label: str, n: int, v: float) -> np.ndarray | None:
    one = np.eye(n)
    if label == "D":
        signs = np.diag([1.0] + [-1.0] * (n - 1))
        return 1j * v * _block_diag(kron(SIGMA_Z, one), kron(SIGMA_Z, signs))
    if label == "DIII":
        first = np.zeros((n, n))
        first[0, 0] = 1.0
        rest = one - first
        ff = kron(ONE_2, SIGMA_X, first) + kron(SIGMA_Z, ONE_2, rest)
        return 1j * v * _block_diag(kron(SIGMA_Z, ONE_2, one), ff)
    return None


def saddle_info(cls, n: int = 1, v: float = 1.0, *, n_advanced: int | None = None) -> SaddleData:
    sym = get_class(cls)
    if n < 1:
        raise UsageError(f"saddle_info needs n >= 1, got {n}")
    if not v > 0:
        raise UsageError(f"v must be positive, got {v}")
    structure = class_structure(sym, 1, n, n_advanced=n_advanced)
    coset, stability, boson_base, fermion_base = SADDLE_NAMES[sym.label]
    data = SaddleData(
        label=sym.label,
        n=n,
        v=float(v),
        grading=structure.aux_grading,
        q0=1j * v * structure.beta,
        q1=_second_orbit(sym.label, n, v),
        coset=coset,
        stability_group=stability,
        boson_base=boson_base,
        fermion_base=fermion_base,
        rss_row=sym.rss_row,
        saddle_count=sym.saddle_count,
    )
    logger.debug("saddle data %s (n=%s): residuals %s", sym.label, n, data.residuals())
    return data


def saddle_action(q: np.ndarray, grading: tuple[int, int], v: float) -> complex:
    """STr(Q^2) / 2v^2 + ln(Det Q_BB / Det Q_FF) for a numeric block-diagonal Q."""
    q = np.asarray(q, dtype=complex)
    m_b, _ = grading
    sq = q @ q
    strace = np.trace(sq[:m_b, :m_b]) - np.trace(sq[m_b:, m_b:])
    ratio = np.linalg.det(q[:m_b, :m_b]) / np.linalg.det(q[m_b:, m_b:])
    return complex(strace / (2.0 * v * v) + cmath.log(ratio))


def algebra_residual(cls, q: np.ndarray, n: int = 1) -> float:
    """Largest violation of the normalizer conditions of the class by q."""
    structure = class_structure(cls, 1, n)
    m_b = structure.aux_grading[0]
    return max((float(np.linalg.norm(q - c.apply(q, m_b))) for c in structure.aux_constraints), default=0.0)


def rss_table() -> list[dict]:
    return [get_class(label).rss_entry() for label in CLASS_LABELS]


def rss_table_json() -> str:
    return json.dumps(rss_table(), indent=2, ensure_ascii=False) + "\n"
