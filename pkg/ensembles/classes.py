"""
The ten symmetry classes and their table data.

Each :class:`SymmetryClass` carries its row of the Cartan table (noncompact and
compact symmetric space), its row of the random-matrix / supersymmetric
correspondence, the number of dominant saddle-point orbits and the exponent
``c`` of the Gaussian superintegral identity.
"""

from __future__ import annotations

__all__ = [
    "SymmetryClass",
    "SYMMETRY_CLASSES",
    "CLASS_LABELS",
    "PARTICLE_HOLE_CLASSES",
    "WIGNER_DYSON_CLASSES",
    "CHIRAL_CLASSES",
    "RSS_TABLE",
    "get_class",
]

from dataclasses import dataclass
from fractions import Fraction

from superrmt.errors import UsageError

CLASS_LABELS = ("A", "AI", "AII", "AIII", "BDI", "CII", "C", "CI", "D", "DIII")

WIGNER_DYSON_CLASSES = frozenset({"A", "AI", "AII"})
CHIRAL_CLASSES = frozenset({"AIII", "BDI", "CII"})
PARTICLE_HOLE_CLASSES = frozenset({"AIII", "BDI", "CII", "C", "CI", "D", "DIII"})

# Symmetric superspaces: G/H, type of M_B, type of M_F.
RSS_TABLE = {
    "A|A": ("Gl(m|n)", "A", "A"),
    "AI|AII": ("Gl(m|2n) / Osp(m|2n)", "AI", "AII"),
    "AII|AI": ("Gl(m|2n) / Osp(m|2n)", "AII", "AI"),
    "AIII|AIII": ("Gl(m1+m2|n1+n2) / Gl(m1|n1) x Gl(m2|n2)", "AIII", "AIII"),
    "BD|C": ("Osp(m|2n)", "BD", "C"),
    "C|BD": ("Osp(m|2n)", "C", "BD"),
    "CI|DIII": ("Osp(2m|2n) / Gl(m|n)", "CI", "DIII"),
    "DIII|CI": ("Osp(2m|2n) / Gl(m|n)", "DIII", "CI"),
    "BDI|CII": ("Osp(m1+m2|2n1+2n2) / Osp(m1|2n1) x Osp(m2|2n2)", "BDI", "CII"),
    "CII|BDI": ("Osp(m1+m2|2n1+2n2) / Osp(m1|2n1) x Osp(m2|2n2)", "CII", "BDI"),
    # the rss column writes the even orthogonal cases as D|C and C|D
    "D|C": ("Osp(m|2n)", "D", "C"),
    "C|D": ("Osp(m|2n)", "C", "D"),
}


@dataclass(frozen=True)
class SymmetryClass:
    label: str
    cartan_label: str
    noncompact: str
    compact: str
    comments: str
    rss: str
    rss_dimensions: str
    saddle_count: int
    c_exponent: Fraction

    @property
    def particle_hole(self) -> bool:
        return self.label in PARTICLE_HOLE_CLASSES

    @property
    def chiral(self) -> bool:
        return self.label in CHIRAL_CLASSES

    @property
    def wigner_dyson(self) -> bool:
        return self.label in WIGNER_DYSON_CLASSES

    @property
    def cartan_row(self) -> tuple[str, str, str]:
        return (self.cartan_label, self.noncompact, self.compact)

    @property
    def rss_row(self) -> tuple[str, str, str, str]:
        return (self.label, self.comments, self.rss, self.rss_dimensions)

    @property
    def rss_spaces(self) -> tuple[str, str, str]:
        return RSS_TABLE[self.rss]

    def rss_entry(self) -> dict:
        return {
            "rmt": self.label,
            "comments": self.comments,
            "rss": self.rss,
            "dimensions": self.rss_dimensions,
        }

    def __str__(self):
        return self.label


def _cls(label, cartan, noncompact, compact, comments, rss, dims, saddles=1, c=Fraction(1, 2)):
    return SymmetryClass(label, cartan, noncompact, compact, comments, rss, dims, saddles, c)


# c halves with every linear condition tying psi~ to psi (gamma, tau, pi).
SYMMETRY_CLASSES: dict[str, SymmetryClass] = {
    c.label: c
    for c in (
        _cls("A", "A", "Gl(N,C)/U(N)", "U(N)", "Wigner-Dyson (GUE)",
             "AIII|AIII", "m1 = n1 = n_A, m2 = n2 = n_R", c=Fraction(1)),
        _cls("AI", "AI", "Gl(N,R)/O(N)", "U(N)/O(N)", "Wigner-Dyson (GOE)",
             "BDI|CII", "m1 = 2n1 = 2n_A, m2 = 2n2 = 2n_R"),
        _cls("AII", "AII", "U*(2N)/Sp(N)", "U(2N)/Sp(N)", "Wigner-Dyson (GSE)",
             "CII|BDI", "m1 = 2n1 = 2n_A, m2 = 2n2 = 2n_R"),
        _cls("AIII", "AIII", "U(p,q)/U(p)xU(q)", "U(p+q)/U(p)xU(q)", "chiral GUE",
             "A|A", "m = n"),
        _cls("BDI", "BDI", "SO(p,q)/SO(p)xSO(q)", "SO(p+q)/SO(p)xSO(q)", "chiral GOE",
             "AI|AII", "m = n", c=Fraction(1, 4)),
        _cls("CII", "CII", "Sp(p,q)/Sp(p)xSp(q)", "Sp(p+q)/Sp(p)xSp(q)", "chiral GSE",
             "AII|AI", "m = n", c=Fraction(1, 4)),
        _cls("C", "C", "Sp(N,C)/Sp(N)", "Sp(N)", "NS",
             "DIII|CI", "m = n"),
        _cls("CI", "CI", "Sp(N,R)/U(N)", "Sp(N)/U(N)", "NS",
             "D|C", "m = 2n", c=Fraction(1, 4)),
        _cls("D", "BD", "SO(N,C)/SO(N)", "SO(N)", "NS",
             "CI|DIII", "m = n", saddles=2),
        _cls("DIII", "DIII", "SO*(2N)/U(N)", "SO(2N)/U(N)", "NS",
             "C|D", "m = 2n", saddles=2, c=Fraction(1, 4)),
    )
}


def get_class(label) -> SymmetryClass:
    if isinstance(label, SymmetryClass):
        return label
    key = str(label).strip().upper()
    try:
        return SYMMETRY_CLASSES[key]
    except KeyError:
        raise UsageError(
            f"unknown symmetry class {label!r}; expected one of {', '.join(CLASS_LABELS)}"
        ) from None
