"""
Complex Grassmann algebra on a finite set of generators.

An element is a sparse map from generator subsets (bitmasks, bit ``k`` for
generator ``k``) to complex coefficients. Monomials are stored in increasing
generator order, so ``{0b011: 2}`` is ``2 ξ0 ξ1``.

Generators live in a :class:`GeneratorPool`. Elements remember their pool and
refuse to mix with elements of another pool.
"""

from __future__ import annotations

__all__ = [
    "GeneratorPool",
    "GrassmannElement",
    "g_mul",
    "g_derive",
    "g_derive_right",
    "g_exp",
    "g_log",
    "g_pow",
    "g_inv",
    "g_series",
    "berezin_top",
]

import cmath
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from superrmt.errors import PoolError, SingularityError, UsageError

logger = logging.getLogger(__name__)

_pool_ids = itertools.count(1)

EVEN = 0
ODD = 1
MIXED = -1


class GeneratorPool:
    """
    Append-only registry of anticommuting generators.

    Blocks of generators are allocated under a name (``"xi"``, ``"psi_F"``,
    ``"lambda"``...) so that coordinate generators and parameter generators
    can coexist in one algebra on disjoint ranges.
    """

    def __init__(self, size: int = 0, name: str = "xi"):
        self.id = next(_pool_ids)
        self._size = 0
        self._blocks: dict[str, range] = {}
        if size:
            self.allocate(name, size)

    @property
    def size(self) -> int:
        return self._size

    @property
    def blocks(self) -> Mapping[str, range]:
        return dict(self._blocks)

    def allocate(self, name: str, count: int) -> range:
        if count < 0:
            raise UsageError(f"cannot allocate {count} generators")
        if name in self._blocks:
            raise PoolError(f"generator block {name!r} already allocated in pool {self.id}")
        block = range(self._size, self._size + count)
        self._blocks[name] = block
        self._size += count
        logger.debug("pool %s: allocated %s -> %s", self.id, name, block)
        return block

    def generator(self, k: int) -> "GrassmannElement":
        self.check_index(k)
        return GrassmannElement(self, {1 << k: 1.0 + 0j})

    def generators(self, name: str | None = None) -> list["GrassmannElement"]:
        block = self._blocks[name] if name is not None else range(self._size)
        return [self.generator(k) for k in block]

    def scalar(self, value: complex) -> "GrassmannElement":
        return GrassmannElement(self, {0: complex(value)})

    def zero(self) -> "GrassmannElement":
        return GrassmannElement(self, {})

    def one(self) -> "GrassmannElement":
        return self.scalar(1.0)

    def top_mask(self, block: Iterable[int] | None = None) -> int:
        indices = range(self._size) if block is None else block
        mask = 0
        for k in indices:
            mask |= 1 << k
        return mask

    def check_index(self, k: int) -> None:
        if not 0 <= k < self._size:
            raise PoolError(f"generator index {k} outside pool {self.id} of size {self._size}")

    def __repr__(self):
        return f"GeneratorPool(id={self.id}, size={self._size}, blocks={list(self._blocks)})"


def _monomial_sign(left: int, right: int) -> int:
    """Sign of ξ_left · ξ_right after sorting into increasing order."""
    swaps = 0
    rest = right
    while rest:
        low = rest & -rest
        j = low.bit_length() - 1
        swaps += (left >> (j + 1)).bit_count()
        rest ^= low
    return -1 if swaps & 1 else 1


@dataclass(frozen=True, eq=False)
class GrassmannElement:
    pool: GeneratorPool
    terms: Mapping[int, complex] = field(default_factory=dict)

    def __post_init__(self):
        clean = {mask: complex(c) for mask, c in self.terms.items() if c != 0}
        object.__setattr__(self, "terms", clean)

    # -- queries ---------------------------------------------------------

    @property
    def num_generators(self) -> int:
        return self.pool.size

    @property
    def body(self) -> complex:
        return self.terms.get(0, 0j)

    def soul(self) -> "GrassmannElement":
        return GrassmannElement(self.pool, {m: c for m, c in self.terms.items() if m})

    def coefficient(self, mask: int) -> complex:
        return self.terms.get(mask, 0j)

    @property
    def parity(self) -> int:
        parities = {mask.bit_count() & 1 for mask in self.terms}
        if len(parities) > 1:
            return MIXED
        return parities.pop() if parities else EVEN

    @property
    def is_even(self) -> bool:
        return self.parity == EVEN

    @property
    def is_odd(self) -> bool:
        return self.parity == ODD or not self.terms

    def is_zero(self) -> bool:
        return not self.terms

    def max_abs(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def close_to(self, other: "GrassmannElement | complex", atol: float = 1e-10) -> bool:
        return (self - other).max_abs() <= atol

    # -- arithmetic ------------------------------------------------------

    def _lift(self, other) -> "GrassmannElement":
        if isinstance(other, GrassmannElement):
            if other.pool is not self.pool:
                raise PoolError(
                    f"cannot combine elements of pool {self.pool.id} and pool {other.pool.id}"
                )
            return other
        if isinstance(other, (int, float, complex)):
            return GrassmannElement(self.pool, {0: complex(other)})
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        terms = dict(self.terms)
        for mask, c in other.terms.items():
            terms[mask] = terms.get(mask, 0j) + c
        return GrassmannElement(self.pool, terms)

    __radd__ = __add__

    def __neg__(self):
        return GrassmannElement(self.pool, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return GrassmannElement(self.pool, {m: c * other for m, c in self.terms.items()})
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return g_mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * (1.0 / other)
        return g_mul(self, g_inv(self._lift(other)))

    def __rtruediv__(self, other):
        return g_inv(self) * other

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return g_pow(self, k)
        result = self.pool.one()
        for _ in range(k):
            result = g_mul(result, self)
        return result

    # -- rendering -------------------------------------------------------

    def render(self, symbol: str = "x") -> str:
        """Sorted monomials, degree first; used for readable test diffs."""
        if not self.terms:
            return "0"
        parts = []
        for mask in sorted(self.terms, key=lambda m: (m.bit_count(), m)):
            c = self.terms[mask]
            mono = "".join(f"{symbol}{k}" for k in range(mask.bit_length()) if mask >> k & 1)
            coeff = f"{c.real:+.6g}" if c.imag == 0 else f"+({c.real:.6g}{c.imag:+.6g}j)"
            parts.append(f"{coeff}*{mono}" if mono else coeff)
        return " ".join(parts)

    def __repr__(self):
        return f"GrassmannElement(pool={self.pool.id}, {self.render()})"


def g_mul(a: GrassmannElement, b: GrassmannElement) -> GrassmannElement:
    if a.pool is not b.pool:
        raise PoolError(f"cannot multiply elements of pool {a.pool.id} and pool {b.pool.id}")
    terms: dict[int, complex] = {}
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            if ma & mb:
                continue
            mask = ma | mb
            terms[mask] = terms.get(mask, 0j) + _monomial_sign(ma, mb) * ca * cb
    return GrassmannElement(a.pool, terms)


def g_derive(a: GrassmannElement, k: int) -> GrassmannElement:
    """Left derivative ∂/∂ξ_k: move ξ_k to the front, then strip it."""
    a.pool.check_index(k)
    bit = 1 << k
    below = bit - 1
    terms = {}
    for mask, c in a.terms.items():
        if mask & bit:
            sign = -1 if (mask & below).bit_count() & 1 else 1
            terms[mask ^ bit] = sign * c
    return GrassmannElement(a.pool, terms)


def g_derive_right(a: GrassmannElement, k: int) -> GrassmannElement:
    """Right derivative: move ξ_k to the back, then strip it."""
    a.pool.check_index(k)
    bit = 1 << k
    terms = {}
    for mask, c in a.terms.items():
        if mask & bit:
            sign = -1 if (mask >> (k + 1)).bit_count() & 1 else 1
            terms[mask ^ bit] = sign * c
    return GrassmannElement(a.pool, terms)


def berezin_top(a: GrassmannElement, generators: Sequence[int] | None = None) -> GrassmannElement:
    """
    Apply D(ξ) = ∂ξ1 ∘ ... ∘ ∂ξq to ``a`` (∂ξq acts first).

    With this ordering D(ξ1...ξq) = (-1)^(q(q-1)/2). Parameter generators not
    listed in ``generators`` survive in the result.
    """
    indices = list(range(a.pool.size)) if generators is None else list(generators)
    result = a
    for k in reversed(indices):
        result = g_derive(result, k)
    return result


def _require_even(a: GrassmannElement, op: str) -> None:
    if a.parity == MIXED or (a.parity == ODD and a.terms):
        raise UsageError(f"{op} needs an even element, got {a.render()}")


def g_series(a: GrassmannElement, derivatives: Callable[[complex, int], complex] | Sequence[complex]) -> GrassmannElement:
    """
    Evaluate f(a) = Σ_j f^(j)(body) n^j / j! for even ``a`` with nilpotent part n.

    ``derivatives`` is either the list [f(b), f'(b), ...] or a callable
    ``(body, j) -> f^(j)(body)``. The sum stops once n^j vanishes.
    """
    _require_even(a, "g_series")
    body = a.body
    nil = a.soul()
    result = a.pool.zero()
    power = a.pool.one()
    for j in range(a.pool.size // 2 + 1):
        if j and power.is_zero():
            break
        if callable(derivatives):
            coeff = derivatives(body, j)
        elif j < len(derivatives):
            coeff = derivatives[j]
        else:
            raise UsageError(f"g_series needs at least {j + 1} derivatives")
        result = result + power * (coeff / math.factorial(j))
        power = g_mul(power, nil)
    return result


def g_exp(a: GrassmannElement) -> GrassmannElement:
    e = cmath.exp(a.body)
    return g_series(a, lambda b, j: e)


def g_log(a: GrassmannElement) -> GrassmannElement:
    """Principal-branch logarithm of an even element with nonzero body."""
    if a.body == 0:
        raise SingularityError(f"g_log of an element with zero body: {a.render()}")

    def derivative(b, j):
        if j == 0:
            return cmath.log(b)
        return (-1) ** (j + 1) * math.factorial(j - 1) / b**j

    return g_series(a, derivative)


def g_pow(a: GrassmannElement, s: complex) -> GrassmannElement:
    """a**s for even ``a``; principal branch on the body."""
    if a.body == 0:
        raise SingularityError(f"g_pow of an element with zero body: {a.render()}")

    def derivative(b, j):
        falling = 1.0 + 0j
        for i in range(j):
            falling *= s - i
        return falling * b ** (s - j)

    return g_series(a, derivative)


def g_inv(a: GrassmannElement) -> GrassmannElement:
    """Multiplicative inverse; works for mixed parity as long as the body is nonzero."""
    b = a.body
    if b == 0:
        raise SingularityError(f"g_inv of an element with zero body: {a.render()}")
    nil = a.soul() * (1.0 / b)
    result = a.pool.one()
    power = a.pool.one()
    for _ in range(a.pool.size):
        power = g_mul(power, -nil)
        if power.is_zero():
            break
        result = result + power
    return result * (1.0 / b)
