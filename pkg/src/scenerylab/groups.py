"""Finite abelian groups presented as products of cycles ``Z_n1^d1 x ... x Z_nm^dm``.

Elements are vectors of vectors: one coordinate vector per factor, each entry
reduced modulo that factor's modulus.  Enumeration order is lexicographic over
the flattened coordinates, and the *flat index* of an element is its position
in that order.  Most hot paths work on flat indices.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import CapacityError, DomainError, GroupMismatchError

MAX_ORDER = 2**40
ENUMERATION_CAP = 2**20
ADD_TABLE_CAP = 4096

# Deterministic for every n < 3.3e24, which covers all 64-bit inputs.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin primality test."""
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def inverse_mod(x: int, p: int) -> int:
    """Inverse of ``x`` in the field ``Z_p``."""
    if not is_prime(p):
        raise DomainError(f"modulus {p} is not prime")
    if x % p == 0:
        raise DomainError(f"{x} is not invertible modulo {p}")
    return pow(x, -1, p)


_FACTOR_RE = re.compile(r"^z(\d+)(?:\^(\d+))?$")


@dataclass(frozen=True)
class GroupSpec:
    """A finite abelian group as an ordered list of ``(modulus, dimension)`` factors.

    Factors with equal modulus are merged and factors are sorted by modulus,
    so ``Z7 x Z7`` and ``Z7^2`` compare equal.
    """

    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        merged: dict[int, int] = {}
        for n, d in self.factors:
            n, d = int(n), int(d)
            if n < 2:
                raise DomainError(f"cycle modulus must be >= 2, got {n}")
            if d < 1:
                raise DomainError(f"factor dimension must be >= 1, got {d}")
            merged[n] = merged.get(n, 0) + d
        if not merged:
            raise DomainError("a group needs at least one factor")
        canonical = tuple(sorted(merged.items()))
        order = 1
        for n, d in canonical:
            order *= n**d
        if order > MAX_ORDER:
            raise CapacityError(f"group order {order} exceeds 2^40")
        object.__setattr__(self, "factors", canonical)

    @classmethod
    def parse(cls, text: str) -> "GroupSpec":
        """Parse ``"Z7"``, ``"Z7^3"``, ``"Z5^2xZ7"`` (case-insensitive)."""
        parts = [p.strip() for p in text.strip().lower().replace(" ", "").split("x")]
        factors = []
        for part in parts:
            m = _FACTOR_RE.match(part)
            if not m:
                raise DomainError(f"cannot parse group factor {part!r} in {text!r}")
            factors.append((int(m.group(1)), int(m.group(2) or 1)))
        return cls(tuple(factors))

    @classmethod
    def cycle(cls, n: int, d: int = 1) -> "GroupSpec":
        return cls(((n, d),))

    def __str__(self) -> str:
        return "x".join(f"Z{n}" if d == 1 else f"Z{n}^{d}" for n, d in self.factors)

    @cached_property
    def order(self) -> int:
        return math.prod(n**d for n, d in self.factors)

    @cached_property
    def moduli(self) -> tuple[int, ...]:
        """Modulus of every flattened coordinate."""
        return tuple(n for n, d in self.factors for _ in range(d))

    @property
    def rank(self) -> int:
        return len(self.moduli)

    @property
    def is_cycle(self) -> bool:
        return len(self.factors) == 1 and self.factors[0][1] == 1

    @cached_property
    def radix(self) -> tuple[int, ...]:
        """Place value of each flattened coordinate in the flat index."""
        weights = []
        w = 1
        for n in reversed(self.moduli):
            weights.append(w)
            w *= n
        return tuple(reversed(weights))

    def zero(self) -> "GroupElement":
        return self.from_flat((0,) * self.rank)

    def element(self, value) -> "GroupElement":
        """Build an element from an int (cycles), a flat sequence or a nested one."""
        if isinstance(value, GroupElement):
            if value.group != self:
                raise GroupMismatchError(f"element of {value.group} used in {self}")
            return value
        if isinstance(value, (int, np.integer)):
            if self.rank != 1:
                raise DomainError(f"integer element needs a rank-1 group, not {self}")
            return self.from_flat((int(value),))
        value = tuple(value)
        if value and all(isinstance(v, (tuple, list)) for v in value):
            flat = tuple(int(c) for vec in value for c in vec)
            if len(value) != len(self.factors) or any(
                len(vec) != d for vec, (_, d) in zip(value, self.factors)
            ):
                raise DomainError(f"nested coordinates {value} do not match {self}")
            return self.from_flat(flat)
        return self.from_flat(tuple(int(v) for v in value))

    def from_flat(self, flat) -> "GroupElement":
        flat = tuple(flat)
        if len(flat) != self.rank:
            raise DomainError(f"expected {self.rank} coordinates for {self}, got {len(flat)}")
        reduced = tuple(int(c) % n for c, n in zip(flat, self.moduli))
        return GroupElement(self, reduced)

    def parse_element(self, text: str) -> "GroupElement":
        """Parse ``"3"``, ``"-1"`` or ``"(1,2)"`` into an element."""
        body = text.strip().strip("()[]")
        coords = [int(c) for c in body.split(",") if c.strip()]
        return self.from_flat(coords)

    def index(self, elem: "GroupElement") -> int:
        if elem.group != self:
            raise GroupMismatchError(f"element of {elem.group} used in {self}")
        return sum(c * w for c, w in zip(elem.flat, self.radix))

    def from_index(self, i: int) -> "GroupElement":
        coords = []
        for w, n in zip(self.radix, self.moduli):
            coords.append((i // w) % n)
        return GroupElement(self, tuple(coords))

    def elements(self, cap: int = ENUMERATION_CAP) -> list["GroupElement"]:
        if self.order > cap:
            raise CapacityError(f"{self} has order {self.order} > enumeration cap {cap}")
        return [GroupElement(self, c) for c in itertools.product(*(range(n) for n in self.moduli))]

    @cached_property
    def coord_table(self) -> np.ndarray:
        """``(order, rank)`` array of flattened coordinates in enumeration order."""
        if self.order > ENUMERATION_CAP:
            raise CapacityError(f"{self} is too large to tabulate")
        grids = np.indices(self.moduli).reshape(self.rank, -1).T
        return np.ascontiguousarray(grids, dtype=np.int64)

    def index_of_coords(self, coords: np.ndarray) -> np.ndarray:
        """Flat indices of an ``(m, rank)`` coordinate array (entries reduced first)."""
        mod = np.asarray(self.moduli, dtype=np.int64)
        return (np.mod(coords, mod) * np.asarray(self.radix, dtype=np.int64)).sum(axis=-1)

    @cached_property
    def add_table(self) -> np.ndarray:
        """``add_table[i, j]`` is the flat index of ``elem(i) + elem(j)``."""
        if self.order > ADD_TABLE_CAP:
            raise CapacityError(f"addition table for {self} exceeds {ADD_TABLE_CAP} elements")
        c = self.coord_table
        table = self.index_of_coords(c[:, None, :] + c[None, :, :])
        return np.ascontiguousarray(table, dtype=np.int32)

    @cached_property
    def neg_table(self) -> np.ndarray:
        return np.ascontiguousarray(self.index_of_coords(-self.coord_table), dtype=np.int64)

    def scale_table(self, v: int) -> np.ndarray:
        """Flat index of ``v * elem(i)`` for every ``i``."""
        return self.index_of_coords(v * self.coord_table)

    def dot_table(self, x: "GroupElement", factor_index: int) -> np.ndarray:
        """``x . k`` on factor ``factor_index`` for every element ``k``."""
        lo, hi = self.factor_slice(factor_index)
        n = self.factors[factor_index][0]
        xs = np.asarray(x.flat[lo:hi], dtype=np.int64)
        return (self.coord_table[:, lo:hi] @ xs) % n

    def factor_slice(self, factor_index: int) -> tuple[int, int]:
        if not 0 <= factor_index < len(self.factors):
            raise DomainError(f"factor index {factor_index} out of range for {self}")
        lo = sum(d for _, d in self.factors[:factor_index])
        return lo, lo + self.factors[factor_index][1]


@dataclass(frozen=True)
class GroupElement:
    group: GroupSpec
    flat: tuple[int, ...]

    @property
    def coords(self) -> tuple[tuple[int, ...], ...]:
        out = []
        i = 0
        for _, d in self.group.factors:
            out.append(self.flat[i : i + d])
            i += d
        return tuple(out)

    def _check(self, other: "GroupElement"):
        if not isinstance(other, GroupElement) or other.group != self.group:
            raise GroupMismatchError(
                f"cannot combine element of {self.group} with {getattr(other, 'group', other)}"
            )

    def __add__(self, other: "GroupElement") -> "GroupElement":
        self._check(other)
        return self.group.from_flat(a + b for a, b in zip(self.flat, other.flat))

    def __sub__(self, other: "GroupElement") -> "GroupElement":
        self._check(other)
        return self.group.from_flat(a - b for a, b in zip(self.flat, other.flat))

    def __neg__(self) -> "GroupElement":
        return self.group.from_flat(-a for a in self.flat)

    def __rmul__(self, v: int) -> "GroupElement":
        if not isinstance(v, (int, np.integer)):
            return NotImplemented
        return self.group.from_flat(int(v) * a for a in self.flat)

    __mul__ = __rmul__

    def is_zero(self) -> bool:
        return not any(self.flat)

    @property
    def index(self) -> int:
        return self.group.index(self)

    def __str__(self) -> str:
        if len(self.flat) == 1:
            return str(self.flat[0])
        return "(" + ",".join(map(str, self.flat)) + ")"

    def __repr__(self) -> str:
        return f"<{self.group}:{self}>"

    def __lt__(self, other: "GroupElement") -> bool:
        self._check(other)
        return self.flat < other.flat


def add(a: GroupElement, b: GroupElement) -> GroupElement:
    return a + b


def scalar_mul(v: int, a: GroupElement) -> GroupElement:
    return v * a


def dot(a: GroupElement, b: GroupElement, factor_index: int = 0) -> int:
    """Dot product of the ``factor_index``-th coordinate vectors, reduced mod that factor."""
    a._check(b)
    lo, hi = a.group.factor_slice(factor_index)
    n = a.group.factors[factor_index][0]
    return sum(x * y for x, y in zip(a.flat[lo:hi], b.flat[lo:hi])) % n


def enumerate_elements(g: GroupSpec, cap: int = ENUMERATION_CAP) -> list[GroupElement]:
    return g.elements(cap)
