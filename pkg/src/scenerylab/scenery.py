"""Binary sceneries on finite abelian groups and explicit indistinguishable pairs."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import DomainError, InconsistencyError
from .groups import ENUMERATION_CAP, GroupElement, GroupSpec, inverse_mod, is_prime


@dataclass(frozen=True)
class Scenery:
    """A labeling ``f: H -> {0,1}`` stored as bits in enumeration order."""

    group: GroupSpec
    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if len(bits) != self.group.order:
            raise DomainError(f"{self.group} needs {self.group.order} bits, got {len(bits)}")
        if any(b not in (0, 1) for b in bits):
            raise DomainError("scenery bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def indicator(cls, group: GroupSpec, ones: Iterable) -> "Scenery":
        bits = [0] * group.order
        for k in ones:
            bits[group.element(k).index] = 1
        return cls(group, tuple(bits))

    @classmethod
    def from_function(cls, group: GroupSpec, fn) -> "Scenery":
        return cls(group, tuple(int(fn(k)) for k in group.elements()))

    @classmethod
    def zeros(cls, group: GroupSpec) -> "Scenery":
        return cls(group, (0,) * group.order)

    @classmethod
    def all_ones(cls, group: GroupSpec) -> "Scenery":
        return cls(group, (1,) * group.order)

    def __call__(self, k) -> int:
        return self.bits[self.group.element(k).index]

    @property
    def array(self) -> np.ndarray:
        return np.array(self.bits, dtype=np.uint8)

    @property
    def ones_count(self) -> int:
        return sum(self.bits)

    def ones(self) -> list[GroupElement]:
        return [self.group.from_index(i) for i, b in enumerate(self.bits) if b]

    def ones_indices(self) -> list[int]:
        return [i for i, b in enumerate(self.bits) if b]

    def _permuted(self, source: np.ndarray) -> "Scenery":
        # result(k) = f(source[k])
        arr = self.array[source]
        return Scenery(self.group, tuple(int(b) for b in arr))

    def shift(self, s) -> "Scenery":
        s = self.group.element(s)
        return self._permuted(self.group.add_table[:, s.index])

    def flip(self) -> "Scenery":
        return self._permuted(self.group.neg_table)

    def multiply_coords(self, v: int) -> "Scenery":
        """The scenery ``g`` with ``g(v k) = f(k)``."""
        for n, _ in self.group.factors:
            if math.gcd(v, n) != 1:
                raise DomainError(f"{v} is not invertible modulo {n}")
        u = pow(v, -1, math.lcm(*(n for n, _ in self.group.factors)))
        return self._permuted(self.group.scale_table(u))

    def to_json(self) -> dict:
        return {"group": str(self.group), "bits": list(self.bits), "ones": [str(k) for k in self.ones()]}

    def __str__(self) -> str:
        return "".join(map(str, self.bits))


def shift(f: Scenery, s) -> Scenery:
    return f.shift(s)


def flip(f: Scenery) -> Scenery:
    return f.flip()


def multiply_coords(f: Scenery, v: int) -> Scenery:
    return f.multiply_coords(v)


def is_shift_of(f1: Scenery, f2: Scenery) -> GroupElement | None:
    """Smallest ``s`` in enumeration order with ``f1 = shift(f2, s)``, or None."""
    if f1.group != f2.group:
        return None
    g = f1.group
    if f1.ones_count != f2.ones_count:
        return None
    a1, a2 = f1.array, f2.array
    add = g.add_table
    for s in range(g.order):
        if np.array_equal(a1, a2[add[:, s]]):
            return g.from_index(s)
    return None


def canonical_rotation(f: Scenery) -> Scenery:
    """Lexicographically smallest member of the shift orbit of ``f``."""
    g = f.group
    arr = f.array
    best = None
    for s in range(g.order):
        cand = tuple(int(b) for b in arr[g.add_table[:, s]])
        if best is None or cand < best:
            best = cand
    return Scenery(g, best)


@dataclass
class Witness:
    case: str
    transform: str
    x: GroupElement | None = None
    y: GroupElement | None = None
    multiplier: int | None = None
    scale: int | None = None
    factor_index: int | None = None
    walk: str | None = None

    def to_json(self) -> dict:
        out = {"case": self.case, "transform": self.transform}
        for name in ("x", "y"):
            v = getattr(self, name)
            out[name] = None if v is None else str(v)
        out.update(
            multiplier=self.multiplier, scale=self.scale, factor_index=self.factor_index, walk=self.walk
        )
        return out


@dataclass
class IndistinguishablePair:
    f1: Scenery
    f2: Scenery
    witness: Witness
    oracle: dict | None = field(default=None)

    def __post_init__(self):
        if self.f1.group != self.f2.group:
            raise DomainError("pair members live on different groups")
        s = is_shift_of(self.f1, self.f2)
        if s is not None:
            raise InconsistencyError(
                f"constructed pair is shift-related (shift {s}); construction is broken"
            )

    def to_json(self) -> dict:
        out = {
            "group": str(self.f1.group),
            "f1": self.f1.to_json(),
            "f2": self.f2.to_json(),
            "witness": self.witness.to_json(),
        }
        if self.oracle is not None:
            out["oracle"] = self.oracle
        return out


def _require_big_prime(p: int):
    if not is_prime(p) or p <= 5:
        raise DomainError(f"construction needs a prime p > 5, got {p}")


def _cycle_g(p: int, reflect: bool) -> Scenery:
    return Scenery.indicator(GroupSpec.cycle(p), (0, 1, 3) if reflect else (0, 1))


def build_pair_cycle(p: int, v: int, x=None, y=None) -> IndistinguishablePair:
    """Pair for a walk on Z_p invariant under ``k -> v k``: ``f2(v k) = f1(k)``."""
    _require_big_prime(p)
    v %= p
    if v in (0, 1):
        raise DomainError(f"multiplier {v} yields no pair")
    g = GroupSpec.cycle(p)
    if v == p - 1:
        f1 = _cycle_g(p, True)
        f2 = f1.flip()
    else:
        f1 = _cycle_g(p, False)
        f2 = Scenery.indicator(g, (0, v))
    if f2 != f1.multiply_coords(v):
        raise InconsistencyError("cycle pair does not satisfy f2(v k) = f1(k)")
    witness = Witness(
        case="cycle-flip" if v == p - 1 else "cycle-multiplier",
        transform=f"v2(t) = {v} * v1(t) mod {p}",
        x=None if x is None else g.element(x),
        y=None if y is None else g.element(y),
        multiplier=v,
    )
    return IndistinguishablePair(f1, f2, witness)


def _compose(group: GroupSpec, factor_index: int, w: GroupElement, g: Scenery) -> Scenery:
    """``k -> g(w . k_j)`` where ``w`` is a vector on factor ``j``."""
    dots = group.dot_table(w, factor_index)
    return Scenery(group, tuple(int(g.bits[int(e)]) for e in dots))


def _factor_vector(group: GroupSpec, j: int, elem: GroupElement) -> tuple[int, ...]:
    lo, hi = group.factor_slice(j)
    return elem.flat[lo:hi]


def _scale_between(x: tuple, y: tuple, p: int) -> int | None:
    """``l`` with ``x = l y`` over Z_p, or None when x is not a multiple of y."""
    piv = next(i for i, c in enumerate(y) if c)
    l = x[piv] * inverse_mod(y[piv], p) % p
    if all((l * b - a) % p == 0 for a, b in zip(x, y)):
        return l
    return None


def _factor_pair(group: GroupSpec, j: int, x: GroupElement, y: GroupElement) -> tuple[Scenery, Scenery, Witness]:
    p = group.factors[j][0]
    xj, yj = _factor_vector(group, j, x), _factor_vector(group, j, y)
    zero = all(c == 0 for c in xj) or all(c == 0 for c in yj)
    if zero:
        # the walk never leaves the cosets of w-perp: any two sceneries that are
        # functions of w . k with equal ones count coincide in law
        w = yj if all(c == 0 for c in xj) else xj
        welem = group.zero()
        lo, _ = group.factor_slice(j)
        flat = list(welem.flat)
        flat[lo : lo + len(w)] = w
        welem = group.from_flat(flat)
        cyc = GroupSpec.cycle(p)
        f1 = _compose(group, j, welem, Scenery.indicator(cyc, (0, 1)))
        f2 = _compose(group, j, welem, Scenery.indicator(cyc, (0, 2)))
        return f1, f2, Witness("degenerate", f"observations constant along cosets of ({','.join(map(str, w))})-perp", x, y, factor_index=j)

    l = _scale_between(xj, yj, p)
    if l is not None:
        g = _cycle_g(p, l == p - 1)
        v = inverse_mod(l, p)
        case = "torus-multiple"
        transform = f"x = {l} y on factor {j}; coupled walks satisfy v2 . y = v1 . x"
    else:
        g = Scenery.indicator(GroupSpec.cycle(p), (0,))
        v = None
        case = "torus-independent"
        transform = f"indicators of the hyperplanes orthogonal to x and y on factor {j}"
    f1 = _compose(group, j, x, g)
    f2 = _compose(group, j, y, g)
    w = Witness(case, transform, x, y, multiplier=v, scale=l, factor_index=j)
    return f1, f2, w


def build_pair_torus(p: int, d: int, x, y) -> IndistinguishablePair:
    """Pair ``f_x(k) = g(x.k)``, ``f_y(k) = g(y.k)`` on ``Z_p^d`` for a collision at (x, y)."""
    _require_big_prime(p)
    group = GroupSpec.cycle(p, d)
    x, y = group.element(x), group.element(y)
    if x == y:
        raise DomainError("collision needs x != y")
    f1, f2, w = _factor_pair(group, 0, x, y)
    return IndistinguishablePair(f1, f2, w)


def build_pair_product(group: GroupSpec, x, y) -> IndistinguishablePair:
    """Lift the torus construction from the first factor where ``x`` and ``y`` differ."""
    for n, _ in group.factors:
        _require_big_prime(n)
    x, y = group.element(x), group.element(y)
    if x == y:
        raise DomainError("collision needs x != y")
    j = next(i for i in range(len(group.factors)) if x.coords[i] != y.coords[i])
    f1, f2, w = _factor_pair(group, j, x, y)
    return IndistinguishablePair(f1, f2, w)


def build_pair_stay_put(group: GroupSpec) -> IndistinguishablePair:
    """For ``gamma(0) = 1`` any two sceneries with equal ones count are indistinguishable."""
    if group.order < 4:
        raise DomainError(f"{group} is too small for two non-shift-related sceneries of equal weight")
    elems = group.elements()
    f1 = Scenery.indicator(group, elems[:2])
    for k in elems[2:]:
        f2 = Scenery.indicator(group, [elems[0], k])
        if is_shift_of(f1, f2) is None:
            return IndistinguishablePair(f1, f2, Witness("stay-put", "walk never moves; only the ones count is observable"))
    raise DomainError(f"no non-shift-related pair of weight 2 on {group}")


FIG1_WALK = (-2, -1, 1, 2)


def parity_example_Z12() -> IndistinguishablePair:
    """Parity scenery vs 3-blocks on Z_12; both give i.i.d. fair bits under uniform {-2,-1,1,2}."""
    g = GroupSpec.cycle(12)
    f1 = Scenery.from_function(g, lambda k: k.flat[0] % 2)
    f2 = Scenery.from_function(g, lambda k: 0 if k.flat[0] % 6 in (0, 1, 2) else 1)
    w = Witness(
        "iid-bits",
        "both observation streams are i.i.d. uniform bits",
        walk="uniform{-2,-1,1,2}",
    )
    return IndistinguishablePair(f1, f2, w)
