"""Step distributions (the law of a walk's increments) and step multisets."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping

import mpmath
import numpy as np

from .errors import DomainError
from .groups import GroupElement, GroupSpec

EXACT = "exact"
FLOAT = "float"
DEFAULT_PRECISION_BITS = 256
DEFAULT_TOLERANCE = mpmath.mpf("1e-30")


@dataclass(frozen=True, eq=False)
class StepDistribution:
    """Probability map over group elements.

    ``mode`` is ``"exact"`` (Fraction probabilities summing to exactly 1) or
    ``"float"`` (mpmath reals at ``precision_bits``, summing to 1 within
    ``tolerance``).  Zero entries are dropped.
    """

    group: GroupSpec
    probs: Mapping[GroupElement, object]
    mode: str = EXACT
    tolerance: object = None
    precision_bits: int = DEFAULT_PRECISION_BITS

    def __post_init__(self):
        clean: dict[GroupElement, object] = {}
        if self.mode not in (EXACT, FLOAT):
            raise DomainError(f"unknown mode {self.mode!r}")
        with mpmath.workprec(self.precision_bits):
            for k, p in self.probs.items():
                k = self.group.element(k)
                if self.mode == EXACT:
                    if isinstance(p, float):
                        raise DomainError("exact mode needs rational probabilities, got a float")
                    p = Fraction(p)
                else:
                    p = mpmath.mpf(p)
                if p < 0:
                    raise DomainError(f"negative probability {p} at {k}")
                if p:
                    clean[k] = clean.get(k, 0) + p
        if not clean:
            raise DomainError("step distribution has empty support")
        if self.mode == EXACT:
            total = sum(clean.values())
            if total != 1:
                raise DomainError(f"probabilities sum to {total}, not 1")
        else:
            tol = self.tolerance if self.tolerance is not None else DEFAULT_TOLERANCE
            with mpmath.workprec(self.precision_bits):
                tol = mpmath.mpf(tol)
                total = mpmath.fsum(clean.values())
                if abs(total - 1) > tol:
                    raise DomainError(f"probabilities sum to {total}, not 1 within {tol}")
            object.__setattr__(self, "tolerance", tol)
        object.__setattr__(self, "probs", dict(sorted(clean.items(), key=lambda kv: kv[0].flat)))

    # -- constructors ---------------------------------------------------

    @classmethod
    def uniform(cls, group: GroupSpec, elements: Iterable) -> "StepDistribution":
        """Uniform choice over a multiset of elements (duplicates add weight)."""
        elems = [group.element(e) for e in elements]
        if not elems:
            raise DomainError("empty multiset")
        w = Fraction(1, len(elems))
        probs: dict[GroupElement, Fraction] = {}
        for e in elems:
            probs[e] = probs.get(e, 0) + w
        return cls(group, probs)

    @classmethod
    def point_mass(cls, group: GroupSpec, element=0) -> "StepDistribution":
        if element == 0:
            element = group.zero()
        return cls(group, {group.element(element): Fraction(1)})

    @classmethod
    def from_mapping(cls, group: GroupSpec, mapping: Mapping, **kw) -> "StepDistribution":
        return cls(group, {group.element(k): v for k, v in mapping.items()}, **kw)

    # -- accessors ------------------------------------------------------

    @property
    def exact(self) -> bool:
        return self.mode == EXACT

    def __call__(self, k) -> object:
        k = self.group.element(k)
        return self.probs.get(k, Fraction(0) if self.exact else mpmath.mpf(0))

    def __eq__(self, other) -> bool:
        if not isinstance(other, StepDistribution):
            return NotImplemented
        return (self.group, self.mode, self.probs) == (other.group, other.mode, other.probs)

    def __hash__(self) -> int:
        return hash((self.group, self.mode, tuple(self.probs.items())))

    @property
    def support(self) -> list[GroupElement]:
        return list(self.probs)

    @cached_property
    def support_index(self) -> np.ndarray:
        return np.array([k.index for k in self.probs], dtype=np.int64)

    def as_float_array(self) -> np.ndarray:
        """Dense float64 probability vector over flat indices (for sampling)."""
        out = np.zeros(self.group.order)
        for k, p in self.probs.items():
            out[k.index] = float(p)
        return out

    def to_float(self, precision_bits: int = DEFAULT_PRECISION_BITS, tolerance=None) -> "StepDistribution":
        if not self.exact:
            return self
        with mpmath.workprec(precision_bits):
            probs = {k: mpmath.mpf(p.numerator) / p.denominator for k, p in self.probs.items()}
        return StepDistribution(self.group, probs, FLOAT, tolerance, precision_bits)

    def multiset(self) -> "StepMultiset":
        """Smallest multiset whose uniform law is this distribution (exact mode only)."""
        if not self.exact:
            raise DomainError("float-mode distributions have no multiset form")
        m = math.lcm(*(p.denominator for p in self.probs.values()))
        elems = []
        for k, p in self.probs.items():
            elems.extend([k] * int(p * m))
        return StepMultiset(tuple(elems), self.group)

    def key(self) -> str:
        """Stable text form, used for caching and reports."""
        items = ",".join(f"{k}:{p}" for k, p in self.probs.items())
        return f"{self.group}|{self.mode}|{items}"

    def describe(self) -> dict:
        return {
            "group": str(self.group),
            "mode": self.mode,
            "probs": {str(k): str(p) if self.exact else mpmath.nstr(p, 20) for k, p in self.probs.items()},
        }

    # -- convolution powers ---------------------------------------------

    def index_probs(self) -> dict[int, object]:
        return {k.index: p for k, p in self.probs.items()}

    def convolution_powers(self, max_power: int) -> list[dict[int, object]]:
        """``[gamma^(0), ..., gamma^(max_power)]`` as sparse ``{flat index: prob}`` maps."""
        add = self.group.add_table
        step = self.index_probs()
        zero = self.group.zero().index
        one = Fraction(1) if self.exact else mpmath.mpf(1)
        powers = [{zero: one}]
        with mpmath.workprec(self.precision_bits):
            for _ in range(max_power):
                prev = powers[-1]
                nxt: dict[int, object] = {}
                for a, pa in prev.items():
                    row = add[a]
                    for s, ps in step.items():
                        j = int(row[s])
                        nxt[j] = nxt.get(j, 0) + pa * ps
                powers.append(nxt)
        return powers


@dataclass(frozen=True)
class StepMultiset:
    """A nonempty multiset of steps, over a group or (``group=None``) over the integers."""

    elements: tuple
    group: GroupSpec | None = None

    def __post_init__(self):
        if not self.elements:
            raise DomainError("step multiset must be nonempty")
        if self.group is None:
            object.__setattr__(self, "elements", tuple(int(e) for e in self.elements))
        else:
            object.__setattr__(self, "elements", tuple(self.group.element(e) for e in self.elements))

    def counts(self) -> Counter:
        return Counter(self.elements)

    def distribution(self) -> StepDistribution:
        if self.group is None:
            raise DomainError("an integer multiset needs embed_mod_n before it is a walk")
        return StepDistribution.uniform(self.group, self.elements)


def delta_walk_z7(precision_bits: int = DEFAULT_PRECISION_BITS) -> StepDistribution:
    """Irrational walk on Z_7 with ``gamma_hat(3) = gamma_hat(-3)`` that still reconstructs.

    ``delta = (cos(6 pi / 7) + 1/2) / (2 cos(6 pi / 7) - 1)``,
    ``gamma(1) = 1/2 + delta`` and ``gamma(2) = 1/2 - delta``.
    """
    group = GroupSpec.cycle(7)
    with mpmath.workprec(precision_bits + 32):
        c = mpmath.cos(6 * mpmath.pi / 7)
        delta = (c + mpmath.mpf(1) / 2) / (2 * c - 1)
        probs = {group.element(1): mpmath.mpf(1) / 2 + delta, group.element(2): mpmath.mpf(1) / 2 - delta}
    return StepDistribution(group, probs, FLOAT, precision_bits=precision_bits)
