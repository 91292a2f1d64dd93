"""Fourier analysis of step distributions and reconstructibility verdicts.

A walk whose Fourier coefficients are pairwise distinct is reconstructive on
any finite abelian group.  For rational walks on products of distinct primes
larger than 5 distinctness is also necessary, so a collision there means
``NotReconstructive``.  Anywhere else a collision leaves the answer
``Unknown``.
"""
from __future__ import annotations

import enum
import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import mpmath
import numpy as np

from .cyclotomic import CyclotomicNumber, _reduce_terms
from .errors import CapacityError, DomainError, FallbackRequiredError, InconsistencyError
from .groups import ENUMERATION_CAP, GroupElement, GroupSpec, inverse_mod, is_prime
from .walks import DEFAULT_PRECISION_BITS, DEFAULT_TOLERANCE, EXACT, FLOAT, StepDistribution, StepMultiset

MARGIN_FACTOR = 10


class Verdict(str, enum.Enum):
    RECONSTRUCTIVE = "Reconstructive"
    NOT_RECONSTRUCTIVE = "NotReconstructive"
    UNKNOWN = "Unknown"


EXIT_CODES = {
    Verdict.RECONSTRUCTIVE: 0,
    Verdict.NOT_RECONSTRUCTIVE: 10,
    Verdict.UNKNOWN: 20,
}


def cyclotomic_context(group: GroupSpec) -> tuple[int, ...]:
    """Primes of the cyclotomic field holding this group's Fourier coefficients.

    Canonical groups have distinct moduli, so the only requirement is primality.
    """
    for n, d in group.factors:
        if not is_prime(n):
            raise FallbackRequiredError(
                f"factor Z{n} of {group} is not a prime cycle; exact Fourier arithmetic "
                "is only available over prime cyclotomic fields",
                factor=n,
            )
    return tuple(n for n, _ in group.factors)


@dataclass
class FourierTable:
    group: GroupSpec
    mode: str
    values: dict[GroupElement, object]
    precision_bits: int = DEFAULT_PRECISION_BITS
    tolerance: object = None

    def __getitem__(self, x) -> object:
        return self.values[self.group.element(x)]

    def numeric(self, x) -> complex:
        v = self[x]
        return complex(v) if isinstance(v, CyclotomicNumber) else complex(v)

    def to_json(self, explain: bool = False) -> dict:
        out = {}
        for x, v in self.values.items():
            z = self.numeric(x)
            entry = {"re": z.real, "im": z.imag}
            if explain and isinstance(v, CyclotomicNumber):
                entry["exact"] = v.to_json()
            out[str(x)] = entry
        return out


def _exponent_tables(group: GroupSpec, ks: np.ndarray, xs: np.ndarray) -> list[np.ndarray]:
    """Per-factor exponent arrays ``k_j . x_j mod n_j`` of shape ``(len(ks), len(xs))``."""
    out = []
    for j, (n, _) in enumerate(group.factors):
        lo, hi = group.factor_slice(j)
        out.append((ks[:, lo:hi] @ xs[:, lo:hi].T) % n)
    return out


def fourier_transform(
    gamma: StepDistribution,
    mode: str | None = None,
    precision_bits: int | None = None,
    cap: int = ENUMERATION_CAP,
) -> FourierTable:
    """``gamma_hat(x) = sum_k prod_j w_nj**(k_j . x_j) gamma(k)`` for every ``x``.

    Exact mode needs an exact walk and prime factor moduli; otherwise
    :class:`FallbackRequiredError` names the offending factor.
    """
    group = gamma.group
    if group.order > cap:
        raise CapacityError(f"{group} has order {group.order} > cap {cap}")
    if mode is None:
        mode = EXACT if gamma.exact else FLOAT
        if mode == EXACT:
            try:
                cyclotomic_context(group)
            except FallbackRequiredError:
                mode = FLOAT
    elems = group.elements(cap)
    ks = np.array([k.flat for k in gamma.support], dtype=np.int64).reshape(-1, group.rank)
    xs = group.coord_table
    exps = _exponent_tables(group, ks, xs)
    probs = list(gamma.probs.values())

    if mode == EXACT:
        if not gamma.exact:
            raise DomainError("exact Fourier transform needs an exact (rational) walk")
        ctx = cyclotomic_context(group)
        values = {}
        for xi, x in enumerate(elems):
            terms = [(tuple(int(e[ki, xi]) for e in exps), p) for ki, p in enumerate(probs)]
            values[x] = CyclotomicNumber._from_reduced(ctx, _reduce_terms(ctx, terms))
        return FourierTable(group, EXACT, values)

    bits = precision_bits or gamma.precision_bits
    moduli = [n for n, _ in group.factors]
    period = math.lcm(*moduli)
    with mpmath.workprec(bits + 16):
        fprobs = [p if isinstance(p, mpmath.mpf) else mpmath.mpf(p.numerator) / p.denominator for p in probs]
        roots = [mpmath.expjpi(mpmath.mpf(-2 * r) / period) for r in range(period)]
        phase = sum(e * (period // n) for e, n in zip(exps, moduli)) % period
        values = {}
        for xi, x in enumerate(elems):
            values[x] = mpmath.fsum(fprobs[ki] * roots[int(phase[ki, xi])] for ki in range(len(fprobs)))
    with mpmath.workprec(bits):
        values = {x: +v for x, v in values.items()}
    tol = gamma.tolerance if not gamma.exact else DEFAULT_TOLERANCE
    return FourierTable(group, FLOAT, values, bits, tol)


@dataclass
class CollisionScan:
    pairs: list[tuple[GroupElement, GroupElement]]
    near_ties: list[tuple[GroupElement, GroupElement, object]] = field(default_factory=list)

    @property
    def undecided(self) -> bool:
        return bool(self.near_ties)


def collision_scan(table: FourierTable, tolerance=None) -> CollisionScan:
    """All unordered pairs ``x < y`` (enumeration order) with equal coefficients.

    Exact tables compare canonical forms.  Float tables treat ``|diff| <= tol``
    as equal and report ``tol < |diff| <= 10 tol`` as near ties.
    """
    items = list(table.values.items())
    if table.mode == EXACT:
        buckets: dict[tuple, list[GroupElement]] = defaultdict(list)
        for x, v in items:
            buckets[v.key].append(x)
        pairs = []
        for members in buckets.values():
            pairs.extend(itertools.combinations(members, 2))
        pairs.sort(key=lambda p: (p[0].index, p[1].index))
        return CollisionScan(pairs)

    tol = tolerance if tolerance is not None else (table.tolerance or DEFAULT_TOLERANCE)
    with mpmath.workprec(table.precision_bits):
        tol = mpmath.mpf(tol)
        wide = tol * MARGIN_FACTOR
        order = sorted(range(len(items)), key=lambda i: items[i][1].real)
        pairs, near = [], []
        for a_pos, a in enumerate(order):
            xa, va = items[a]
            for b in order[a_pos + 1 :]:
                xb, vb = items[b]
                if vb.real - va.real > wide:
                    break
                d = abs(va - vb)
                x, y = sorted((xa, xb), key=lambda e: e.index)
                if d <= tol:
                    pairs.append((x, y))
                elif d <= wide:
                    near.append((x, y, d))
    pairs.sort(key=lambda p: (p[0].index, p[1].index))
    return CollisionScan(pairs, near)


def find_collisions(table: FourierTable, tolerance=None) -> list[tuple[GroupElement, GroupElement]]:
    return collision_scan(table, tolerance).pairs


def _require_prime_cycle(group: GroupSpec, what: str) -> int:
    if not group.is_cycle or not is_prime(group.order) or group.order <= 5:
        raise DomainError(f"{what} needs a prime cycle Z_p with p > 5, got {group}")
    return group.order


def multiplier_of_collision(gamma: StepDistribution, x, y) -> int | None:
    """The unit ``v = x^-1 y`` that leaves ``gamma`` invariant, or None in the degenerate case.

    A collision with a zero frequency forces the stay-put walk; that is
    checked and None is returned.  Failing checks raise
    :class:`InconsistencyError` since a true collision makes them impossible.
    """
    p = _require_prime_cycle(gamma.group, "multiplier_of_collision")
    if not gamma.exact:
        raise DomainError("multiplier_of_collision needs an exact rational walk")
    x, y = gamma.group.element(x), gamma.group.element(y)
    if x == y:
        raise DomainError("collision needs x != y")
    if x.is_zero() or y.is_zero():
        if gamma(gamma.group.zero()) != 1:
            raise InconsistencyError(
                f"collision ({x}, {y}) at frequency 0 but gamma(0) = {gamma(gamma.group.zero())} != 1"
            )
        return None
    v = inverse_mod(x.flat[0], p) * y.flat[0] % p
    for k in range(p):
        if gamma(k) != gamma(v * k % p):
            raise InconsistencyError(
                f"claimed collision ({x}, {y}) but gamma({k}) != gamma({v * k % p})"
            )
    return v


def drift(steps: StepMultiset) -> GroupElement:
    """Sum of the multiset in the group."""
    if steps.group is None:
        raise DomainError("drift needs a multiset over a group")
    total = steps.group.zero()
    for k in steps.elements:
        total = total + k
    return total


def is_symmetric(gamma: StepDistribution) -> bool:
    return all(gamma(-k) == p for k, p in gamma.probs.items())


@dataclass
class Collision:
    x: GroupElement
    y: GroupElement
    multiplier: int | None = None

    def to_json(self) -> dict:
        return {"x": str(self.x), "y": str(self.y), "multiplier": self.multiplier}


@dataclass
class AnalysisVerdict:
    verdict: Verdict
    distinct: bool | None
    collisions: list[Collision]
    drift: GroupElement | None
    symmetric: bool
    reason: str | None = None
    route: str = "fourier"
    mode: str = EXACT
    fourier_table: FourierTable | None = None
    near_ties: list = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.verdict]

    def to_json(self, explain: bool = False) -> dict:
        return {
            "verdict": self.verdict.value,
            "reason": self.reason,
            "distinct": self.distinct,
            "route": self.route,
            "mode": self.mode,
            "collisions": [c.to_json() for c in self.collisions],
            "near_ties": [
                {"x": str(x), "y": str(y), "abs_diff": mpmath.nstr(d, 5)} for x, y, d in self.near_ties
            ],
            "drift": None if self.drift is None else str(self.drift),
            "symmetric": self.symmetric,
            "fourier_table": None if self.fourier_table is None else self.fourier_table.to_json(explain),
        }


def _unknown_reason(gamma: StepDistribution) -> str:
    if not gamma.exact:
        return (
            "irrational step distribution: colliding coefficients do not rule out "
            "reconstruction (there is a reconstructive Z7 walk with a collision)"
        )
    for n, _ in gamma.group.factors:
        if not is_prime(n):
            return f"composite factor Z{n}: necessity of distinct coefficients is open there"
    small = [n for n, _ in gamma.group.factors if n <= 5]
    return f"prime factor(s) {small} <= 5: distinct coefficients are not necessary there"


def analyze(
    gamma: StepDistribution,
    *,
    tolerance=None,
    precision_bits: int | None = None,
    cap: int = ENUMERATION_CAP,
    table: FourierTable | None = None,
) -> AnalysisVerdict:
    """Full pipeline: Fourier table, collisions with multipliers, drift, symmetry, verdict."""
    group = gamma.group
    if table is None:
        table = fourier_transform(gamma, precision_bits=precision_bits, cap=cap)
    scan = collision_scan(table, tolerance)
    symmetric = is_symmetric(gamma)
    d = drift(gamma.multiset()) if gamma.exact and group.is_cycle else None

    prime_cycle = group.is_cycle and is_prime(group.order) and group.order > 5
    collisions = []
    for x, y in scan.pairs:
        v = multiplier_of_collision(gamma, x, y) if (prime_cycle and gamma.exact) else None
        collisions.append(Collision(x, y, v))

    necessary = gamma.exact and all(is_prime(n) and n > 5 for n, _ in group.factors)
    if scan.undecided:
        verdict, reason = Verdict.UNKNOWN, (
            f"{len(scan.near_ties)} coefficient difference(s) inside the decision margin "
            "(tol, 10*tol]; refusing to classify"
        )
    elif not collisions:
        verdict, reason = Verdict.RECONSTRUCTIVE, None
    elif necessary:
        verdict, reason = Verdict.NOT_RECONSTRUCTIVE, None
    else:
        verdict, reason = Verdict.UNKNOWN, _unknown_reason(gamma)
    return AnalysisVerdict(
        verdict=verdict,
        distinct=None if scan.undecided else not collisions,
        collisions=collisions,
        drift=d,
        symmetric=symmetric,
        reason=reason,
        mode=table.mode,
        fourier_table=table,
        near_ties=scan.near_ties,
    )


def drift_verdict(steps: StepMultiset) -> AnalysisVerdict:
    """Nonzero drift on Z_p (p > 5 prime) is enough; zero drift defers to :func:`analyze`."""
    if steps.group is None:
        raise DomainError("drift_verdict needs a multiset over Z_p")
    _require_prime_cycle(steps.group, "drift_verdict")
    d = drift(steps)
    gamma = steps.distribution()
    if not d.is_zero():
        return AnalysisVerdict(
            verdict=Verdict.RECONSTRUCTIVE,
            distinct=None,
            collisions=[],
            drift=d,
            symmetric=is_symmetric(gamma),
            route="drift",
        )
    out = analyze(gamma)
    out.drift = d
    return out


def embed_mod_n(steps: Iterable[int] | StepMultiset, n: int) -> StepDistribution:
    """Push an integer step law forward to ``Z_n``, merging steps congruent mod n."""
    if n < 2:
        raise DomainError("n must be >= 2")
    elems = steps.elements if isinstance(steps, StepMultiset) else tuple(steps)
    return StepDistribution.uniform(GroupSpec.cycle(n), [int(a) % n for a in elems])


@dataclass
class BoundedSupportResult:
    N: int
    gcd: int
    reduced_support: list[int]
    coefficients: dict[int, int]
    b: int
    symmetric: bool

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "gcd": self.gcd,
            "reduced_support": self.reduced_support,
            "coefficients": {str(k): v for k, v in self.coefficients.items()},
            "b": self.b,
            "symmetric": self.symmetric,
        }


def _span(support: list[int], coeffs: dict[int, int]) -> int:
    """Largest ``|sum_i c_i s_i|`` with each ``s_i`` drawn from ``support``."""
    hi = sum(max(c * s for s in support) for c in coeffs.values())
    lo = sum(min(c * s for s in support) for c in coeffs.values())
    return max(abs(hi), abs(lo), max(abs(s) for s in support))


def _euclid_certificate(values: list[int]) -> dict[int, int]:
    """Bezout coefficients over a greedily grown coprime prefix of ``values``."""
    g, coeffs = values[0], {values[0]: 1}
    if g < 0:
        g, coeffs = -g, {values[0]: -1}
    for a in values[1:]:
        if g == 1:
            break
        # extended Euclid on (g, a)
        old_r, r, old_s, s, old_t, t = g, a, 1, 0, 0, 1
        while r:
            q = old_r // r
            old_r, r = r, old_r - q * r
            old_s, s = s, old_s - q * s
            old_t, t = t, old_t - q * t
        if old_r < 0:
            old_r, old_s, old_t = -old_r, -old_s, -old_t
        if old_r == g:
            continue
        coeffs = {k: v * old_s for k, v in coeffs.items()}
        coeffs[a] = coeffs.get(a, 0) + old_t
        g = old_r
    if g != 1:
        raise InconsistencyError(f"values {values} are not coprime after gcd normalisation")
    return {k: v for k, v in coeffs.items() if v}


def bounded_support_N(steps: Iterable[int] | StepMultiset, exhaustive_limit: int = 4) -> BoundedSupportResult:
    """An explicit N such that the walk is reconstructive on every prime cycle n > N.

    The support is divided by its gcd ``d``; an integer combination ``c`` with
    ``1 in c(Gamma/d)`` is found; with ``b`` the largest absolute value of
    ``c(Gamma/d)`` and of ``Gamma/d`` the bound is ``max(2 b^2, d)``.  The
    ``d`` term keeps primes dividing the gcd (where the walk collapses) out
    of range.  Symmetric walks are flagged: no N helps them.
    """
    elems = list(steps.elements if isinstance(steps, StepMultiset) else steps)
    if not elems:
        raise DomainError("empty multiset")
    elems = [int(a) for a in elems]
    symmetric = Counter(elems) == Counter(-a for a in elems)
    nonzero = sorted({a for a in elems if a}, key=lambda a: (abs(a), a))
    if not nonzero:
        return BoundedSupportResult(0, 0, [0], {}, 0, True)
    d = math.gcd(*nonzero)
    support = sorted({a // d for a in elems})
    values = [a // d for a in nonzero]

    best = None
    for v in values:
        if abs(v) == 1:
            c = {v: v}
            best = (_span(support, c), 1, c)
            break
    if best is None:
        cert = _euclid_certificate(values)
        best = (_span(support, cert), max(abs(c) for c in cert.values()), cert)
        bound = best[1]
        if len(values) <= exhaustive_limit and bound <= 8:
            rng = range(-bound, bound + 1)
            for combo in itertools.product(rng, repeat=len(values)):
                if sum(c * v for c, v in zip(combo, values)) != 1:
                    continue
                c = {v: ci for v, ci in zip(values, combo) if ci}
                cand = (_span(support, c), max(abs(x) for x in combo), c)
                if cand[:2] < best[:2]:
                    best = cand
    b, _, coeffs = best
    return BoundedSupportResult(max(2 * b * b, d), d, support, coeffs, b, symmetric)


def primes_above(n: int, count: int) -> list[int]:
    out = []
    k = n + 1
    while len(out) < count:
        if is_prime(k):
            out.append(k)
        k += 1
    return out
