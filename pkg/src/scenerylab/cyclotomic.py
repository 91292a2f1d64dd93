"""Exact arithmetic in Q(w_p1, ..., w_pm) for distinct primes p_j.

A number is stored in the power basis ``prod_j t_j**e_j`` with
``0 <= e_j <= p_j - 2``.  Since the minimal polynomial of ``w_pj`` stays
``1 + t + ... + t**(p_j - 1)`` over the field generated by the other roots,
each variable is reduced on its own and the reduced form is canonical:
two numbers are equal iff their coefficient maps are equal.

Evaluation uses ``w_p = exp(-2*pi*i/p)``.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Mapping

import mpmath

from .errors import DomainError, GroupMismatchError
from .groups import is_prime


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, str):
        return Fraction(c)
    if isinstance(c, float):
        raise TypeError("cyclotomic coefficients must be exact rationals, not floats")
    return Fraction(c)


def check_context(context) -> tuple[int, ...]:
    context = tuple(int(p) for p in context)
    if not context:
        raise DomainError("empty cyclotomic context")
    if len(set(context)) != len(context):
        raise DomainError(f"repeated prime in cyclotomic context {context}")
    for p in context:
        if not is_prime(p):
            raise DomainError(f"cyclotomic context entry {p} is not prime")
    return context


def _reduce_terms(context: tuple[int, ...], terms) -> dict[tuple[int, ...], Fraction]:
    """Canonical coefficient map from ``(exponents, coeff)`` pairs with arbitrary exponents."""
    out: dict[tuple[int, ...], Fraction] = {}
    for exps, c in terms:
        if not c:
            continue
        exps = tuple(e % p for e, p in zip(exps, context))
        # t^(p-1) = -(1 + t + ... + t^(p-2)) for every saturated variable
        choices = []
        sign = 1
        for e, p in zip(exps, context):
            if e == p - 1:
                choices.append(range(p - 1))
                sign = -sign
            else:
                choices.append((e,))
        for key in itertools.product(*choices):
            v = out.get(key, 0) + (c if sign > 0 else -c)
            if v:
                out[key] = v
            else:
                out.pop(key, None)
    return out


class CyclotomicNumber:
    """Immutable element of a multi-prime cyclotomic field."""

    __slots__ = ("context", "coeffs", "_key")

    def __init__(self, context, coeffs: Mapping | None = None):
        context = check_context(context)
        self.context = context
        raw = coeffs or {}
        self.coeffs = _reduce_terms(
            context, ((_exps(k, len(context)), _as_fraction(v)) for k, v in raw.items())
        )
        self._key = None

    @classmethod
    def _from_reduced(cls, context, coeffs) -> "CyclotomicNumber":
        obj = cls.__new__(cls)
        obj.context = context
        obj.coeffs = coeffs
        obj._key = None
        return obj

    @classmethod
    def constant(cls, context, value) -> "CyclotomicNumber":
        context = check_context(context)
        v = _as_fraction(value)
        return cls._from_reduced(context, {(0,) * len(context): v} if v else {})

    @classmethod
    def monomial(cls, context, exponents, coeff=1) -> "CyclotomicNumber":
        """``coeff * prod_j t_j**exponents[j]`` in reduced form."""
        context = check_context(context)
        return cls._from_reduced(
            context, _reduce_terms(context, [(_exps(exponents, len(context)), _as_fraction(coeff))])
        )

    # -- structure -----------------------------------------------------

    @property
    def key(self) -> tuple:
        if self._key is None:
            self._key = (self.context, tuple(sorted(self.coeffs.items())))
        return self._key

    def __hash__(self) -> int:
        return hash(self.key)

    def _coerce(self, other) -> "CyclotomicNumber":
        if isinstance(other, CyclotomicNumber):
            if other.context != self.context:
                raise GroupMismatchError(
                    f"cyclotomic contexts differ: {self.context} vs {other.context}"
                )
            return other
        if isinstance(other, (int, Fraction)):
            return CyclotomicNumber.constant(self.context, other)
        return NotImplemented

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = CyclotomicNumber.constant(self.context, other)
        if not isinstance(other, CyclotomicNumber):
            return NotImplemented
        return self.context == other.context and self.coeffs == other.coeffs

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def is_rational(self) -> bool:
        return not self.coeffs or set(self.coeffs) == {(0,) * len(self.context)}

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise DomainError(f"{self} is not rational")
        return self.coeffs.get((0,) * len(self.context), Fraction(0))

    # -- field operations ----------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            s = out.get(k, 0) + v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return CyclotomicNumber._from_reduced(self.context, out)

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicNumber._from_reduced(self.context, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return CyclotomicNumber._from_reduced(self.context, {})
            return CyclotomicNumber._from_reduced(
                self.context, {k: v * other for k, v in self.coeffs.items()}
            )
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        ctx = self.context
        raw: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = tuple((a + b) % p for a, b, p in zip(e1, e2, ctx))
                raw[e] = raw.get(e, 0) + c1 * c2
        return CyclotomicNumber._from_reduced(ctx, _reduce_terms(ctx, raw.items()))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = CyclotomicNumber.constant(self.context, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def galois(self, a) -> "CyclotomicNumber":
        """Apply the automorphism ``w_pj -> w_pj**a_j``; ``a`` is an int or per-prime tuple."""
        if isinstance(a, int):
            a = (a,) * len(self.context)
        for aj, p in zip(a, self.context):
            if aj % p == 0:
                raise DomainError(f"{aj} does not define an automorphism modulo {p}")
        terms = ((tuple(e * aj for e, aj in zip(k, a)), v) for k, v in self.coeffs.items())
        return CyclotomicNumber._from_reduced(self.context, _reduce_terms(self.context, terms))

    def conjugate(self) -> "CyclotomicNumber":
        return self.galois(-1)

    def _other_conjugates(self) -> "CyclotomicNumber":
        prod = CyclotomicNumber.constant(self.context, 1)
        units = itertools.product(*(range(1, p) for p in self.context))
        for a in units:
            if all(x == 1 for x in a):
                continue
            prod = prod * self.galois(a)
        return prod

    def norm(self) -> Fraction:
        """Field norm down to Q (product of all Galois conjugates)."""
        return (self * self._other_conjugates()).rational_value()

    def inverse(self) -> "CyclotomicNumber":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in a cyclotomic field")
        if self.is_rational():
            return CyclotomicNumber.constant(self.context, 1 / self.rational_value())
        rest = self._other_conjugates()
        n = (self * rest).rational_value()
        return rest * (1 / n)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return CyclotomicNumber.constant(self.context, other) * self.inverse()

    # -- numerics and serialization --------------------------------------

    def numeric_eval(self, precision_bits: int = 53) -> mpmath.mpc:
        """Value at ``w_p = exp(-2 pi i / p)`` computed with ``precision_bits`` of working precision."""
        if precision_bits < 53:
            raise DomainError("precision_bits must be at least 53")
        with mpmath.workprec(precision_bits + 16):
            roots = [mpmath.expjpi(mpmath.mpf(-2) / p) for p in self.context]
            total = mpmath.mpc(0)
            for exps, c in self.coeffs.items():
                term = mpmath.mpf(c.numerator) / c.denominator
                for r, e in zip(roots, exps):
                    if e:
                        term *= r**e
                total += term
        with mpmath.workprec(precision_bits):
            return +total

    def __complex__(self) -> complex:
        return complex(self.numeric_eval(53))

    def to_json(self) -> list:
        """``[[exponents, numerator, denominator], ...]`` sorted by exponent vector."""
        return [[list(k), v.numerator, v.denominator] for k, v in sorted(self.coeffs.items())]

    @classmethod
    def from_json(cls, context, data) -> "CyclotomicNumber":
        return cls(context, {tuple(e): Fraction(n, d) for e, n, d in data})

    def __repr__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        names = [f"t{p}" for p in self.context]
        for exps, c in sorted(self.coeffs.items()):
            mono = "*".join(
                name if e == 1 else f"{name}^{e}" for name, e in zip(names, exps) if e
            )
            parts.append(f"{c}" if not mono else (mono if c == 1 else f"{c}*{mono}"))
        return " + ".join(parts)


def _exps(key, m: int) -> tuple[int, ...]:
    if isinstance(key, int):
        if m != 1:
            raise DomainError("integer exponent key needs a single-prime context")
        return (key,)
    key = tuple(int(e) for e in key)
    if len(key) != m:
        raise DomainError(f"exponent vector {key} has wrong length for a {m}-prime context")
    return key


def reduce(context, poly: Mapping) -> CyclotomicNumber:
    """Canonical form of a rational polynomial ``{exponents: coeff}`` at the roots of unity."""
    return CyclotomicNumber(context, poly)


def is_zero(x: CyclotomicNumber) -> bool:
    return x.is_zero()


def numeric_eval(x: CyclotomicNumber, precision_bits: int = 53) -> mpmath.mpc:
    return x.numeric_eval(precision_bits)
