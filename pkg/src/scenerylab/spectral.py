"""Autocorrelations, multispectra and exact recovery of a scenery up to shift.

Conventions.  For a scenery ``f`` on ``H`` with ``n = |H|``:

* ``a_f(l) = sum_k f(k) f(k + l)`` and ``b_f(l) = E[f(v(T)) f(v(T + l))]``
  with ``v(T)`` uniform, so ``b_f(l) = (1/n) sum_x gamma^(l)(x) a_f(x)``.
  In Fourier form ``b_f(l) = (1/n**2) sum_xi gamma_hat(xi)**l a_hat(xi)``.
* ``A_f(l_1..l_m) = sum_k f(k) f(k + l_1) ... f(k + l_1 + ... + l_m)``
  with ``m = n - 1``; ``B_f`` is its temporal counterpart.

Tuples of lags are stored as tuples of flat group indices, which on a cycle
are simply the lag values.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import numpy as np

from . import kernels
from .analysis import collision_scan, cyclotomic_context, fourier_transform
from .cyclotomic import CyclotomicNumber
from .errors import (
    CapacityError,
    DomainError,
    InconsistencyError,
    InvalidInputError,
    SingularSystemError,
)
from .groups import GroupSpec
from .linalg import apply_along_axis, solve, vandermonde_inverse
from .scenery import Scenery, canonical_rotation
from .walks import StepDistribution

MULTISPECTRUM_CAP = 8
DENSE_FOURIER_CAP = 6
PIPELINE_CAP = 6


# -- autocorrelation ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpatialAutocorrelation:
    group: GroupSpec
    values: np.ndarray  # int64, indexed by flat lag index

    def __getitem__(self, lag) -> int:
        return int(self.values[self.group.element(lag).index])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SpatialAutocorrelation)
            and self.group == other.group
            and np.array_equal(self.values, other.values)
        )

    def to_json(self) -> dict:
        return {str(self.group.from_index(i)): int(v) for i, v in enumerate(self.values)}


@dataclass(frozen=True)
class TemporalAutocorrelation:
    values: tuple  # b(0), ..., b(L): Fractions, or mpf in float mode

    def __getitem__(self, lag: int):
        return self.values[lag]

    def __len__(self) -> int:
        return len(self.values)

    @property
    def max_lag(self) -> int:
        return len(self.values) - 1

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lag", "numerator", "denominator", "float"])
        for lag, v in enumerate(self.values):
            if isinstance(v, Fraction):
                w.writerow([lag, v.numerator, v.denominator, repr(float(v))])
            else:
                w.writerow([lag, "", "", mpmath.nstr(v, 20)])
        return buf.getvalue()


def spatial_autocorrelation(f: Scenery) -> SpatialAutocorrelation:
    g = f.group
    arr = f.array.astype(np.int64)
    add = g.add_table
    ones = np.flatnonzero(arr)
    vals = np.array([int(arr[add[ones, lag]].sum()) for lag in range(g.order)], dtype=np.int64)
    return SpatialAutocorrelation(g, vals)


def _check_same_group(gamma: StepDistribution, f: Scenery):
    if gamma.group != f.group:
        raise DomainError(f"walk lives on {gamma.group} but scenery on {f.group}")


def temporal_autocorrelation_exact(gamma: StepDistribution, f: Scenery, max_lag: int) -> TemporalAutocorrelation:
    """``b_f(l)`` for ``l = 0..max_lag`` via convolution powers, exact rationals."""
    _check_same_group(gamma, f)
    if not gamma.exact:
        raise DomainError("exact temporal autocorrelation needs a rational walk")
    a = spatial_autocorrelation(f).values
    n = f.group.order
    out = []
    for power in gamma.convolution_powers(max_lag):
        out.append(sum((p * int(a[x]) for x, p in power.items()), Fraction(0)) / n)
    return TemporalAutocorrelation(tuple(out))


def character_matrix(group: GroupSpec, conjugate: bool = False) -> list[list[CyclotomicNumber]]:
    """``F[x][xi] = w**(xi . x)`` (or its conjugate) as exact cyclotomic monomials."""
    ctx = cyclotomic_context(group)
    xs = group.coord_table
    sign = -1 if conjugate else 1
    exps = []
    for j, (n, _) in enumerate(group.factors):
        lo, hi = group.factor_slice(j)
        exps.append((sign * (xs[:, lo:hi] @ xs[:, lo:hi].T)) % n)
    size = group.order
    return [
        [CyclotomicNumber.monomial(ctx, tuple(int(e[x, xi]) for e in exps)) for xi in range(size)]
        for x in range(size)
    ]


def temporal_autocorrelation_fourier(gamma: StepDistribution, f: Scenery, max_lag: int) -> TemporalAutocorrelation:
    """Independent route: ``b_f(l) = (1/n**2) sum_xi gamma_hat(xi)**l a_hat(xi)``.

    Computed in the cyclotomic field when the group allows it (the result must
    come out rational), else numerically at the walk's precision.
    """
    _check_same_group(gamma, f)
    g = f.group
    n = g.order
    a = spatial_autocorrelation(f).values
    table = fourier_transform(gamma)
    elems = g.elements()
    if table.mode == "exact":
        chars = character_matrix(g)
        ctx = chars[0][0].context
        zero = CyclotomicNumber.constant(ctx, 0)
        ahat = [sum((chars[x][xi] * int(a[x]) for x in range(n) if a[x]), zero) for xi in range(n)]
        nodes = [table.values[x] for x in elems]
        out = []
        powers = [CyclotomicNumber.constant(ctx, 1)] * n
        for lag in range(max_lag + 1):
            total = sum((pw * ah for pw, ah in zip(powers, ahat)), zero)
            if not total.is_rational():
                raise InconsistencyError(f"b_f({lag}) came out irrational: {total!r}")
            out.append(total.rational_value() / (n * n))
            powers = [pw * z for pw, z in zip(powers, nodes)]
        return TemporalAutocorrelation(tuple(out))
    with mpmath.workprec(table.precision_bits):
        period, phase = _phase_table(g)
        roots = [mpmath.expjpi(mpmath.mpf(-2 * r) / period) for r in range(period)]
        ahat = [mpmath.fsum(int(a[x]) * roots[int(phase[x, xi])] for x in range(n)) for xi in range(n)]
        nodes = [table.values[x] for x in elems]
        out = []
        for lag in range(max_lag + 1):
            total = mpmath.fsum(z**lag * ah for z, ah in zip(nodes, ahat)) / (n * n)
            out.append(total.real)
    return TemporalAutocorrelation(tuple(out))


def _phase_table(g: GroupSpec) -> tuple[int, np.ndarray]:
    """``(P, E)`` with ``w**(xi . x) = exp(-2 pi i E[x, xi] / P)``."""
    period = math.lcm(*g.moduli)
    xs = g.coord_table
    phase = np.zeros((g.order, g.order), dtype=np.int64)
    for j, (m, _) in enumerate(g.factors):
        lo, hi = g.factor_slice(j)
        phase = (phase + (xs[:, lo:hi] @ xs[:, lo:hi].T) % m * (period // m)) % period
    return period, phase


def _require_distinct(gamma: StepDistribution):
    table = fourier_transform(gamma)
    scan = collision_scan(table)
    if scan.pairs or scan.near_ties:
        pairs = [(str(x), str(y)) for x, y in scan.pairs] + [(str(x), str(y)) for x, y, _ in scan.near_ties]
        raise SingularSystemError(
            f"Fourier coefficients of the walk collide at {pairs[:5]}; "
            "the Vandermonde system is singular",
            collisions=pairs,
        )
    return table


def inverse_transfer_matrix(gamma: StepDistribution) -> list[list]:
    """``W`` with ``a_f = n * W b_f`` on the lag grid ``0..n-1``.

    ``W`` inverts ``G[l][x] = gamma^(l)(x)``.  On prime-factor groups it is
    built as ``F U`` over the cyclotomic field (``F`` the character matrix,
    ``U`` the inverse Vandermonde in the nodes ``gamma_hat(xi)``) and must come
    out rational.  Other exact walks use a rational solve of ``G`` itself.
    Float walks get an mpmath inverse of ``G``.
    """
    table = _require_distinct(gamma)
    g = gamma.group
    n = g.order
    if table.mode == "exact":
        nodes = [table.values[x] for x in g.elements()]
        ctx = nodes[0].context
        one = CyclotomicNumber.constant(ctx, 1)
        zero = CyclotomicNumber.constant(ctx, 0)
        u = vandermonde_inverse(nodes, one=one, zero=zero)
        f = character_matrix(g)
        w = []
        for x in range(n):
            row = []
            for lag in range(n):
                v = sum((f[x][xi] * u[xi][lag] for xi in range(n)), zero)
                if not v.is_rational():
                    raise InconsistencyError("inverse transfer matrix is not rational")
                row.append(v.rational_value())
            w.append(row)
        return w
    powers = gamma.convolution_powers(n - 1)
    if gamma.exact:
        gmat = [[powers[lag].get(x, Fraction(0)) for x in range(n)] for lag in range(n)]
        cols = [solve(gmat, [Fraction(int(i == j)) for i in range(n)]) for j in range(n)]
        return [[cols[j][i] for j in range(n)] for i in range(n)]
    with mpmath.workprec(gamma.precision_bits):
        gmat = mpmath.matrix([[powers[lag].get(x, 0) for x in range(n)] for lag in range(n)])
        inv = gmat**-1
        return [[inv[i, j] for j in range(n)] for i in range(n)]


def _as_integer(v, what: str) -> int:
    if isinstance(v, Fraction):
        if v.denominator != 1:
            raise InconsistencyError(f"{what} recovered as non-integer {v}")
        return int(v)
    r = int(mpmath.nint(v))
    if abs(v - r) > mpmath.mpf(10) ** -10:
        raise InconsistencyError(f"{what} recovered as non-integer {v}")
    return r


def vandermonde_recover_af(gamma: StepDistribution, b: TemporalAutocorrelation) -> SpatialAutocorrelation:
    """Invert ``a_f -> b_f``; needs pairwise distinct Fourier coefficients and lags ``0..n-1``."""
    g = gamma.group
    n = g.order
    if b.max_lag < n - 1:
        raise DomainError(f"need lags 0..{n - 1}, got 0..{b.max_lag}")
    w = inverse_transfer_matrix(gamma)
    vals = []
    for x in range(n):
        v = n * sum((w[x][lag] * b[lag] for lag in range(n)), 0 * w[x][0])
        r = _as_integer(v, f"a_f({g.from_index(x)})")
        if r < 0:
            raise InconsistencyError(f"a_f({g.from_index(x)}) recovered as negative {r}")
        vals.append(r)
    return SpatialAutocorrelation(g, np.array(vals, dtype=np.int64))


# -- multispectra -------------------------------------------------------------


class Multispectrum:
    """Sparse table over lag tuples of length ``arity``.

    Entries are kept as increasing integer codes (base ``n`` digits, first lag
    most significant) with a parallel value array.  Missing codes are zero.
    """

    def __init__(self, group: GroupSpec, arity: int, codes, values, kind: str = "spatial"):
        self.group = group
        self.arity = arity
        self.codes = np.asarray(codes, dtype=np.int64)
        self.values = np.asarray(values, dtype=np.int64 if kind == "spatial" else object)
        self.kind = kind

    def encode(self, lags: Sequence) -> int:
        n = self.group.order
        if len(lags) != self.arity:
            raise DomainError(f"expected {self.arity} lags, got {len(lags)}")
        code = 0
        for lag in lags:
            code = code * n + self.group.element(lag).index
        return code

    def decode(self, code: int) -> tuple[int, ...]:
        n = self.group.order
        out = []
        for _ in range(self.arity):
            code, r = divmod(int(code), n)
            out.append(r)
        return tuple(reversed(out))

    def __getitem__(self, lags):
        code = self.encode(lags)
        i = int(np.searchsorted(self.codes, code))
        if i < len(self.codes) and self.codes[i] == code:
            v = self.values[i]
            return int(v) if self.kind == "spatial" else v
        return 0 if self.kind == "spatial" else Fraction(0)

    def __len__(self) -> int:
        return len(self.codes)

    def items(self):
        for c, v in zip(self.codes, self.values):
            yield self.decode(c), (int(v) if self.kind == "spatial" else v)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Multispectrum):
            return NotImplemented
        return (
            self.group == other.group
            and self.arity == other.arity
            and np.array_equal(self.codes, other.codes)
            and all(a == b for a, b in zip(self.values, other.values))
        )

    def dense(self) -> np.ndarray:
        n = self.group.order
        if n > DENSE_FOURIER_CAP:
            raise CapacityError(f"dense multispectrum limited to n <= {DENSE_FOURIER_CAP}")
        out = np.zeros(n**self.arity, dtype=np.int64 if self.kind == "spatial" else object)
        out[self.codes] = self.values
        return out.reshape((n,) * self.arity)

    def to_json(self) -> dict:
        entries = {}
        for lags, v in self.items():
            key = ",".join(str(self.group.from_index(i)) for i in lags)
            entries[key] = v if self.kind == "spatial" else str(v)
        return {"group": str(self.group), "kind": self.kind, "arity": self.arity, "entries": entries}


def spatial_multispectrum(f: Scenery, arity: int | None = None, cap: int = MULTISPECTRUM_CAP) -> Multispectrum:
    g = f.group
    if g.order > cap:
        raise CapacityError(f"spatial multispectrum limited to |H| <= {cap}, got {g.order}")
    m = g.order - 1 if arity is None else arity
    codes, counts = kernels.multispectrum_dfs(f.array, g.add_table, m)
    return Multispectrum(g, m, codes, counts, "spatial")


def _fhat_numeric(f: Scenery) -> np.ndarray:
    period, phase = _phase_table(f.group)
    chars = np.exp(-2j * np.pi * phase / period)
    return chars @ f.array.astype(np.float64)


def multispectrum_fourier(f: Scenery) -> np.ndarray:
    """Dense ``A_hat`` from ``f_hat``: ``conj(f_hat(x_1)) f_hat(x_m) prod f_hat(x_i - x_{i+1})``."""
    g = f.group
    n = g.order
    if n > DENSE_FOURIER_CAP:
        raise CapacityError(f"dense multispectrum transform limited to n <= {DENSE_FOURIER_CAP}")
    fh = _fhat_numeric(f)
    m = n - 1
    sub = g.add_table[:, g.neg_table]  # sub[i, j] = index of x_i - x_j
    idx = np.indices((n,) * m).reshape(m, -1)
    out = np.conj(fh[idx[0]]) * fh[idx[m - 1]]
    for i in range(m - 1):
        out = out * fh[sub[idx[i], idx[i + 1]]]
    return out.reshape((n,) * m)


def multispectrum_dft(dense: np.ndarray, group: GroupSpec) -> np.ndarray:
    """Brute-force transform of a dense table over ``H**m`` (numpy FFT along every coordinate axis)."""
    m = dense.ndim
    shape = []
    for _ in range(m):
        shape.extend(group.moduli)
    return np.fft.fftn(dense.astype(np.complex128).reshape(shape)).reshape(dense.shape)


def _transition_powers(gamma: StepDistribution, max_power: int) -> list[list[list]]:
    """Dense ``P^l[i][j] = gamma^(l)(j - i)`` for ``l <= max_power``."""
    g = gamma.group
    n = g.order
    sub = g.add_table[:, g.neg_table]
    zero = Fraction(0) if gamma.exact else mpmath.mpf(0)
    out = []
    for power in gamma.convolution_powers(max_power):
        out.append([[power.get(int(sub[j, i]), zero) for j in range(n)] for i in range(n)])
    return out


def temporal_multispectrum_exact(
    gamma: StepDistribution,
    f: Scenery,
    tuples: Iterable[Sequence],
    method: str = "forward",
    spatial: Multispectrum | None = None,
) -> Multispectrum:
    """``B_f`` on the requested lag tuples, as exact rationals.

    ``method="forward"`` runs the observation chain (start uniform, mask by
    ``f`` after each lag).  ``method="convolution"`` contracts the sparse
    spatial multispectrum against convolution powers of ``gamma``.
    """
    _check_same_group(gamma, f)
    if not gamma.exact:
        raise DomainError("exact temporal multispectrum needs a rational walk")
    g = f.group
    n = g.order
    tuples = [tuple(g.element(x).index for x in t) for t in tuples]
    if not tuples:
        raise DomainError("no lag tuples requested")
    arity = len(tuples[0])
    if any(len(t) != arity for t in tuples):
        raise DomainError("lag tuples must all have the same length")
    max_lag = max((max(t) for t in tuples if t), default=0)
    results: dict[tuple, Fraction] = {}
    if method == "forward":
        powers = _transition_powers(gamma, max_lag)
        bits = f.bits
        start = [Fraction(b, n) for b in bits]
        cache: dict[tuple, list] = {(): start}
        for t in tuples:
            # longest cached prefix
            k = len(t)
            while t[:k] not in cache:
                k -= 1
            vec = cache[t[:k]]
            for depth in range(k, len(t)):
                mat = powers[t[depth]]
                vec = [
                    sum((vec[i] * mat[i][j] for i in range(n) if vec[i]), Fraction(0)) if bits[j] else Fraction(0)
                    for j in range(n)
                ]
                cache[t[: depth + 1]] = vec
            results[t] = sum(vec, Fraction(0))
    elif method == "convolution":
        if spatial is None:
            spatial = spatial_multispectrum(f, arity=arity, cap=max(MULTISPECTRUM_CAP, n))
        conv = gamma.convolution_powers(max_lag)
        for t in tuples:
            total = Fraction(0)
            for lags, count in spatial.items():
                term = Fraction(count)
                for lag_power, x in zip(t, lags):
                    p = conv[lag_power].get(x)
                    if not p:
                        term = 0
                        break
                    term *= p
                total += term
            results[t] = total / n
    else:
        raise DomainError(f"unknown method {method!r}")
    ms = Multispectrum(g, arity, [], [], "temporal")
    order = sorted(results, key=ms.encode)
    ms.codes = np.array([ms.encode(t) for t in order], dtype=np.int64)
    ms.values = np.array([results[t] for t in order], dtype=object)
    return ms


# -- recovery -----------------------------------------------------------------


def visiting_tuple(f: Scenery) -> tuple[int, ...]:
    """Lags of a walk through the ones of ``f`` in index order, padded with zero lags."""
    g = f.group
    ones = f.ones_indices()
    sub = g.add_table[:, g.neg_table]
    lags = [int(sub[b, a]) for a, b in zip(ones, ones[1:])]
    return tuple(lags + [0] * (g.order - 1 - len(lags)))


def orbit_representatives(group: GroupSpec, ones_count: int) -> list[Scenery]:
    """Canonical (lexicographically smallest) shift-orbit representatives with a given weight."""
    n = group.order
    reps = {}
    for ones in itertools.combinations(range(n), ones_count):
        bits = [0] * n
        for i in ones:
            bits[i] = 1
        c = canonical_rotation(Scenery(group, tuple(bits)))
        reps[c.bits] = c
    return [reps[k] for k in sorted(reps)]


def recover_scenery(gamma: StepDistribution | None, spectrum: Multispectrum) -> Scenery:
    """The unique shift class whose spatial multispectrum equals ``spectrum``."""
    g = spectrum.group
    if gamma is not None and gamma.group != g:
        raise DomainError("walk and multispectrum live on different groups")
    if g.order > MULTISPECTRUM_CAP:
        raise CapacityError(f"recovery limited to |H| <= {MULTISPECTRUM_CAP}")
    if spectrum.arity != g.order - 1:
        raise InvalidInputError(f"multispectrum arity {spectrum.arity} != |H| - 1")
    s = spectrum[(0,) * spectrum.arity]
    if isinstance(s, Fraction):
        if s.denominator != 1:
            raise InvalidInputError(f"entry at the zero tuple is {s}, not an integer")
        s = int(s)
    if not 0 <= s <= g.order:
        raise InvalidInputError(f"ones count {s} out of range")
    matches = []
    for cand in orbit_representatives(g, s):
        if s and spectrum[visiting_tuple(cand)] <= 0:
            continue
        if spatial_multispectrum(cand) == spectrum:
            matches.append(cand)
    if not matches:
        raise InvalidInputError("no scenery has this multispectrum")
    if len(matches) > 1:
        raise InconsistencyError(f"{len(matches)} shift classes share one multispectrum")
    return matches[0]


def _dense_to_spectrum(group: GroupSpec, dense: list, arity: int) -> Multispectrum:
    codes, vals = [], []
    for code, v in enumerate(dense):
        if v:
            codes.append(code)
            vals.append(_as_integer(v, "multispectrum entry"))
    return Multispectrum(group, arity, codes, vals, "spatial")


def full_pipeline(gamma: StepDistribution, f_hidden: Scenery, method: str = "forward") -> Scenery:
    """Recover ``f_hidden`` up to shift from its exact temporal multispectrum.

    ``B_f`` is evaluated on the grid ``{0..n-1}**(n-1)``; the tensor system
    ``B = (1/n) G**(x(n-1)) A`` is undone axis by axis with ``W = G**-1``.
    """
    _check_same_group(gamma, f_hidden)
    g = gamma.group
    n = g.order
    # singularity is reported before the size cap: it is the informative failure
    w = inverse_transfer_matrix(gamma)
    if n > PIPELINE_CAP:
        raise CapacityError(f"full pipeline limited to |H| <= {PIPELINE_CAP}")
    m = n - 1
    grid = list(itertools.product(range(n), repeat=m))
    b = temporal_multispectrum_exact(gamma, f_hidden, grid, method=method)
    dense = [Fraction(0)] * (n**m)
    for c, v in zip(b.codes, b.values):
        dense[int(c)] = v * n
    for axis in range(m):
        dense = apply_along_axis(dense, n, m, w, axis, zero=Fraction(0))
    return recover_scenery(gamma, _dense_to_spectrum(g, dense, m))


def multispectrum_json(ms: Multispectrum) -> str:
    return json.dumps(ms.to_json(), indent=2)
