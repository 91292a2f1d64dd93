"""Decide whether two labeled walks produce identically distributed observations.

Each labeled walk is a hidden Markov chain: start uniform on ``H``, step by
``gamma``, emit ``f(position)``.  The probability of an observation word
``o_1 .. o_t`` is ``pi D_{o_1} T D_{o_2} ... T D_{o_t} 1``.  Two chains agree
on every word iff the functional "total mass of chain 1 minus total mass of
chain 2" vanishes on the span of all forward vectors ``[alpha_1(w),
alpha_2(w)]``.  That span is found by breadth-first closure and has
dimension at most ``|H_1| + |H_2|``.

Exact mode scales every matrix to integers (transition entries times the
common denominator, start vector times ``lcm(|H_1|, |H_2|) / |H_i|``), which
rescales each forward vector by a positive constant and so changes neither
the span nor the zero set of the functional.
"""
from __future__ import annotations

import itertools
import math
from collections import defaultdict, deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from .analysis import AnalysisVerdict, Verdict, analyze
from .errors import CapacityError, DomainError, InconsistencyError
from .groups import GroupSpec
from .scenery import Scenery, canonical_rotation
from .spectral import temporal_autocorrelation_exact
from .walks import DEFAULT_TOLERANCE, StepDistribution

CLASS_ENUMERATION_CAP = 12
MARGIN_FACTOR = 10

EQUIVALENT = "equivalent"
DISTINCT = "distinct"
NO_DISTINCTION = "no-distinction-found"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class ObservationProcess:
    walk: StepDistribution
    scenery: Scenery

    def __post_init__(self):
        if self.walk.group != self.scenery.group:
            raise DomainError(f"walk on {self.walk.group} but scenery on {self.scenery.group}")

    @property
    def group(self) -> GroupSpec:
        return self.walk.group

    @property
    def exact(self) -> bool:
        return self.walk.exact


@dataclass
class EquivalenceResult:
    """Outcome of :func:`processes_equivalent`.

    ``status`` is ``equivalent`` or ``distinct`` in exact mode.  Float mode
    never claims equivalence: it says ``no-distinction-found`` (heuristic),
    ``distinct`` or ``unknown`` (a residual fell inside the decision margin).
    """

    status: str
    certificate: str | None = None
    dimension: int = 0
    heuristic: bool = False
    probabilities: tuple | None = None

    @property
    def equivalent(self) -> bool:
        return self.status in (EQUIVALENT, NO_DISTINCTION)

    def __bool__(self) -> bool:
        return self.equivalent

    def to_json(self) -> dict:
        out = {"status": self.status, "dimension": self.dimension, "heuristic": self.heuristic}
        if self.certificate is not None:
            out["certificate"] = self.certificate
            out["probabilities"] = [str(p) for p in self.probabilities or ()]
        return out


# -- exact integer machinery ----------------------------------------------------


def _integer_chain(proc: ObservationProcess, scale_start: int, scale_step: int):
    """(start vector, transition rows as sparse lists) with integer entries."""
    g = proc.group
    add = g.add_table
    steps = [(k.index, int(p * scale_step)) for k, p in proc.walk.probs.items()]
    rows = [[(int(add[i, s]), w) for s, w in steps] for i in range(g.order)]
    return [scale_start] * g.order, rows


def _primitive(v: list[int]) -> list[int]:
    g = 0
    for x in v:
        if x:
            g = math.gcd(g, x)
            if g == 1:
                return v
    return v if g in (0, 1) else [x // g for x in v]


class _IntegerBasis:
    """Row-echelon basis over Q held as primitive integer vectors."""

    def __init__(self):
        self.rows: list[tuple[int, list[int]]] = []  # (pivot column, vector)

    def reduce(self, v: list[int]) -> list[int]:
        v = list(v)
        for piv, row in self.rows:
            c = v[piv]
            if c:
                a = row[piv]
                v = [a * x - c * y for x, y in zip(v, row)]
                v = _primitive(v)
        return v

    def add(self, v: list[int]) -> bool:
        r = self.reduce(v)
        piv = next((i for i, x in enumerate(r) if x), None)
        if piv is None:
            return False
        if r[piv] < 0:
            r = [-x for x in r]
        self.rows.append((piv, r))
        return True

    def __len__(self) -> int:
        return len(self.rows)


def _step_int(vec: list[int], rows, mask: Sequence[int], obs: int) -> list[int]:
    out = [0] * len(vec)
    for i, x in enumerate(vec):
        if x:
            for j, w in rows[i]:
                out[j] += x * w
    return [x if m == obs else 0 for x, m in zip(out, mask)]


def _exact_equivalence(p1: ObservationProcess, p2: ObservationProcess) -> EquivalenceResult:
    n1, n2 = p1.group.order, p2.group.order
    den = math.lcm(*(p.denominator for p in p1.walk.probs.values()), *(p.denominator for p in p2.walk.probs.values()))
    lc = math.lcm(n1, n2)
    s1, t1 = _integer_chain(p1, lc // n1, den)
    s2, t2 = _integer_chain(p2, lc // n2, den)
    m1, m2 = p1.scenery.bits, p2.scenery.bits

    def start(o):
        return [x if m == o else 0 for x, m in zip(s1, m1)] + [x if m == o else 0 for x, m in zip(s2, m2)]

    def extend(v, o):
        return _step_int(v[:n1], t1, m1, o) + _step_int(v[n1:], t2, m2, o)

    basis = _IntegerBasis()
    queue = deque()
    for o in (0, 1):
        queue.append((str(o), start(o)))
    while queue:
        word, v = queue.popleft()
        if sum(v[:n1]) != sum(v[n1:]):
            probs = (string_probability(p1, word), string_probability(p2, word))
            return EquivalenceResult(DISTINCT, word, len(basis), probabilities=probs)
        if basis.add(_primitive(v)):
            if len(basis) > n1 + n2:
                raise InconsistencyError("basis dimension exceeded |H1| + |H2|")
            for o in (0, 1):
                queue.append((word + str(o), extend(v, o)))
    return EquivalenceResult(EQUIVALENT, None, len(basis))


# -- float machinery ------------------------------------------------------------


def _float_equivalence(p1: ObservationProcess, p2: ObservationProcess, tolerance, precision_bits: int) -> EquivalenceResult:
    n1, n2 = p1.group.order, p2.group.order
    with mpmath.workprec(precision_bits):
        tol = mpmath.mpf(tolerance)
        wide = tol * MARGIN_FACTOR

        def chain(proc):
            g = proc.group
            add = g.add_table
            w = proc.walk.to_float(precision_bits)
            steps = [(k.index, p) for k, p in w.probs.items()]
            return [[(int(add[i, s]), p) for s, p in steps] for i in range(g.order)]

        t1, t2 = chain(p1), chain(p2)
        m1, m2 = p1.scenery.bits, p2.scenery.bits

        def step(vec, rows, mask, o):
            out = [mpmath.mpf(0)] * len(vec)
            for i, x in enumerate(vec):
                if x:
                    for j, w in rows[i]:
                        out[j] += x * w
            return [x if m == o else mpmath.mpf(0) for x, m in zip(out, mask)]

        def start(o):
            a = [mpmath.mpf(1) / n1 if m == o else mpmath.mpf(0) for m in m1]
            b = [mpmath.mpf(1) / n2 if m == o else mpmath.mpf(0) for m in m2]
            return a + b

        def norm(v):
            return mpmath.sqrt(mpmath.fsum(x * x for x in v))

        basis: list[list] = []  # orthonormal
        queue = deque((str(o), start(o)) for o in (0, 1))
        undecided = False
        while queue:
            word, v = queue.popleft()
            nv = norm(v)
            if nv == 0:
                continue
            phi = abs(mpmath.fsum(v[:n1]) - mpmath.fsum(v[n1:])) / nv
            if phi > wide:
                probs = (string_probability(p1, word), string_probability(p2, word))
                return EquivalenceResult(DISTINCT, word, len(basis), heuristic=True, probabilities=probs)
            if phi > tol:
                undecided = True
            r = list(v)
            for q in basis:
                c = mpmath.fsum(x * y for x, y in zip(r, q))
                r = [x - c * y for x, y in zip(r, q)]
            rel = norm(r) / nv
            if rel > wide:
                nr = norm(r)
                basis.append([x / nr for x in r])
                if len(basis) > n1 + n2:
                    raise InconsistencyError("basis dimension exceeded |H1| + |H2|")
                for o in (0, 1):
                    queue.append((word + str(o), step(v[:n1], t1, m1, o) + step(v[n1:], t2, m2, o)))
            elif rel > tol:
                undecided = True
    status = UNKNOWN if undecided else NO_DISTINCTION
    return EquivalenceResult(status, None, len(basis), heuristic=True)


def processes_equivalent(
    p1: ObservationProcess,
    p2: ObservationProcess,
    *,
    tolerance=None,
    precision_bits: int | None = None,
) -> EquivalenceResult:
    """Complete decision (exact walks) or 256-bit heuristic (float walks)."""
    if p1.exact and p2.exact:
        return _exact_equivalence(p1, p2)
    tol = tolerance if tolerance is not None else DEFAULT_TOLERANCE
    bits = precision_bits or max(p1.walk.precision_bits, p2.walk.precision_bits)
    return _float_equivalence(p1, p2, tol, bits)


def equivalent(walk: StepDistribution, f1: Scenery, f2: Scenery, **kw) -> EquivalenceResult:
    return processes_equivalent(ObservationProcess(walk, f1), ObservationProcess(walk, f2), **kw)


# -- independent checks ---------------------------------------------------------


def string_probability(proc: ObservationProcess, word: str):
    """Forward algorithm on dense probabilities: P(f(v(1)) .. f(v(t)) = word)."""
    g = proc.group
    n = g.order
    add = g.add_table
    bits = proc.scenery.bits
    if proc.exact:
        zero, alpha = Fraction(0), [Fraction(1, n)] * n
        probs = list(proc.walk.probs.items())
    else:
        with mpmath.workprec(proc.walk.precision_bits):
            zero, alpha = mpmath.mpf(0), [mpmath.mpf(1) / n] * n
        probs = list(proc.walk.probs.items())
    with mpmath.workprec(proc.walk.precision_bits):
        for t, ch in enumerate(word):
            o = int(ch)
            if t:
                nxt = [zero] * n
                for i in range(n):
                    if alpha[i]:
                        for k, p in probs:
                            nxt[int(add[i, k.index])] += alpha[i] * p
                alpha = nxt
            alpha = [a if bits[i] == o else zero for i, a in enumerate(alpha)]
        return sum(alpha, zero)


def horizon_distributions(proc: ObservationProcess, horizon: int) -> dict[str, object]:
    """Exact law of the first ``horizon`` observations (all words with nonzero mass)."""
    out = {}
    for word in map("".join, itertools.product("01", repeat=horizon)):
        p = string_probability(proc, word)
        if p:
            out[word] = p
    return out


def bounded_horizon_equal(p1: ObservationProcess, p2: ObservationProcess, horizon: int) -> bool:
    return horizon_distributions(p1, horizon) == horizon_distributions(p2, horizon)


# -- equivalence classes ---------------------------------------------------------


@dataclass
class EquivalenceClassReport:
    group: GroupSpec
    walk: StepDistribution
    classes: list[list[Scenery]]
    minimal: bool
    heuristic: bool = False
    undecided: list[tuple[Scenery, Scenery]] = field(default_factory=list)

    @property
    def orbit_count(self) -> int:
        return sum(len(c) for c in self.classes)

    def non_minimal_classes(self) -> list[list[Scenery]]:
        return [c for c in self.classes if len(c) > 1]

    def to_json(self) -> dict:
        return {
            "group": str(self.group),
            "walk": self.walk.describe(),
            "minimal": self.minimal,
            "heuristic": self.heuristic,
            "orbit_count": self.orbit_count,
            "classes": {str(i): [s.ones_indices() for s in c] for i, c in enumerate(self.classes)},
            "undecided": [[a.ones_indices(), b.ones_indices()] for a, b in self.undecided],
        }

    def histogram_csv(self) -> str:
        sizes = defaultdict(int)
        for c in self.classes:
            sizes[len(c)] += 1
        lines = ["class_size,count"] + [f"{k},{v}" for k, v in sorted(sizes.items())]
        return "\n".join(lines) + "\n"


def shift_orbit_representatives(group: GroupSpec) -> list[Scenery]:
    """One canonical scenery per shift orbit, in increasing bit order."""
    if group.order > CLASS_ENUMERATION_CAP:
        raise CapacityError(f"class enumeration limited to |H| <= {CLASS_ENUMERATION_CAP}, got {group.order}")
    seen = {}
    for bits in itertools.product((0, 1), repeat=group.order):
        if bits in seen:
            continue
        rep = canonical_rotation(Scenery(group, bits))
        seen[rep.bits] = rep
    return [seen[k] for k in sorted(seen)]


def _bucket_key(walk: StepDistribution, f: Scenery, lags: int):
    if walk.exact:
        return (f.ones_count, temporal_autocorrelation_exact(walk, f, lags).values)
    return (f.ones_count,)


def _classify_bucket(args):
    walk, members, tolerance, precision_bits = args
    classes: list[list[Scenery]] = []
    undecided = []
    for f in members:
        placed = False
        for cls in classes:
            res = equivalent(walk, cls[0], f, tolerance=tolerance, precision_bits=precision_bits)
            if res.status == UNKNOWN:
                undecided.append((cls[0], f))
            if res.equivalent:
                cls.append(f)
                placed = True
                break
        if not placed:
            classes.append([f])
    return classes, undecided


def enumerate_classes(
    group: GroupSpec,
    walk: StepDistribution,
    *,
    threads: int = 1,
    tolerance=None,
    precision_bits: int | None = None,
) -> EquivalenceClassReport:
    """Partition all sceneries on ``group`` by observational equivalence under ``walk``.

    Sceneries are first collapsed to shift orbits, then bucketed by invariants
    of the observation law (ones count, and in exact mode the autocorrelation
    ``b_f``).  Within a bucket each orbit is compared against one
    representative per class found so far.
    """
    if walk.group != group:
        raise DomainError(f"walk lives on {walk.group}, not {group}")
    reps = shift_orbit_representatives(group)
    buckets: dict[tuple, list[Scenery]] = defaultdict(list)
    for f in reps:
        buckets[_bucket_key(walk, f, group.order)].append(f)
    jobs = [(walk, members, tolerance, precision_bits) for members in buckets.values()]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_classify_bucket, jobs))
    else:
        results = [_classify_bucket(j) for j in jobs]
    classes, undecided = [], []
    for cls, und in results:
        classes.extend(cls)
        undecided.extend(und)
    classes.sort(key=lambda c: c[0].bits)
    minimal = all(len(c) == 1 for c in classes) and not undecided
    return EquivalenceClassReport(group, walk, classes, minimal, heuristic=not walk.exact, undecided=undecided)


@dataclass
class VerdictCheck:
    verdict: Verdict
    minimal: bool
    consistent: bool
    resolution: str | None
    report: EquivalenceClassReport

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "oracle_minimal": self.minimal,
            "consistent": self.consistent,
            "resolution": self.resolution,
            "heuristic": self.report.heuristic,
        }


def verify_verdict(verdict: AnalysisVerdict | None, group: GroupSpec, walk: StepDistribution, **kw) -> VerdictCheck:
    """Cross-check a verdict against brute-force classes; contradictions are fatal."""
    if verdict is None:
        verdict = analyze(walk)
    report = enumerate_classes(group, walk, **kw)
    v = verdict.verdict
    if v == Verdict.RECONSTRUCTIVE and not report.minimal:
        raise InconsistencyError(
            f"analysis says Reconstructive but the oracle found {len(report.non_minimal_classes())} merged class(es)"
        )
    if v == Verdict.NOT_RECONSTRUCTIVE and report.minimal:
        raise InconsistencyError("analysis says NotReconstructive but the oracle classes are all shift orbits")
    resolution = None
    if v == Verdict.UNKNOWN:
        if report.undecided:
            resolution = "oracle undecided (residuals inside the decision margin)"
        elif report.minimal:
            resolution = "oracle: minimal classes (reconstructive" + (", heuristic)" if report.heuristic else ")")
        else:
            resolution = "oracle: merged classes (not reconstructive" + (", heuristic)" if report.heuristic else ")")
    return VerdictCheck(v, report.minimal, True, resolution, report)
