"""Seeded simulation of labeled walks, the proof couplings, and empirical statistics.

Randomness comes from numpy's PCG64.  ``SeedSequence(seed).spawn(2)`` gives
one stream for the walk itself (start, then increments) and one for coupling
draws, so results are bit-exact for a given seed on every platform.  Each
stream is consumed as whole arrays in a fixed order.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .errors import DomainError, InconsistencyError
from .groups import GroupElement, GroupSpec
from .scenery import Scenery
from .walks import StepDistribution

MIN_ESTIMATION_SLACK = 1000


def build_alias(probs) -> tuple[np.ndarray, np.ndarray]:
    """Vose alias table for a probability vector (normalized here)."""
    p = np.asarray(probs, dtype=np.float64)
    k = p.shape[0]
    if k == 0 or p.sum() <= 0:
        raise DomainError("alias table needs positive total mass")
    scaled = p * (k / p.sum())
    prob = np.ones(k)
    alias = np.arange(k, dtype=np.int64)
    small = [i for i in range(k) if scaled[i] < 1.0]
    large = [i for i in range(k) if scaled[i] >= 1.0]
    while small and large:
        s, l = small.pop(), large.pop()
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] = scaled[l] + scaled[s] - 1.0
        (small if scaled[l] < 1.0 else large).append(l)
    return prob, alias


def _streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    if not 0 <= seed < 2**64:
        raise DomainError("seed must be a 64-bit unsigned integer")
    walk_ss, couple_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.Generator(np.random.PCG64(walk_ss)), np.random.Generator(np.random.PCG64(couple_ss))


@dataclass
class WalkTrace:
    seed: int
    group: GroupSpec
    positions: np.ndarray  # flat indices, length = steps
    observations: np.ndarray  # uint8
    increments: np.ndarray  # flat indices, length = steps - 1

    def __len__(self) -> int:
        return len(self.observations)

    def position(self, t: int) -> GroupElement:
        return self.group.from_index(int(self.positions[t]))


@dataclass
class CoupledTraces:
    trace1: WalkTrace
    trace2: WalkTrace
    transform: str
    checked_steps: int = 0


def _support_arrays(gamma: StepDistribution):
    support = gamma.support
    coords = np.array([k.flat for k in support], dtype=np.int64).reshape(-1, gamma.group.rank)
    index = np.array([k.index for k in support], dtype=np.int64)
    probs = np.array([float(p) for p in gamma.probs.values()])
    return coords, index, probs


def _walk_from_increments(group: GroupSpec, start: int, inc_coords: np.ndarray) -> np.ndarray:
    start_coords = group.coord_table[start]
    coords = kernels.walk_positions(start_coords, inc_coords, group.moduli)
    return group.index_of_coords(coords)


def simulate(gamma: StepDistribution, f: Scenery, steps: int, seed: int) -> WalkTrace:
    """``steps`` observations ``f(v(1)), ..., f(v(steps))`` with ``v(1)`` uniform."""
    if steps < 1:
        raise DomainError("steps must be at least 1")
    if gamma.group != f.group:
        raise DomainError(f"walk on {gamma.group} but scenery on {f.group}")
    g = gamma.group
    rng, _ = _streams(seed)
    start = int(rng.integers(g.order))
    u1 = rng.random(steps - 1)
    u2 = rng.random(steps - 1)
    coords, index, probs = _support_arrays(gamma)
    prob, alias = build_alias(probs)
    picks = kernels.alias_sample(prob, alias, u1, u2)
    positions = _walk_from_increments(g, start, coords[picks])
    obs = f.array[positions]
    return WalkTrace(seed, g, positions, obs, index[picks])


def _assert_identical(t1: WalkTrace, t2: WalkTrace):
    diff = np.flatnonzero(t1.observations != t2.observations)
    if diff.size:
        raise InconsistencyError(f"coupled observations differ first at step {int(diff[0])}")


def simulate_coupled_cycle(
    gamma: StepDistribution, f1: Scenery, f2: Scenery, v: int, steps: int, seed: int
) -> CoupledTraces:
    """Run walk 1 and set ``v_2(t) = v * v_1(t)``; observations must coincide at every step."""
    g = gamma.group
    if not g.is_cycle:
        raise DomainError("coupled cycle simulation needs a cycle group")
    if f1.group != g or f2.group != g:
        raise DomainError("sceneries and walk must share the group")
    n = g.order
    if math.gcd(v, n) != 1:
        raise DomainError(f"multiplier {v} is not a unit modulo {n}")
    for k in g.elements():
        if f1(k) != f2(v * k):
            raise DomainError(f"f1({k}) != f2({v}*{k}); pair does not match the multiplier")
        if gamma(k) != gamma(v * k):
            raise DomainError(f"gamma({k}) != gamma({v}*{k}); walk is not invariant under the multiplier")
    t1 = simulate(gamma, f1, steps, seed)
    scale = g.scale_table(v)
    pos2 = scale[t1.positions]
    t2 = WalkTrace(seed, g, pos2, f2.array[pos2], scale[t1.increments])
    _assert_identical(t1, t2)
    return CoupledTraces(t1, t2, f"v2(t) = {v % n} * v1(t) mod {n}", steps)


def _fiber_codes(group: GroupSpec, w: GroupElement) -> np.ndarray:
    """Code of the per-factor dot products ``(w_i . k_i mod p_i)_i`` for every ``k``."""
    code = np.zeros(group.order, dtype=np.int64)
    for j, (p, _) in enumerate(group.factors):
        code = code * p + group.dot_table(w, j)
    return code


def _fiber_masses(gamma: StepDistribution, codes: np.ndarray) -> dict[int, object]:
    out: dict[int, object] = {}
    for k, p in gamma.probs.items():
        c = int(codes[k.index])
        out[c] = out.get(c, 0) + p
    return out


def simulate_coupled_product(
    gamma: StepDistribution, f1: Scenery, f2: Scenery, x, y, steps: int, seed: int
) -> CoupledTraces:
    """Couple two walks so that ``v_2(t)_i . y_i = v_1(t)_i . x_i`` for every factor ``i``.

    Each increment of walk 2 is drawn from ``gamma`` conditioned on its
    ``y``-fiber matching the ``x``-fiber of walk 1's increment, using one alias
    table per fiber.  The fiber masses of ``gamma`` (and of the uniform start)
    must agree exactly, otherwise walk 2 would not have law ``gamma``.
    """
    g = gamma.group
    x, y = g.element(x), g.element(y)
    if f1.group != g or f2.group != g:
        raise DomainError("sceneries and walk must share the group")
    if x == y:
        t1 = simulate(gamma, f1, steps, seed)
        t2 = WalkTrace(seed, g, t1.positions.copy(), f2.array[t1.positions], t1.increments.copy())
        _assert_identical(t1, t2)
        return CoupledTraces(t1, t2, "x = y: identical walks", steps)

    cx, cy = _fiber_codes(g, x), _fiber_codes(g, y)
    mx, my = _fiber_masses(gamma, cx), _fiber_masses(gamma, cy)
    for c in sorted(set(mx) | set(my)):
        a, b = mx.get(c, 0), my.get(c, 0)
        if gamma.exact and a != b or not gamma.exact and abs(a - b) > gamma.tolerance:
            raise DomainError(f"fiber mass mismatch at fiber code {c}: {a} vs {b}; collision hypothesis fails")
    ux = np.bincount(cx, minlength=int(max(cx.max(), cy.max())) + 1)
    uy = np.bincount(cy, minlength=ux.shape[0])
    if not np.array_equal(ux, uy):
        raise DomainError("uniform start has different fiber sizes under x and y; no coupling of the start")

    _, rng2 = _streams(seed)
    t1 = simulate(gamma, f1, steps, seed)
    # coupling stream: start draw, then per-step uniforms
    s_u = rng2.random()
    u1 = rng2.random(steps - 1)
    u2 = rng2.random(steps - 1)
    start_fiber = np.flatnonzero(cy == cx[t1.positions[0]])
    start2 = int(start_fiber[min(int(s_u * start_fiber.size), start_fiber.size - 1)])

    coords, index, probs = _support_arrays(gamma)
    sup_cy = cy[index]
    picks = np.empty(steps - 1, dtype=np.int64)
    want = cx[t1.increments]
    for c in np.unique(want):
        members = np.flatnonzero(sup_cy == c)
        prob, alias = build_alias(probs[members])
        sel = np.flatnonzero(want == c)
        picks[sel] = members[kernels.alias_sample(prob, alias, u1[sel], u2[sel])]
    pos2 = _walk_from_increments(g, start2, coords[picks])
    t2 = WalkTrace(seed, g, pos2, f2.array[pos2], index[picks])
    bad = np.flatnonzero(cy[t2.positions] != cx[t1.positions])
    if bad.size:
        raise InconsistencyError(f"coupling invariant broken at step {int(bad[0])}")
    _assert_identical(t1, t2)
    return CoupledTraces(t1, t2, f"v2(t)_i . {y} = v1(t)_i . {x} on every factor", steps)


@dataclass
class EmpiricalAutocorrelation:
    values: np.ndarray  # b_hat(0..L)
    stderr: np.ndarray  # batch-means standard errors
    window: int
    batches: int

    def within(self, exact, n_se: float = 4.0) -> np.ndarray:
        exact = np.array([float(v) for v in exact])
        return np.abs(self.values - exact) <= n_se * np.maximum(self.stderr, 1e-12)


def estimate_b(trace: WalkTrace, max_lag: int, batches: int = 50) -> EmpiricalAutocorrelation:
    """Window averages of ``f(v(t)) f(v(t + l))`` with batch-means standard errors."""
    if len(trace) < max_lag + MIN_ESTIMATION_SLACK:
        raise DomainError(f"trace of length {len(trace)} is too short for lag {max_lag}")
    sums = kernels.lag_batch_sums(trace.observations, max_lag, batches)
    size = (len(trace) - max_lag) // batches
    means = sums / size
    values = sums.sum(axis=1) / (size * batches)
    stderr = means.std(axis=1, ddof=1) / math.sqrt(batches)
    return EmpiricalAutocorrelation(values, stderr, size * batches, batches)


def increment_frequencies(trace: WalkTrace) -> np.ndarray:
    return np.bincount(trace.increments, minlength=trace.group.order) / max(1, len(trace.increments))


def write_trace(
    trace: WalkTrace,
    path: str | Path,
    walk: StepDistribution,
    scenery: Scenery,
    emit_positions: bool = False,
) -> dict:
    """Packed observation bits at ``path`` plus ``path.json`` sidecar (and ``path.positions.csv``)."""
    path = Path(path)
    path.write_bytes(np.packbits(trace.observations).tobytes())
    meta = {
        "seed": trace.seed,
        "steps": len(trace),
        "group": str(trace.group),
        "walk": walk.describe(),
        "scenery": scenery.to_json(),
        "bit_order": "big",
        "ones_observed": int(trace.observations.sum()),
    }
    Path(str(path) + ".json").write_text(json.dumps(meta, indent=2))
    if emit_positions:
        with open(str(path) + ".positions.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "position", "observation"])
            for t, (p, o) in enumerate(zip(trace.positions, trace.observations), start=1):
                w.writerow([t, str(trace.group.from_index(int(p))), int(o)])
    return meta


def read_trace_bits(path: str | Path) -> np.ndarray:
    meta = json.loads(Path(str(path) + ".json").read_text())
    raw = np.frombuffer(Path(path).read_bytes(), dtype=np.uint8)
    return np.unpackbits(raw)[: meta["steps"]]
