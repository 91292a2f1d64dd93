import json
from fractions import Fraction

import numpy as np
import pytest

from scenerylab.errors import DomainError
from scenerylab.groups import GroupSpec
from scenerylab.scenery import Scenery, build_pair_cycle, build_pair_product
from scenerylab.sim import (
    build_alias,
    estimate_b,
    increment_frequencies,
    read_trace_bits,
    simulate,
    simulate_coupled_cycle,
    simulate_coupled_product,
    write_trace,
)
from scenerylab.spectral import temporal_autocorrelation_exact
from scenerylab.walks import StepDistribution

Z7 = GroupSpec.cycle(7)


def test_determinism_and_seed_sensitivity():
    w = StepDistribution.uniform(Z7, [1, 2, 4])
    f = Scenery.indicator(Z7, [0, 1])
    a, b = simulate(w, f, 5000, 42), simulate(w, f, 5000, 42)
    assert np.array_equal(a.positions, b.positions) and np.array_equal(a.observations, b.observations)
    c = simulate(w, f, 5000, 43)
    assert not np.array_equal(a.positions, c.positions)


def test_pinned_prefix():
    # frozen reference: PCG64 via SeedSequence(2024).spawn(2), start then alias draws
    w = StepDistribution.uniform(Z7, [1, 2, 4])
    t = simulate(w, Scenery.indicator(Z7, [0, 1]), 12, 2024)
    assert t.positions.tolist() == [4, 6, 0, 2, 3, 4, 6, 1, 2, 4, 5, 0]
    # same prefix rebuilt straight from the walk stream: start, then u1 picks one of 3 equal steps
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(2024).spawn(2)[0]))
    pos = [int(rng.integers(7))]
    for u in rng.random(11):
        pos.append((pos[-1] + (1, 2, 4)[int(u * 3)]) % 7)
    assert pos == t.positions.tolist()


def test_trace_is_a_walk():
    w = StepDistribution.uniform(Z7, [1, 2, 4])
    f = Scenery.indicator(Z7, [0, 1, 3])
    t = simulate(w, f, 2000, 1)
    diffs = (t.positions[1:] - t.positions[:-1]) % 7
    assert set(diffs.tolist()) <= {1, 2, 4}
    assert np.array_equal(diffs, t.increments)
    assert np.array_equal(t.observations, f.array[t.positions])


def test_stay_put_walk():
    w = StepDistribution.point_mass(Z7)
    t = simulate(w, Scenery.indicator(Z7, [0, 1, 3]), 3000, 5)
    assert len(set(t.positions.tolist())) == 1 and len(set(t.observations.tolist())) == 1
    est = estimate_b(t, 10)
    assert np.all(est.values == est.values[0])


def test_increment_frequencies_match_law():
    w = StepDistribution(Z7, {1: Fraction(1, 2), 3: Fraction(1, 3), 5: Fraction(1, 6)})
    t = simulate(w, Scenery.zeros(Z7), 200_000, 9)
    freq = increment_frequencies(t)
    tv = 0.5 * np.abs(freq - w.as_float_array()).sum()
    assert tv < 0.01


def test_alias_table_exact_probabilities():
    p = np.array([0.5, 0.25, 0.125, 0.125])
    prob, alias = build_alias(p)
    k = len(p)
    implied = np.zeros(k)
    for i in range(k):
        implied[i] += prob[i] / k
        implied[alias[i]] += (1 - prob[i]) / k
    assert np.allclose(implied, p)


def test_coupled_cycle():
    w = StepDistribution.uniform(Z7, [1, 2, 4])
    pair = build_pair_cycle(7, 2)
    c = simulate_coupled_cycle(w, pair.f1, pair.f2, 2, 100_000, 7)
    assert np.array_equal(c.trace1.observations, c.trace2.observations)
    assert np.array_equal(c.trace2.positions, (2 * c.trace1.positions) % 7)


def test_coupled_cycle_trivial_and_errors():
    w = StepDistribution.uniform(Z7, [1, 2, 4])
    f = Scenery.indicator(Z7, [0, 1])
    c = simulate_coupled_cycle(w, f, f, 1, 1000, 3)
    assert np.array_equal(c.trace1.positions, c.trace2.positions)
    with pytest.raises(DomainError):
        simulate_coupled_cycle(StepDistribution.uniform(Z7, [1, 2]), f, Scenery.indicator(Z7, [0, 2]), 2, 100, 0)
    with pytest.raises(DomainError):
        simulate_coupled_cycle(w, f, Scenery.indicator(Z7, [0, 3]), 2, 100, 0)


def test_coupled_product():
    g = GroupSpec.parse("Z7xZ11")
    w = StepDistribution.uniform(g, [(1, 0), (2, 3), (4, 5)])
    x, y = ((1,), (0,)), ((2,), (0,))
    pair = build_pair_product(g, x, y)
    c = simulate_coupled_product(w, pair.f1, pair.f2, x, y, 20_000, 11)
    assert np.array_equal(c.trace1.observations, c.trace2.observations)
    # walk 2 still has law gamma
    freq = increment_frequencies(c.trace2)
    assert 0.5 * np.abs(freq - w.as_float_array()).sum() < 0.03


def test_coupled_product_degenerate_and_fiber_failure():
    g = GroupSpec.parse("Z7xZ11")
    w = StepDistribution.uniform(g, [(1, 0), (2, 3)])
    f = Scenery.indicator(g, [(0, 0), (1, 1)])
    c = simulate_coupled_product(w, f, f, ((1,), (0,)), ((1,), (0,)), 500, 2)
    assert np.array_equal(c.trace1.positions, c.trace2.positions)
    pair = build_pair_product(g, ((1,), (0,)), ((2,), (0,)))
    with pytest.raises(DomainError):
        simulate_coupled_product(w, pair.f1, pair.f2, ((1,), (0,)), ((2,), (0,)), 500, 2)


def test_estimate_b_against_exact():
    w = StepDistribution.uniform(Z7, [1, 2])
    f = Scenery.indicator(Z7, [0, 1, 3])
    t = simulate(w, f, 400_000, 17)
    est = estimate_b(t, 8)
    assert est.values[0] == pytest.approx(t.observations[: est.window].mean())
    exact = temporal_autocorrelation_exact(w, f, 8).values
    assert est.within(exact, 5.0).all()
    with pytest.raises(DomainError):
        estimate_b(simulate(w, f, 500, 0), 8)


def test_write_and_read_trace(tmp_path):
    w = StepDistribution.uniform(Z7, [1, 2])
    f = Scenery.indicator(Z7, [0, 1, 3])
    t = simulate(w, f, 1001, 4)
    path = tmp_path / "trace.bin"
    meta = write_trace(t, path, w, f, emit_positions=True)
    assert meta["steps"] == 1001
    assert np.array_equal(read_trace_bits(path), t.observations)
    assert json.loads((tmp_path / "trace.bin.json").read_text())["seed"] == 4
    rows = (tmp_path / "trace.bin.positions.csv").read_text().splitlines()
    assert rows[0] == "t,position,observation" and len(rows) == 1002


def test_invalid_arguments():
    w = StepDistribution.uniform(Z7, [1])
    with pytest.raises(DomainError):
        simulate(w, Scenery.zeros(Z7), 0, 1)
    with pytest.raises(DomainError):
        simulate(w, Scenery.zeros(Z7), 10, -1)
    with pytest.raises(DomainError):
        simulate(w, Scenery.zeros(GroupSpec.cycle(5)), 10, 1)
