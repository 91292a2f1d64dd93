from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from scenerylab.analysis import Verdict, analyze
from scenerylab.errors import DomainError, InconsistencyError
from scenerylab.groups import GroupSpec
from scenerylab.oracle import (
    DISTINCT,
    EQUIVALENT,
    NO_DISTINCTION,
    ObservationProcess,
    bounded_horizon_equal,
    enumerate_classes,
    equivalent,
    horizon_distributions,
    processes_equivalent,
    shift_orbit_representatives,
    string_probability,
    verify_verdict,
)
from scenerylab.scenery import Scenery, parity_example_Z12, shift
from scenerylab.walks import StepDistribution, delta_walk_z7

Z7 = GroupSpec.cycle(7)


def ind(g, ones):
    return Scenery.indicator(g, ones)


def test_worked_example_pair_equivalent():
    w = StepDistribution.uniform(Z7, [1, 2, 4])
    res = equivalent(w, ind(Z7, [0, 1]), ind(Z7, [0, 2]))
    assert res.status == EQUIVALENT and res.dimension <= 14
    # independent route: the laws of the first 9 observations coincide
    assert bounded_horizon_equal(ObservationProcess(w, ind(Z7, [0, 1])), ObservationProcess(w, ind(Z7, [0, 2])), 9)


def test_parity_pair_equivalent():
    pair = parity_example_Z12()
    w = StepDistribution.uniform(GroupSpec.cycle(12), [-2, -1, 1, 2])
    assert equivalent(w, pair.f1, pair.f2).status == EQUIVALENT
    # both observation streams are i.i.d. fair bits
    law = horizon_distributions(ObservationProcess(w, pair.f1), 6)
    assert set(law.values()) == {Fraction(1, 64)} and len(law) == 64


def test_certificate_for_distinguishable_pair():
    w = StepDistribution.uniform(Z7, [1, 2])
    p1, p2 = ObservationProcess(w, ind(Z7, [0, 1])), ObservationProcess(w, ind(Z7, [0, 2]))
    res = processes_equivalent(p1, p2)
    assert res.status == DISTINCT
    word = res.certificate
    assert set(word) <= {"0", "1"}
    # recomputed by brute-force path enumeration, independent of the forward algorithm
    assert brute_word_probability(w, p1.scenery, word) != brute_word_probability(w, p2.scenery, word)
    assert res.probabilities == (brute_word_probability(w, p1.scenery, word), brute_word_probability(w, p2.scenery, word))
    # shorter words carry identical laws, so the certificate is a shortest one
    assert bounded_horizon_equal(p1, p2, len(word) - 1) if len(word) > 1 else True


def brute_word_probability(walk, f, word):
    g = walk.group
    n = g.order
    total = Fraction(0)
    steps = list(walk.probs.items())

    def rec(pos, t, prob):
        nonlocal total
        if f(pos) != int(word[t]):
            return
        if t == len(word) - 1:
            total += prob
            return
        for k, p in steps:
            rec(pos + k, t + 1, prob * p)

    for start in g.elements():
        rec(start, 0, Fraction(1, n))
    return total


def test_string_probability_matches_brute_force():
    w = StepDistribution(Z7, {1: Fraction(1, 2), 3: Fraction(1, 3), 0: Fraction(1, 6)})
    f = ind(Z7, [0, 1, 5])
    for word in ("0", "1", "0110", "10101", "111000"):
        assert string_probability(ObservationProcess(w, f), word) == brute_word_probability(w, f, word)


@st.composite
def triples(draw):
    n = draw(st.sampled_from([5, 6, 7]))
    g = GroupSpec.cycle(n)
    support = draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=3, unique=True))
    w = StepDistribution.uniform(g, support)
    fs = [Scenery(g, tuple(draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)))) for _ in range(3)]
    return w, fs


@settings(max_examples=60, deadline=None)
@given(triples())
def test_equivalence_relation_laws(t):
    w, (f1, f2, f3) = t
    assert equivalent(w, f1, f1).equivalent
    e12, e21 = equivalent(w, f1, f2).equivalent, equivalent(w, f2, f1).equivalent
    assert e12 == e21
    if e12 and equivalent(w, f2, f3).equivalent:
        assert equivalent(w, f1, f3).equivalent


@settings(max_examples=40, deadline=None)
@given(triples(), st.integers(0, 6))
def test_shift_soundness(t, s):
    w, (f, _, _) = t
    res = equivalent(w, f, shift(f, s))
    assert res.status == EQUIVALENT
    assert res.dimension <= 2 * w.group.order


def test_processes_on_different_groups():
    w5 = StepDistribution.uniform(GroupSpec.cycle(5), [1])
    w7 = StepDistribution.uniform(Z7, [1])
    res = processes_equivalent(ObservationProcess(w5, Scenery.zeros(w5.group)), ObservationProcess(w7, Scenery.zeros(Z7)))
    assert res.status == EQUIVALENT
    res = processes_equivalent(
        ObservationProcess(w5, Scenery.all_ones(w5.group)), ObservationProcess(w7, Scenery.zeros(Z7))
    )
    assert res.status == DISTINCT and res.certificate == "0"


def test_float_mode_is_heuristic():
    w = StepDistribution.uniform(Z7, [1, 2, 4]).to_float(256)
    res = equivalent(w, ind(Z7, [0, 1]), ind(Z7, [0, 2]))
    assert res.status == NO_DISTINCTION and res.heuristic
    w2 = StepDistribution.uniform(Z7, [1, 2]).to_float(256)
    assert equivalent(w2, ind(Z7, [0, 1]), ind(Z7, [0, 2])).status == DISTINCT


def test_observation_process_group_check():
    with pytest.raises(DomainError):
        ObservationProcess(StepDistribution.uniform(Z7, [1]), Scenery.zeros(GroupSpec.cycle(5)))


# -- class enumeration ----------------------------------------------------------


def test_orbit_representatives_count():
    # necklaces of length 7 over two colours: (2^7 - 2) / 7 + 2 = 20
    assert len(shift_orbit_representatives(Z7)) == 20
    assert len(shift_orbit_representatives(GroupSpec.cycle(6))) == 14


def test_classes_examples():
    assert enumerate_classes(Z7, StepDistribution.uniform(Z7, [1, 2])).minimal
    rep = enumerate_classes(Z7, StepDistribution.uniform(Z7, [1, 2, 4]))
    assert not rep.minimal
    # weight-2 orbits are labelled by the gap between the ones; gaps 1, 2, 4 form one multiplier-2 orbit
    gaps = [sorted(min((b - a) % 7, (a - b) % 7) for a, b in (s.ones_indices() for s in c))
            for c in rep.non_minimal_classes() if c[0].ones_count == 2]
    assert gaps == [[1, 2, 3]]
    for n in (3, 4, 5):
        g = GroupSpec.cycle(n)
        assert enumerate_classes(g, StepDistribution.uniform(g, [-1, 1])).minimal
    assert not enumerate_classes(Z7, StepDistribution.uniform(Z7, [-1, 1])).minimal


def test_worked_example_pair_share_class():
    rep = enumerate_classes(Z7, StepDistribution.uniform(Z7, [1, 2, 4]))
    from scenerylab.scenery import canonical_rotation

    a, b = canonical_rotation(ind(Z7, [0, 1])), canonical_rotation(ind(Z7, [0, 2]))
    assert any(a in c and b in c for c in rep.classes)


def test_threads_give_same_classes():
    w = StepDistribution.uniform(Z7, [1, 2, 4])
    one = enumerate_classes(Z7, w)
    two = enumerate_classes(Z7, w, threads=2)
    assert [[s.bits for s in c] for c in one.classes] == [[s.bits for s in c] for c in two.classes]


def test_report_outputs():
    rep = enumerate_classes(Z7, StepDistribution.uniform(Z7, [1, 2, 4]))
    data = rep.to_json()
    assert data["orbit_count"] == 20 and data["minimal"] is False
    csv_text = rep.histogram_csv()
    assert csv_text.startswith("class_size,count\n")
    assert sum(int(r.split(",")[0]) * int(r.split(",")[1]) for r in csv_text.strip().splitlines()[1:]) == 20


def test_delta_walk_heuristic_minimal():
    rep = enumerate_classes(Z7, delta_walk_z7())
    assert rep.heuristic and rep.minimal and not rep.undecided


# -- verdict cross-check ---------------------------------------------------------


def test_verify_verdict():
    w = StepDistribution.uniform(Z7, [1, 2, 4])
    check = verify_verdict(None, Z7, w)
    assert check.verdict == Verdict.NOT_RECONSTRUCTIVE and check.consistent
    d = verify_verdict(None, Z7, delta_walk_z7())
    assert d.verdict == Verdict.UNKNOWN and "minimal" in d.resolution


def test_verify_verdict_detects_contradiction():
    w = StepDistribution.uniform(Z7, [1, 2, 4])
    fake = analyze(StepDistribution.uniform(Z7, [1, 2]))
    with pytest.raises(InconsistencyError):
        verify_verdict(fake, Z7, w)
