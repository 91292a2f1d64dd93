import pytest
from hypothesis import given, settings, strategies as st

from scenerylab.analysis import analyze, find_collisions, fourier_transform
from scenerylab.errors import DomainError, InconsistencyError
from scenerylab.groups import GroupSpec
from scenerylab.oracle import equivalent
from scenerylab.scenery import (
    IndistinguishablePair,
    Scenery,
    Witness,
    build_pair_cycle,
    build_pair_product,
    build_pair_stay_put,
    build_pair_torus,
    canonical_rotation,
    flip,
    is_shift_of,
    multiply_coords,
    parity_example_Z12,
    shift,
)
from scenerylab.walks import StepDistribution

Z7 = GroupSpec.cycle(7)


def ind(g, ones):
    return Scenery.indicator(g, ones)


def test_shift_examples():
    f = ind(Z7, [0, 1])
    assert shift(f, 0) == f
    assert shift(f, 1) == ind(Z7, [6, 0])
    assert shift(shift(f, 3), -3) == f


def test_is_shift_of_examples():
    f = ind(Z7, [0, 1])
    assert is_shift_of(f, f).is_zero()
    assert is_shift_of(ind(Z7, [0, 1]), ind(Z7, [0, 2])) is None
    z12 = GroupSpec.cycle(12)
    blocks = Scenery.from_function(z12, lambda k: 0 if k.flat[0] % 6 in (0, 1, 2) else 1)
    assert is_shift_of(shift(blocks, 2), blocks).flat == (2,)
    # the parity scenery has period 2, so a shift by 2 is the identity and the smallest shift is 0
    parity = Scenery.from_function(z12, lambda k: k.flat[0] % 2)
    assert is_shift_of(shift(parity, 2), parity).flat == (0,)


def test_flip_examples():
    sym = ind(Z7, [0, 1, 6])
    assert is_shift_of(flip(sym), sym) is not None
    g = ind(Z7, [0, 1, 3])
    assert flip(g) == ind(Z7, [0, 6, 4])
    assert is_shift_of(flip(g), g) is None
    assert flip(flip(g)) == g


def test_multiply_coords_examples():
    f = ind(Z7, [0, 1])
    assert multiply_coords(f, 1) == f
    assert multiply_coords(f, 2) == ind(Z7, [0, 2])


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 127), st.integers(1, 6), st.integers(0, 6))
def test_scenery_transform_properties(code, v, s):
    f = Scenery(Z7, tuple((code >> i) & 1 for i in range(7)))
    assert multiply_coords(f, v).ones_count == f.ones_count
    assert is_shift_of(shift(f, s), f) is not None
    c = canonical_rotation(f)
    assert is_shift_of(c, f) is not None and canonical_rotation(shift(f, s)) == c


def test_pair_cycle_examples():
    p = build_pair_cycle(7, 2)
    assert (p.f1, p.f2) == (ind(Z7, [0, 1]), ind(Z7, [0, 2]))
    p = build_pair_cycle(7, -1)
    assert (p.f1, p.f2) == (ind(Z7, [0, 1, 3]), ind(Z7, [0, 6, 4]))
    z11 = GroupSpec.cycle(11)
    p = build_pair_cycle(11, 3)
    assert (p.f1, p.f2) == (ind(z11, [0, 1]), ind(z11, [0, 3]))
    # exhaustive shift check, independent of is_shift_of
    assert all(shift(p.f2, s) != p.f1 for s in range(11))
    for bad in (0, 1, 8):
        with pytest.raises(DomainError):
            build_pair_cycle(7, bad)
    with pytest.raises(DomainError):
        build_pair_cycle(5, 2)


@pytest.mark.parametrize("p", [7, 11, 13, 17, 19, 23])
def test_pair_cycle_f2_is_multiplied_f1(p):
    for v in range(2, p):
        pair = build_pair_cycle(p, v)
        assert pair.f2 == multiply_coords(pair.f1, v)
        assert is_shift_of(pair.f1, pair.f2) is None


def _orbit_walk(p, v):
    """Uniform walk on the orbit of 1 under multiplication by v: invariant under k -> v k."""
    orbit, k = [], 1
    while k not in orbit:
        orbit.append(k)
        k = k * v % p
    return StepDistribution.uniform(GroupSpec.cycle(p), orbit)


@pytest.mark.parametrize("p,v", [(7, 2), (7, 6), (11, 3), (11, 10), (13, 3), (13, 5)])
def test_cycle_pairs_pass_oracle_under_witness_walk(p, v):
    walk = _orbit_walk(p, v)
    assert any(multiply_coords_ok(walk, x, y, v) for x, y in find_collisions(fourier_transform(walk)))
    pair = build_pair_cycle(p, v)
    assert equivalent(walk, pair.f1, pair.f2).equivalent


def multiply_coords_ok(walk, x, y, v):
    return (x.flat[0] * v - y.flat[0]) % walk.group.order == 0


TORUS_CASES = [
    # (x, y, walk exhibiting gamma_hat(x) = gamma_hat(y))
    ((1, 0), (2, 0), [(1, 0), (2, 3), (4, 5)]),
    ((1, 0), (0, 1), [(1, 2), (2, 1)]),
    ((1, 0), (-1, 0), [(1, 0), (6, 0), (0, 1)]),
]


@pytest.mark.parametrize("x,y,support", TORUS_CASES)
def test_torus_pairs(x, y, support):
    g = GroupSpec.cycle(7, 2)
    walk = StepDistribution.uniform(g, support)
    cols = {(a.flat, b.flat) for a, b in find_collisions(fourier_transform(walk))}
    xe, ye = g.element(x), g.element(y)
    assert tuple(sorted((xe.flat, ye.flat))) in {tuple(sorted(c)) for c in cols}
    pair = build_pair_torus(7, 2, x, y)
    assert is_shift_of(pair.f1, pair.f2) is None
    assert equivalent(walk, pair.f1, pair.f2).equivalent


def test_torus_case_details():
    g = GroupSpec.cycle(7, 2)
    multiple = build_pair_torus(7, 2, (1, 0), (2, 0))
    assert multiple.witness.case == "torus-multiple" and multiple.witness.scale == 4
    assert multiple.witness.multiplier == 2
    ortho = build_pair_torus(7, 2, (1, 0), (0, 1))
    assert ortho.witness.case == "torus-independent"
    assert ortho.f1 == Scenery.from_function(g, lambda k: int(k.flat[0] == 0))
    assert ortho.f2 == Scenery.from_function(g, lambda k: int(k.flat[1] == 0))
    assert ortho.f1.ones_count == ortho.f2.ones_count == 7
    refl = build_pair_torus(7, 2, (1, 0), (-1, 0))
    assert refl.f1 == Scenery.from_function(g, lambda k: int(k.flat[0] in (0, 1, 3)))
    with pytest.raises(DomainError):
        build_pair_torus(7, 2, (1, 0), (1, 0))


def test_product_pairs():
    g = GroupSpec.parse("Z7xZ11")
    p1 = build_pair_product(g, ((1,), (0,)), ((2,), (0,)))
    assert p1.witness.factor_index == 0
    for k in g.elements():
        # varies only on the Z7 coordinate
        assert p1.f1(k) == p1.f1(g.element((k.flat[0], 0)))
    walk1 = StepDistribution.uniform(g, [(1, 0), (2, 3), (4, 5)])
    assert equivalent(walk1, p1.f1, p1.f2).equivalent

    p2 = build_pair_product(g, ((1,), (3,)), ((1,), (5,)))
    assert p2.witness.factor_index == 1
    for k in g.elements():
        assert p2.f1(k) == p2.f1(g.element((0, k.flat[1])))
    orbit = [1, 9, 4, 3, 5]  # orbit of 1 under multiplication by 5 * 3^-1 = 9 mod 11
    walk2 = StepDistribution.uniform(g, [(0, k) for k in orbit])
    assert equivalent(walk2, p2.f1, p2.f2).equivalent
    with pytest.raises(DomainError):
        build_pair_product(g, ((1,), (3,)), ((1,), (3,)))


def test_stay_put_pair():
    pair = build_pair_stay_put(Z7)
    walk = StepDistribution.point_mass(Z7)
    assert equivalent(walk, pair.f1, pair.f2).equivalent


def test_parity_example():
    pair = parity_example_Z12()
    assert is_shift_of(pair.f1, pair.f2) is None
    assert pair.f1.ones_indices() == [1, 3, 5, 7, 9, 11]
    assert pair.f2.ones_indices() == [3, 4, 5, 9, 10, 11]


def test_pair_rejects_shift_related_members():
    f = ind(Z7, [0, 1])
    with pytest.raises(InconsistencyError):
        IndistinguishablePair(f, shift(f, 2), Witness("test", "none"))


def test_analyzer_collisions_give_oracle_equivalent_pairs():
    walk = StepDistribution.uniform(Z7, [1, 2, 4])
    for c in analyze(walk).collisions:
        pair = build_pair_cycle(7, c.multiplier, c.x, c.y)
        assert equivalent(walk, pair.f1, pair.f2).equivalent
