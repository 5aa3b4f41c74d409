import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmargulis.finite_group import FiniteGroup, GroupSpec, enumerate_group, indices, is_abelian

from oracles import brute_force_sl2

SPECS = [
    GroupSpec.cyclic(3),
    GroupSpec.cyclic(12),
    GroupSpec.product(6, 6),
    GroupSpec.product(2, 3, 4),
    GroupSpec.sl2(2),
    GroupSpec.sl2(3),
    GroupSpec.sl2(5),
]


def _mat(rep):
    return np.array(rep, dtype=np.int64)


@pytest.mark.parametrize("p, order", [(2, 6), (3, 24), (5, 120), (7, 336)])
def test_sl2_matches_exhaustive_enumeration(p, order):
    group = GroupSpec.sl2(p).build()
    reps = {tuple(np.array(group.rep(i)).ravel().tolist()) for i in range(group.order)}
    oracle = brute_force_sl2(p)
    assert len(oracle) == order
    assert reps == oracle
    assert group.order == GroupSpec.sl2(p).order() == order


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_enumeration_identity_first_no_duplicates(spec):
    elems = enumerate_group(spec)
    assert len(elems) == spec.order()
    assert len(set(elems)) == len(elems)
    e = elems[0]
    for g in elems:
        assert g * e == g and e * g == g


def test_cyclic_enumeration():
    assert [e.rep for e in enumerate_group(GroupSpec.cyclic(3))] == [(0,), (1,), (2,)]


def test_cyclic_multiplication():
    group = GroupSpec.cyclic(5).build()
    assert (group.element(2) * group.element(4)).rep == (1,)


def test_sl2_hand_product():
    group = GroupSpec.sl2(3).build()
    x = group.from_rep([[1, 1], [0, 1]])
    y = group.from_rep([[1, 0], [1, 1]])
    assert (x * y).rep == ((2, 1), (1, 1))


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_products_agree_with_representation_arithmetic(spec):
    group = spec.build()
    rng = np.random.default_rng(7)
    for _ in range(100):
        a, b = (int(x) for x in rng.integers(group.order, size=2))
        x, y = _mat(group.rep(a)), _mat(group.rep(b))
        if spec.kind == "sl2":
            want = (x @ y) % spec.params[0]
        else:
            want = (x + y) % np.array(spec.params)
        assert np.array_equal(_mat(group.rep(group.mul_idx(a, b))), want)


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_inverse_and_index_round_trip(spec):
    group = spec.build()
    for i in range(group.order):
        g = group.element(i)
        assert group.from_rep(g.rep) == g
        assert (g * g.inverse()).index == 0
        assert (g.inverse() * g).index == 0


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(SPECS), st.data())
def test_associativity(spec, data):
    group = spec.build()
    a, b, c = (group.element(data.draw(st.integers(0, group.order - 1))) for _ in range(3))
    assert (a * b) * c == a * (b * c)


def test_sl2_determinant_enforced():
    group = GroupSpec.sl2(5).build()
    with pytest.raises(ValueError):
        group.from_rep([[1, 1], [1, 1]])
    # entries are reduced mod p
    assert group.from_rep([[6, 5], [0, 1]]) == group.identity()


def test_mixed_group_operands_rejected():
    g = GroupSpec.cyclic(4).build().element(1)
    h = GroupSpec.cyclic(5).build().element(1)
    with pytest.raises(ValueError):
        _ = g * h


@pytest.mark.parametrize("bad", [("cyclic", (1,)), ("product", (3, 1)), ("sl2", (4,)), ("sl2", (9,)), ("dihedral", (4,))])
def test_invalid_group_specs(bad):
    with pytest.raises(ValueError):
        GroupSpec(*bad)


def test_group_spec_text_round_trip():
    for spec in SPECS:
        assert GroupSpec.from_text(spec.to_text()) == spec
    with pytest.raises(ValueError):
        GroupSpec.from_text("sl2")


def test_abelian_flags():
    assert is_abelian(GroupSpec.product(6, 6))
    assert is_abelian(GroupSpec.cyclic(7))
    for p in (2, 3, 5):
        assert not is_abelian(GroupSpec.sl2(p))


def test_normalizes_matches_conjugation_oracle():
    group = GroupSpec.sl2(3).build()
    reps = [_mat(group.rep(i)) for i in range(group.order)]
    lookup = {tuple(m.ravel()): i for i, m in enumerate(reps)}
    subset = [1, 5, 9]
    for h in range(group.order):
        hinv = np.array([[reps[h][1, 1], -reps[h][0, 1]], [-reps[h][1, 0], reps[h][0, 0]]]) % 3
        conj = {lookup[tuple(((hinv @ reps[s] @ reps[h]) % 3).ravel())] for s in subset}
        assert group.normalizes(h, subset) == (conj == set(subset))
    # the centre normalizes every subset
    minus_one = group.index_of([[2, 0], [0, 2]])
    assert group.normalizes(minus_one, subset)


def test_translates():
    group = GroupSpec.sl2(3).build()
    h = 7
    right = group.right_translates(h)
    left = group.left_translates(h)
    assert sorted(right.tolist()) == list(range(group.order))
    for g in range(group.order):
        assert right[g] == group.mul_idx(g, h)
        assert left[g] == group.mul_idx(h, g)


def test_indices_helper():
    group = GroupSpec.cyclic(6).build()
    assert indices([group.element(2), 3]) == [2, 3]


def test_product_group_indexing_is_mixed_radix():
    group = FiniteGroup(GroupSpec.product(2, 3))
    assert [group.rep(i) for i in range(6)] == list(itertools.product(range(2), range(3)))
