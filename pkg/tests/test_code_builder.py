import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmargulis.code_builder import (
    CodeFileError,
    GeneratorSets,
    _complete_to_sl2z,
    build_2bga,
    cayley_left,
    cayley_right,
    dumps,
    export_alist,
    load,
    loads,
    margulis_generators,
    save,
    warn_if_trivial,
)
from qmargulis.finite_group import GroupSpec
from qmargulis.gf2 import read_alist

from oracles import dense_rank_gf2

GROUPS = [GroupSpec.cyclic(12), GroupSpec.product(6, 6), GroupSpec.product(2, 3, 5), GroupSpec.sl2(3), GroupSpec.sl2(5)]


def test_tiny_fixture_matrices(tiny_code):
    assert np.array_equal(tiny_code.hx.to_dense(), [[1, 1, 1, 0], [1, 1, 0, 1]])
    assert np.array_equal(tiny_code.hz.to_dense(), [[1, 0, 1, 1], [0, 1, 1, 1]])
    assert tiny_code.k == 0
    with pytest.warns(UserWarning):
        warn_if_trivial(tiny_code)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(GROUPS), st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_random_draws_are_css(spec, r, seed):
    rng = np.random.default_rng(seed)
    order = spec.order()
    a = rng.choice(order, r, replace=False)
    b = rng.choice(order, r, replace=False)
    code = build_2bga(spec, GeneratorSets(a, b))
    hx, hz = code.hx.to_dense().astype(int), code.hz.to_dense().astype(int)
    assert not np.any((hx @ hz.T) % 2)
    assert code.n == 2 * order
    assert np.all(hx.sum(axis=1) == 2 * r) and np.all(hx.sum(axis=0) == r)
    assert code.k == code.n - dense_rank_gf2(hx) - dense_rank_gf2(hz)


def test_block_entries_follow_group_law():
    group = GroupSpec.sl2(3).build()
    a_gens, b_gens = [1, 5], [2, 7]
    right = cayley_right(group, a_gens).to_dense()
    left = cayley_left(group, b_gens).to_dense()
    for g in range(group.order):
        assert set(np.flatnonzero(right[g])) == {group.mul_idx(g, a) for a in a_gens}
        assert set(np.flatnonzero(left[g])) == {group.mul_idx(b, g) for b in b_gens}


def test_hz_is_block_swapped_code_of_inverse_generators():
    spec = GroupSpec.sl2(3)
    group = spec.build()
    gens = GeneratorSets([1, 5, 9], [2, 7, 13])
    code = build_2bga(spec, gens)
    inv = GeneratorSets(group.inv_many(gens.A).tolist(), group.inv_many(gens.B).tolist())
    # same checks, with the two variable blocks swapped
    hx_inv = build_2bga(spec, inv).hx.to_dense()
    half = group.order
    swapped = np.hstack([hx_inv[:, half:], hx_inv[:, :half]])
    assert np.array_equal(swapped, code.hz.to_dense())


def test_parameters_of_sl2_codes():
    assert 2 * GroupSpec.sl2(5).order() == 240
    assert 2 * GroupSpec.sl2(3).order() == 48
    assert 2 * GroupSpec.sl2(7).order() == 672


def test_generator_validation():
    with pytest.raises(ValueError):
        GeneratorSets([1, 1], [2, 3])
    group = GroupSpec.cyclic(6).build()
    with pytest.raises(ValueError):
        GeneratorSets([1, 2], [3]).validate(group)
    with pytest.raises(ValueError):
        GeneratorSets([1], [3]).validate(group)
    with pytest.raises(ValueError):
        GeneratorSets([1, 9], [2, 3]).validate(group)
    with pytest.raises(ValueError):
        cayley_right(group, [1, 1])


@pytest.mark.parametrize("m, q, eta", [(1, 0, 4), (0, 1, 4), (1, 1, 4), (1, 2, 6), (2, 1, 6), (3, 2, 8)])
def test_sl2z_completion(m, q, eta):
    a, b = _complete_to_sl2z(m, q, eta)
    assert m * b - a * q == 1
    assert 2 * abs(a) < eta and 2 * abs(b) < eta


def test_sl2z_completion_rejects_non_coprime():
    with pytest.raises(ValueError):
        _complete_to_sl2z(2, 2, 8)


def test_margulis_generators_are_conjugate_unipotents():
    p, eta = 11, 4
    pairs = [(1, 0), (0, 1), (1, 1), (1, 2), (2, 1)]
    gens = margulis_generators(p, eta, pairs)
    assert gens[0].rep == ((1, 4), (0, 1))
    for (m, q), g in zip(pairs, gens):
        x = np.array(g.rep, dtype=np.int64)
        # conjugates of [[1, eta], [0, 1]] have trace 2 and (x - I)^2 = 0
        assert (x[0, 0] + x[1, 1]) % p == 2
        nil = (x - np.eye(2, dtype=np.int64)) % p
        assert not np.any((nil @ nil) % p)
        # (x - I) maps the column (m, q) to 0
        assert not np.any((nil @ np.array([m, q])) % p)
    with pytest.raises(ValueError):
        margulis_generators(p, eta, [(3, 1)])


def test_serialisation_round_trip(tmp_path, sl23_code):
    text = dumps(sl23_code)
    assert dumps(loads(text)) == text
    back = loads(text)
    assert back.hx == sl23_code.hx and back.hz == sl23_code.hz
    assert back.gens == sl23_code.gens and back.k == sl23_code.k
    save(sl23_code, tmp_path / "c.json")
    assert (tmp_path / "c.json").read_text() == text
    assert load(tmp_path / "c.json").group == GroupSpec.sl2(3)


def test_serialisation_rejects_damage(sl23_code):
    text = dumps(sl23_code)
    doc = json.loads(text)
    with pytest.raises(CodeFileError):
        loads(text[: len(text) // 2])
    tampered = dict(doc, k=doc["k"] + 2)
    with pytest.raises(CodeFileError, match="checksum"):
        loads(json.dumps(tampered))
    with pytest.raises(CodeFileError, match="format"):
        loads(json.dumps(dict(doc, format="qmargulis-code/999")))
    missing = dict(doc)
    del missing["hz"]
    with pytest.raises(CodeFileError):
        loads(json.dumps(missing))
    with pytest.raises(CodeFileError):
        loads("[]")


def test_export_alist(tmp_path, sl23_code):
    px, pz = export_alist(sl23_code, tmp_path / "code")
    assert px.name == "code_hx.alist" and pz.name == "code_hz.alist"
    assert read_alist(px) == sl23_code.hx
    assert read_alist(pz) == sl23_code.hz


def test_summary_fields(sl23_code):
    s = sl23_code.summary()
    assert list(s) == ["n", "k", "d_v", "d_c", "girth", "group", "A", "B"]
    assert (s["n"], s["d_v"], s["d_c"]) == (48, 3, 6)


def test_nontrivial_warning_only_when_k_zero(margulis240):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        warn_if_trivial(margulis240)
