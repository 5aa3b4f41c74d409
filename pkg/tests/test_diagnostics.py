import csv
import io
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qmargulis.decoder import MessageState
from qmargulis.diagnostics import (
    BetheEntropy,
    StabilizerExperiment,
    bethe_entropy,
    check_entropy_bruteforce,
    find_converging_injection,
    half_weight_injections,
    run_stabilizer_experiment,
    weight_trajectory,
)


def sigmoid(x):
    return 1.0 / (1.0 + math.exp(-x))


def test_weight_trajectory_examples():
    s = np.array([1, 1, 1, 1, 0, 0], dtype=np.uint8)
    e = np.array([1, 1, 0, 0, 0, 0], dtype=np.uint8)
    assert weight_trajectory(e ^ s, e, s) == 0
    assert weight_trajectory(e, e, s) == 4
    assert weight_trajectory(np.zeros(6, np.uint8), e, s) == 2
    with pytest.raises(ValueError):
        weight_trajectory(np.zeros(5), e, s)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 20).flatmap(lambda n: st.tuples(*(arrays(np.uint8, n, elements=st.integers(0, 1)),) * 3)))
def test_weight_zero_iff_complementary_estimate(vectors):
    est, e, s = vectors
    assert (weight_trajectory(est, e, s) == 0) == np.array_equal(est, e ^ s)


@pytest.mark.parametrize("name", ["tiny_code", "sl23_code", "margulis240", "bb72"])
def test_uniform_messages_give_closed_form(name, request):
    code = request.getfixturevalue(name)
    h = code.hz
    ent = BetheEntropy(h)
    e = ent.layout.num_edges
    zero = MessageState(nu=np.zeros(e), mu=np.zeros(e))
    for s in (np.zeros(h.nrows, np.uint8), np.random.default_rng(0).integers(0, 2, h.nrows)):
        assert ent(zero, s) == pytest.approx((h.ncols - h.nrows) * math.log(2), abs=1e-9)


@pytest.mark.parametrize("dc", [1, 2, 3, 6, 8])
def test_check_term_matches_enumeration(dc):
    rng = np.random.default_rng(dc)
    h = np.ones((1, dc), dtype=np.uint8)
    ent = BetheEntropy(h)
    for _ in range(20):
        nu = rng.normal(0, 5, dc)
        mu = rng.normal(0, 5, dc)
        for s in (0, 1):
            _, e_chk, _ = ent.parts(MessageState(nu=nu, mu=mu), [s])
            assert e_chk[0] == pytest.approx(check_entropy_bruteforce(nu, s), abs=1e-12)


def test_bruteforce_check_term_by_hand():
    # two bits with P(0) = sigmoid(nu): parity 0 mass is p0 q0 + p1 q1
    p, q = sigmoid(1.0), sigmoid(-2.0)
    assert check_entropy_bruteforce([1.0, -2.0], 0) == pytest.approx(math.log(p * q + (1 - p) * (1 - q)), abs=1e-14)


def test_variable_and_edge_terms_match_enumeration():
    rng = np.random.default_rng(4)
    h = np.array([[1, 1, 0, 1], [0, 1, 1, 1], [1, 0, 1, 1]], dtype=np.uint8)
    ent = BetheEntropy(h)
    lay = ent.layout
    mu = rng.normal(0, 3, lay.num_edges)
    nu = rng.normal(0, 3, lay.num_edges)
    e_var, _, e_edge = ent.parts(MessageState(nu=nu, mu=mu), [0, 1, 0])
    for j in range(4):
        edges = [e for e in range(lay.num_edges) if lay.edge_var[e] == j]
        total = sum(
            math.prod(sigmoid(mu[e]) if u == 0 else sigmoid(-mu[e]) for e in edges) for u in (0, 1)
        )
        assert e_var[j] == pytest.approx(math.log(total), abs=1e-12)
    for e in range(lay.num_edges):
        want = math.log(sigmoid(mu[e]) * sigmoid(nu[e]) + sigmoid(-mu[e]) * sigmoid(-nu[e]))
        assert e_edge[e] == pytest.approx(want, abs=1e-12)


def test_single_edge_graph():
    lam = 1.3
    state = MessageState(nu=np.array([lam]), mu=np.array([lam]))
    p = sigmoid(lam)
    want = 0.0 + math.log(p) - math.log(p * p + (1 - p) * (1 - p))
    assert bethe_entropy(np.array([[1]]), state, [0]) == pytest.approx(want, abs=1e-14)


def test_entropy_rejects_bad_input():
    ent = BetheEntropy(np.ones((1, 3), dtype=np.uint8))
    with pytest.raises(ValueError):
        ent(MessageState(nu=np.zeros(2), mu=np.zeros(2)), [0])
    with pytest.raises(FloatingPointError):
        ent(MessageState(nu=np.array([0.0, np.nan, 0.0]), mu=np.zeros(3)), [0])


def test_experiment_preconditions(margulis240):
    row = margulis240.hx.row(0)
    supp = np.flatnonzero(row)
    with pytest.raises(ValueError):
        run_stabilizer_experiment(margulis240, StabilizerExperiment(row, row.copy()))
    outside = np.zeros(240, np.uint8)
    outside[[j for j in range(240) if j not in supp][:3]] = 1
    with pytest.raises(ValueError):
        run_stabilizer_experiment(margulis240, StabilizerExperiment(row, outside))
    fake = np.zeros(240, np.uint8)
    fake[:6] = 1
    err = np.zeros(240, np.uint8)
    err[:3] = 1
    if not margulis240.hx.in_row_space(fake):
        with pytest.raises(ValueError):
            run_stabilizer_experiment(margulis240, StabilizerExperiment(fake, err))


def test_trace_shapes_and_csv(margulis240):
    support, err = next(iter(half_weight_injections(margulis240)))
    trace = run_stabilizer_experiment(margulis240, StabilizerExperiment(support, err))
    assert len(trace.weights) == len(trace.entropy) == trace.iterations
    assert trace.weights[0] <= int(support.sum())
    rows = list(csv.reader(io.StringIO(trace.series_csv())))
    assert rows[0] == ["iteration", "W", "E"] and len(rows) == trace.iterations + 1
    phase = list(csv.reader(io.StringIO(trace.phase_portrait_csv())))
    assert phase[0] == ["E_prev", "E_curr"] and len(phase) == trace.iterations
    for (a, b), prev, curr in zip(phase[1:], trace.entropy, trace.entropy[1:]):
        assert float(a) == prev and float(b) == curr


def test_injections_are_half_weight_and_inside_support(margulis240):
    for support, err in itertools.islice(half_weight_injections(margulis240), 20):
        assert 2 * err.sum() == support.sum()
        assert not np.any(err & ~support & 1)


def test_some_injection_converges_to_the_complement(margulis240):
    found = find_converging_injection(margulis240, max_candidates=40)
    assert found is not None
    exp, trace = found
    assert trace.weights[-1] == 0 and trace.converged and trace.iterations <= 300
