"""Independent brute-force references used across the test suite."""

from __future__ import annotations

import itertools
import math

import numpy as np


def brute_force_sl2(p: int) -> set[tuple[int, int, int, int]]:
    """All 2x2 matrices over Z_p with determinant 1, by exhaustive enumeration."""
    return {
        (a, b, c, d)
        for a, b, c, d in itertools.product(range(p), repeat=4)
        if (a * d - b * c) % p == 1
    }


def dense_span(rows: np.ndarray) -> set[bytes]:
    """Every GF(2) combination of the rows, for small row counts."""
    rows = np.asarray(rows, dtype=np.uint8) % 2
    out = set()
    for mask in range(2 ** rows.shape[0]):
        pick = [(mask >> i) & 1 for i in range(rows.shape[0])]
        v = np.zeros(rows.shape[1], dtype=np.uint8)
        for i, bit in enumerate(pick):
            if bit:
                v ^= rows[i]
        out.add(v.tobytes())
    return out


def dense_rank_gf2(mat) -> int:
    """Rank over GF(2) by row reduction on a dense numpy array."""
    a = np.array(mat, dtype=np.uint8) % 2
    rank = 0
    rows, cols = a.shape
    for c in range(cols):
        hits = np.flatnonzero(a[rank:, c]) + rank
        if hits.size == 0:
            continue
        a[[rank, hits[0]]] = a[[hits[0], rank]]
        for r in range(rows):
            if r != rank and a[r, c]:
                a[r] ^= a[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def tanner_nx(h) -> "nx.Graph":
    import networkx as nx

    h = np.asarray(h)
    g = nx.Graph()
    m, n = h.shape
    g.add_nodes_from(("c", i) for i in range(m))
    g.add_nodes_from(("v", j) for j in range(n))
    g.add_edges_from((("c", i), ("v", j)) for i, j in zip(*np.nonzero(h)))
    return g


def girth_nx(h) -> float:
    import networkx as nx

    return nx.girth(tanner_nx(h))


def bp_check_bruteforce(nu, syndrome_bit: int) -> float:
    """Extrinsic LLR of one extra bit on a parity check, by summing all configurations.

    The check sees ``len(nu)`` other bits with LLRs ``nu`` and one target bit;
    the returned value is ``log P(target = 0) / P(target = 1)`` given parity
    ``syndrome_bit`` over all bits.
    """
    nu = np.asarray(nu, dtype=float)
    p0 = 1.0 / (1.0 + np.exp(-nu))
    weight = {0: 0.0, 1: 0.0}
    for bits in itertools.product((0, 1), repeat=nu.size):
        pr = float(np.prod([p0[k] if b == 0 else 1.0 - p0[k] for k, b in enumerate(bits)]))
        target = (sum(bits) + syndrome_bit) % 2
        weight[target] += pr
    return float(np.log(weight[0] / weight[1]))


def check_entropy_bruteforce_ref(nu, syndrome_bit: int) -> float:
    """``log`` of the total probability of parity-``syndrome_bit`` assignments of one check."""
    nu = np.asarray(nu, dtype=float)
    total = 0.0
    for bits in itertools.product((0, 1), repeat=nu.size):
        if sum(bits) % 2 != syndrome_bit:
            continue
        pr = 1.0
        for x, b in zip(nu, bits):
            pr *= 1.0 / (1.0 + math.exp(x)) if b else 1.0 / (1.0 + math.exp(-x))
        total += pr
    return math.log(total)
