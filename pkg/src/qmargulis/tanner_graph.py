"""Tanner graphs: girth, local cycle structure, automorphisms and symmetric stabilizers."""

from __future__ import annotations

import itertools
from collections import Counter, deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from .code_builder import CssCode
from .finite_group import FiniteGroup
from .gf2 import BinMatrix, as_vector


@dataclass(frozen=True)
class NodeLabel:
    side: str  # "check" or "var"
    block: str | None  # "A" / "B" for variables of a two-block code
    element: int | None  # canonical group index, when known


class TannerGraph:
    """Bipartite graph of a parity-check matrix.

    Node ids used by the traversal helpers: checks are ``0..m-1`` and variable
    ``j`` is ``m + j``.
    """

    def __init__(self, h: BinMatrix | np.ndarray, labels: Sequence[NodeLabel] | None = None) -> None:
        dense = h.to_dense() if isinstance(h, BinMatrix) else np.asarray(h, dtype=np.uint8)
        self.m, self.n = dense.shape
        self.check_adj = [np.flatnonzero(dense[i]).tolist() for i in range(self.m)]
        self.var_adj = [np.flatnonzero(dense[:, j]).tolist() for j in range(self.n)]
        self.labels = list(labels) if labels is not None else (
            [NodeLabel("check", None, None)] * self.m + [NodeLabel("var", None, None)] * self.n
        )
        self._adj = [[self.m + j for j in row] for row in self.check_adj] + [list(c) for c in self.var_adj]

    @classmethod
    def from_code(cls, code: CssCode, side: str = "X") -> "TannerGraph":
        """Tanner graph of ``H_X`` (side "X") or ``H_Z`` (side "Z") with group labels."""
        h = code.hx if side == "X" else code.hz
        order = code.group.order()
        labels = [NodeLabel("check", None, g) for g in range(order)]
        labels += [NodeLabel("var", "A", g) for g in range(order)]
        labels += [NodeLabel("var", "B", g) for g in range(order)]
        return cls(h, labels)

    @property
    def num_nodes(self) -> int:
        return self.m + self.n

    def neighbors(self, node: int) -> list[int]:
        return self._adj[node]

    def edges(self) -> set[tuple[int, int]]:
        return {(i, j) for i, row in enumerate(self.check_adj) for j in row}

    def check_degrees(self) -> np.ndarray:
        return np.array([len(r) for r in self.check_adj])

    def var_degrees(self) -> np.ndarray:
        return np.array([len(c) for c in self.var_adj])

    def ball(self, root: int, depth: int) -> dict[int, int]:
        """Nodes within ``depth`` edges of ``root`` mapped to their distance."""
        dist = {root: 0}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            if dist[u] == depth:
                continue
            for w in self._adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return dist

    def to_networkx(self, nodes: Iterable[int] | None = None) -> nx.Graph:
        g = nx.Graph()
        keep = set(range(self.num_nodes)) if nodes is None else set(nodes)
        for u in keep:
            g.add_node(u, side="check" if u < self.m else "var")
        for i, row in enumerate(self.check_adj):
            if i in keep:
                g.add_edges_from((i, self.m + j) for j in row if self.m + j in keep)
        return g


# -- girth ---------------------------------------------------------------------


def _shortest_cycle_from(adj, root: int, bound: int) -> int:
    """Length of the shortest cycle seen by BFS from ``root`` if below ``bound``."""
    dist = {root: 0}
    parent = {root: -1}
    queue = deque([root])
    best = bound
    while queue:
        u = queue.popleft()
        du = dist[u]
        if 2 * du + 1 >= best:
            break
        for w in adj[u]:
            if w == parent[u]:
                continue
            dw = dist.get(w)
            if dw is None:
                dist[w] = du + 1
                parent[w] = u
                queue.append(w)
            else:
                best = min(best, du + dw + 1)
    return best


def girth(t: TannerGraph, limit: int | None = None) -> int | None:
    """Exact length of the shortest cycle, or ``None`` for a forest.

    With ``limit`` set, the search stops early once no cycle shorter than
    ``limit`` can exist and returns ``limit`` (or any shorter cycle found).
    """
    inf = t.num_nodes + 1 if limit is None else limit
    best = inf
    # every cycle contains a check node, so check roots suffice
    for root in range(t.m):
        best = min(best, _shortest_cycle_from(t._adj, root, best))
        if best <= 4:
            break
    if limit is None and best == inf:
        return None
    return best


def code_girth(code: CssCode) -> int | None:
    """Smallest girth over the X and Z Tanner graphs."""
    vals = [girth(TannerGraph.from_code(code, s)) for s in ("X", "Z")]
    vals = [v for v in vals if v is not None]
    return min(vals) if vals else None


# -- automorphisms -----------------------------------------------------------


@dataclass(frozen=True)
class NodePermutationPair:
    perm_checks: tuple[int, ...]
    perm_vars: tuple[int, ...]

    def __post_init__(self) -> None:
        for name, p in (("checks", self.perm_checks), ("vars", self.perm_vars)):
            if sorted(p) != list(range(len(p))):
                raise ValueError(f"perm_{name} is not a permutation")


def is_automorphism(t: TannerGraph, pi: NodePermutationPair) -> bool:
    if len(pi.perm_checks) != t.m or len(pi.perm_vars) != t.n:
        raise ValueError("permutation sizes do not match the graph")
    edges = t.edges()
    return all((pi.perm_checks[i], pi.perm_vars[j]) in edges for i, j in edges)


def natural_right_action(code: CssCode, h: int, group: FiniteGroup | None = None) -> NodePermutationPair:
    """Right multiplication by ``h`` on checks and on each variable block."""
    group = group or code.group.build()
    shift = group.right_translates(int(h))
    order = group.order
    perm_vars = np.concatenate([shift, shift + order])
    return NodePermutationPair(tuple(shift.tolist()), tuple(perm_vars.tolist()))


# -- local structure -----------------------------------------------------------


def neighborhood_cycle_census(t: TannerGraph, check_index: int, depth: int) -> Counter:
    """Simple cycles through a check inside its depth-limited ball, counted by length."""
    if depth > 4:
        raise ValueError("census depth is limited to 4")
    root = int(check_index)
    inside = t.ball(root, depth)
    adj = {u: [w for w in t._adj[u] if w in inside] for u in inside}
    census: Counter = Counter()
    on_path = {root}
    # each cycle is traversed in both directions; keep the one whose second node is smaller
    stack = [(root, iter(adj[root]), [root])]
    while stack:
        u, it, path = stack[-1]
        w = next(it, None)
        if w is None:
            stack.pop()
            on_path.discard(u)
            continue
        if w == root and len(path) >= 4:
            if path[1] < path[-1]:
                census[len(path)] += 1
            continue
        if w in on_path:
            continue
        on_path.add(w)
        stack.append((w, iter(adj[w]), path + [w]))
    return census


def census_signature(census: Counter) -> tuple[tuple[int, int], ...]:
    return tuple(sorted(census.items()))


def neighborhood_dot(t: TannerGraph, root: int, depth: int, name: str = "neighborhood") -> str:
    """DOT description of the depth-limited ball around a node."""
    inside = t.ball(root, depth)
    lines = [f"graph {name} {{"]
    for u in sorted(inside):
        lab = t.labels[u]
        if u < t.m:
            attrs = 'shape=box, style=filled, fillcolor="red"'
            text = f"c{u}"
        else:
            shade = "black" if lab.block != "B" else "gray"
            attrs = f'shape=circle, style=filled, fillcolor="{shade}", fontcolor="white"'
            text = f"v{u - t.m}"
        root_mark = ", penwidth=3" if u == root else ""
        lines.append(f'  n{u} [label="{text}", {attrs}{root_mark}];')
    for u in sorted(inside):
        if u >= t.m:
            continue
        for w in t._adj[u]:
            if w in inside:
                lines.append(f"  n{u} -- n{w};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- symmetric stabilizers -----------------------------------------------------


def _induced(t: TannerGraph, var_subset: Iterable[int]) -> tuple[nx.Graph, set[int]]:
    """Subgraph on a variable subset plus all its check neighbours; returns odd-degree checks."""
    g = nx.Graph()
    deg: Counter = Counter()
    for j in var_subset:
        g.add_node(("v", j), side="var")
        for i in t.var_adj[j]:
            g.add_node(("c", i), side="check")
            g.add_edge(("v", j), ("c", i))
            deg[i] += 1
    odd = {i for i, d in deg.items() if d % 2}
    return g, odd


def _same_side(a: dict, b: dict) -> bool:
    return a["side"] == b["side"]


def verify_symmetric_stabilizer(code: CssCode, support, partition: Sequence[Iterable[int]]) -> bool:
    """Check the symmetric-stabilizer conditions for ``support`` split as ``partition``.

    Conditions: the support is in the row space of H_X; it induces only
    even-degree checks in the H_Z Tanner graph; the parts induce pairwise
    isomorphic subgraphs; and every part has the same odd-degree check set.
    """
    support = as_vector(support, code.n)
    supp = set(np.flatnonzero(support).tolist())
    if not supp:
        raise ValueError("support must be non-empty")
    parts = [set(int(x) for x in p) for p in partition]
    if len(parts) < 2 or len(parts) % 2:
        raise ValueError("partition needs an even number of parts")
    if sum(len(p) for p in parts) != len(supp) or set().union(*parts) != supp:
        raise ValueError("partition must be disjoint and cover the support exactly")
    if not code.hx.in_row_space(support):
        return False
    tz = TannerGraph.from_code(code, "Z")
    _, odd_all = _induced(tz, supp)
    if odd_all:
        return False
    induced = [_induced(tz, p) for p in parts]
    first_graph, first_odd = induced[0]
    for g, odd in induced[1:]:
        if odd != first_odd:
            return False
        if not nx.is_isomorphic(first_graph, g, node_match=_same_side):
            return False
    return True


def _candidate_partitions(code: CssCode, supp: list[int], exhaustive_limit: int):
    half = code.n // 2
    a_part = [j for j in supp if j < half]
    b_part = [j for j in supp if j >= half]
    seen = set()
    if len(a_part) == len(b_part):
        key = frozenset(a_part)
        seen.add(key)
        yield a_part, b_part
    if len(supp) <= exhaustive_limit and len(supp) % 2 == 0:
        first, rest = supp[0], supp[1:]
        for combo in itertools.combinations(rest, len(supp) // 2 - 1):
            p1 = [first, *combo]
            p2 = [j for j in supp if j not in set(p1)]
            if frozenset(p1) in seen or frozenset(p2) in seen:
                continue
            yield p1, p2


def find_candidate_symmetric_stabilizers(
    code: CssCode,
    max_rows: int = 1,
    max_weight: int | None = None,
    exhaustive_limit: int = 8,
) -> list[tuple[np.ndarray, tuple[list[int], list[int]]]]:
    """Sums of up to ``max_rows`` rows of H_X that split into two symmetric halves.

    The block split (A-qubits vs B-qubits) is tried first; supports of weight
    at most ``exhaustive_limit`` also get every balanced split.
    """
    if max_rows > 3:
        raise ValueError("max_rows is limited to 3")
    max_weight = code.n if max_weight is None else max_weight
    tz = TannerGraph.from_code(code, "Z")
    found = []
    seen: set[int] = set()
    rows = code.hx.rows
    for t in range(1, max_rows + 1):
        for combo in itertools.combinations(range(len(rows)), t):
            vec = 0
            for i in combo:
                vec ^= rows[i]
            w = vec.bit_count()
            if vec == 0 or w > max_weight or w % 2 or vec in seen:
                continue
            seen.add(vec)
            supp = [j for j in range(code.n) if (vec >> j) & 1]
            for p1, p2 in _candidate_partitions(code, supp, exhaustive_limit):
                g1, odd1 = _induced(tz, p1)
                g2, odd2 = _induced(tz, p2)
                if odd1 == odd2 and nx.is_isomorphic(g1, g2, node_match=_same_side):
                    arr = np.zeros(code.n, dtype=np.uint8)
                    arr[supp] = 1
                    found.append((arr, (p1, p2)))
                    break
    return found
