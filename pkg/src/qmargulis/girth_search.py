"""Randomised generator search with cycle-controlled tree expansion.

The tree is grown breadth-first from a check node. Checks expand to A-block
variables ``l a`` and B-block variables ``b l``; variables expand back to
checks through the inverse generators (``v a^-1`` for A-block variables,
``b^-1 v`` for B-block ones), never re-using the generator they arrived by.
A node label reached twice closes a cycle through the root; the generators on
both colliding paths are the candidates for replacement.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .code_builder import CssCode, GeneratorSets, build_2bga
from .finite_group import FiniteGroup, GroupSpec
from .tanner_graph import code_girth

log = logging.getLogger(__name__)

MAX_GIRTH = 8


class SearchExhausted(RuntimeError):
    """No generator set met the girth target within the configured budget."""

    def __init__(self, message: str, stats: dict) -> None:
        super().__init__(message)
        self.stats = stats


@dataclass(frozen=True)
class SearchConfig:
    target_girth: int = 6
    r: int = 3
    max_restarts: int = 50
    max_replacements_per_restart: int = 10_000
    rng_seed: int = 0
    workers: int = 1

    def __post_init__(self) -> None:
        g = self.target_girth
        if g % 2 or g < 4 or g > MAX_GIRTH:
            raise ValueError(f"target girth must be even and in [4, {MAX_GIRTH}], got {g}")
        if self.r < 2:
            raise ValueError(f"r must be >= 2, got {self.r}")
        if self.max_restarts < 1 or self.max_replacements_per_restart < 1:
            raise ValueError("search budgets must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class TreeResult:
    collided: bool
    cycle_generators: set[tuple[str, int]]
    depth: int
    collision_depth: int | None = None


# -- tree expansion ---------------------------------------------------------


def generate_tree(
    group: FiniteGroup,
    A,
    B,
    target_girth: int,
    root: int = 0,
) -> TreeResult:
    """Expand from check ``root`` and report the first label collision.

    Layers are checked up to depth ``target_girth/2 - 1`` edges; a collision at
    depth ``d`` means a cycle of length at most ``2 d``. ``cycle_generators``
    holds ``("A", position)`` / ``("B", position)`` references into A and B.
    """
    A = [int(a) for a in A]
    B = [int(b) for b in B]
    a_inv = group.inv_many(A).tolist()
    b_inv = group.inv_many(B).tolist()
    mul = group.mul_idx
    max_depth = target_girth // 2 - 1
    # entry: (kind, element, arrival generator ref or None, path generator refs)
    layer = [("C", int(root), None, frozenset())]
    visited = {("C", int(root)): frozenset()}
    depth = 0
    while depth < max_depth:
        nxt = []
        for kind, elem, arrival, path in layer:
            if kind == "C":
                for i, a in enumerate(A):
                    ref = ("A", i)
                    if ref != arrival:
                        nxt.append(("VA", mul(elem, a), ref, path | {ref}))
                for i, b in enumerate(B):
                    ref = ("B", i)
                    if ref != arrival:
                        nxt.append(("VB", mul(b, elem), ref, path | {ref}))
            elif kind == "VA":
                for i, ai in enumerate(a_inv):
                    ref = ("A", i)
                    if ref != arrival:
                        nxt.append(("C", mul(elem, ai), ref, path | {ref}))
            else:
                for i, bi in enumerate(b_inv):
                    ref = ("B", i)
                    if ref != arrival:
                        nxt.append(("C", mul(bi, elem), ref, path | {ref}))
        depth += 1
        seen: dict[tuple[str, int], frozenset] = {}
        for kind, elem, _, path in nxt:
            key = (kind, elem)
            other = seen.get(key)
            if other is None:
                other = visited.get(key)
            if other is not None:
                return TreeResult(True, set(path | other), depth, depth)
            seen[key] = path
        visited.update(seen)
        layer = nxt
    return TreeResult(False, set(), depth)


def _check_all_roots(group: FiniteGroup, A, B, a_inv, b_inv, target_girth: int, roots) -> TreeResult:
    for g in roots:
        # H_X graph, then H_Z graph (a two-block graph with A^-1 on the right, B^-1 on the left)
        for right_set, left_set in ((A, B), (a_inv, b_inv)):
            res = generate_tree(group, right_set, left_set, target_girth, root=g)
            if res.collided:
                return res
    return TreeResult(False, set(), target_girth // 2 - 1)


# -- search -------------------------------------------------------------------


def _replace(rng: np.random.Generator, group: FiniteGroup, A: list[int], B: list[int], cycle: set) -> None:
    refs = sorted(cycle)
    name, pos = refs[int(rng.integers(len(refs)))]
    used = set(A) | set(B)
    pool = np.array([g for g in range(group.order) if g not in used])
    new = int(pool[rng.integers(len(pool))])
    (A if name == "A" else B)[pos] = new


def _one_restart(spec: GroupSpec, cfg: SearchConfig, restart: int, progress: Callable | None = None):
    group = spec.build()
    rng = np.random.default_rng([cfg.rng_seed, restart])
    if 2 * cfg.r > group.order:
        raise ValueError(f"group of order {group.order} too small for 2r={2 * cfg.r} generators")
    draw = rng.choice(group.order, size=2 * cfg.r, replace=False)
    A, B = [int(x) for x in draw[: cfg.r]], [int(x) for x in draw[cfg.r :]]
    collisions: dict[int, int] = {}
    abelian = group.is_abelian
    for step in range(cfg.max_replacements_per_restart):
        a_inv = group.inv_many(A).tolist()
        b_inv = group.inv_many(B).tolist()
        res = _check_all_roots(group, A, B, a_inv, b_inv, cfg.target_girth, [0])
        if not res.collided and not abelian:
            res = _check_all_roots(group, A, B, a_inv, b_inv, cfg.target_girth, range(1, group.order))
        if not res.collided:
            return {"A": A, "B": B, "restart": restart, "replacements": step, "collisions": collisions}
        collisions[res.collision_depth] = collisions.get(res.collision_depth, 0) + 1
        if progress is not None and step % 100 == 0:
            progress({"event": "replace", "restart": restart, "step": step, "collision_depth": res.collision_depth})
        _replace(rng, group, A, B, res.cycle_generators)
    return {"A": None, "restart": restart, "replacements": cfg.max_replacements_per_restart, "collisions": collisions}


def get_generators(spec: GroupSpec, cfg: SearchConfig, progress: Callable | None = None) -> tuple[CssCode, dict]:
    """Search for generator sets whose code has girth at least ``cfg.target_girth``.

    Restarts use seeds derived from ``(rng_seed, restart)``; with several
    workers, restarts run in waves and the lowest successful restart index wins,
    so the result does not depend on the worker count.
    """
    stats = {"restarts": 0, "replacements": 0, "collision_depths": {}}
    restart = 0
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        while restart < cfg.max_restarts:
            wave = list(range(restart, min(cfg.max_restarts, restart + cfg.workers)))
            if pool is None:
                results = [_one_restart(spec, cfg, i, progress) for i in wave]
            else:
                results = list(pool.map(_one_restart, [spec] * len(wave), [cfg] * len(wave), wave))
            for res in results:
                stats["restarts"] += 1
                stats["replacements"] += res["replacements"]
                for d, c in res["collisions"].items():
                    stats["collision_depths"][d] = stats["collision_depths"].get(d, 0) + c
                if progress is not None:
                    progress({"event": "restart", "restart": res["restart"], "success": res["A"] is not None})
                if res["A"] is not None:
                    code = build_2bga(spec, GeneratorSets(res["A"], res["B"]))
                    g = code_girth(code)
                    if g is None or g < cfg.target_girth:
                        raise AssertionError(f"tree search accepted a code of girth {g}")
                    code.girth_certificate = g
                    code.metadata["search"] = {
                        "config": {k: v for k, v in asdict(cfg).items() if k != "workers"},
                        "restart": res["restart"],
                        "replacements": res["replacements"],
                    }
                    stats["winning_restart"] = res["restart"]
                    return code, stats
            restart = wave[-1] + 1
    finally:
        if pool is not None:
            pool.shutdown()
    raise SearchExhausted(
        f"no generator set with girth >= {cfg.target_girth} after {stats['restarts']} restarts", stats
    )


def progress_printer(stream) -> Callable[[dict], None]:
    """Line-delimited JSON progress records."""

    def emit(record: dict) -> None:
        stream.write(json.dumps(record, sort_keys=True) + "\n")
        stream.flush()

    return emit
