"""Finite groups used to build two-block codes.

Three kinds are supported: cyclic groups, direct products of cyclic groups
and the special linear groups SL(2, Z_p). Every element carries a canonical
index in ``[0, |G|)``; the identity always has index 0. Arithmetic is done on
indices, with vectorised helpers for building Cayley matrices.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from math import prod
from typing import Iterable, Sequence

import numpy as np

MAX_ORDER = 10**6

KINDS = ("cyclic", "product", "sl2")


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class GroupSpec:
    """Description of a supported group: a kind tag plus integer parameters."""

    kind: str
    params: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "params", tuple(int(x) for x in self.params))
        if self.kind not in KINDS:
            raise ValueError(f"unknown group kind {self.kind!r}")
        if self.kind == "cyclic":
            if len(self.params) != 1 or self.params[0] < 2:
                raise ValueError(f"cyclic group needs one modulus >= 2, got {self.params}")
        elif self.kind == "product":
            if not self.params or any(m < 2 for m in self.params):
                raise ValueError(f"product of cyclics needs moduli >= 2, got {self.params}")
        else:
            if len(self.params) != 1 or not _is_prime(self.params[0]):
                raise ValueError(f"SL(2,p) needs a prime p, got {self.params}")
        if self.order() > MAX_ORDER:
            raise ValueError(f"group order {self.order()} exceeds cap {MAX_ORDER}")

    @classmethod
    def cyclic(cls, n: int) -> "GroupSpec":
        return cls("cyclic", (n,))

    @classmethod
    def product(cls, *moduli: int) -> "GroupSpec":
        return cls("product", tuple(moduli))

    @classmethod
    def sl2(cls, p: int) -> "GroupSpec":
        return cls("sl2", (p,))

    def order(self) -> int:
        if self.kind == "sl2":
            p = self.params[0]
            return p * (p * p - 1)
        return prod(self.params)

    def to_text(self) -> str:
        return f"{self.kind}:{','.join(str(x) for x in self.params)}"

    @classmethod
    def from_text(cls, text: str) -> "GroupSpec":
        """Parse ``cyclic:N``, ``product:N1,N2,...`` or ``sl2:P``."""
        m = re.fullmatch(r"\s*([a-z0-9]+)\s*:\s*([0-9,\s]+)", text)
        if not m:
            raise ValueError(f"malformed group spec {text!r}")
        params = tuple(int(x) for x in m.group(2).split(",") if x.strip())
        return cls(m.group(1), params)

    def __str__(self) -> str:
        return self.to_text()

    def build(self) -> "FiniteGroup":
        return FiniteGroup(self)


@dataclass(frozen=True)
class GroupElement:
    """An element of a specific group, identified by canonical index."""

    group: "FiniteGroup"
    index: int

    @property
    def rep(self):
        return self.group.rep(self.index)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return self.group.mul(self, other)

    def inverse(self) -> "GroupElement":
        return self.group.inv(self)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self.group.spec == other.group.spec and self.index == other.index

    def __hash__(self) -> int:
        return hash((self.group.spec, self.index))

    def __repr__(self) -> str:
        return f"GroupElement({self.group.spec}, {self.index}, {self.rep})"


class FiniteGroup:
    """Concrete group built from a :class:`GroupSpec`.

    Representations are residue tuples for cyclic/product groups and 2x2
    matrices ``((a, b), (c, d))`` with entries in ``[0, p)`` for SL(2, Z_p).
    """

    def __init__(self, spec: GroupSpec) -> None:
        self.spec = spec
        self.order = spec.order()
        if spec.kind == "sl2":
            self._init_sl2(spec.params[0])
        else:
            self._moduli = np.array(spec.params, dtype=np.int64)
            # row-major mixed radix: last modulus varies fastest
            strides = np.ones(len(spec.params), dtype=np.int64)
            for i in range(len(spec.params) - 2, -1, -1):
                strides[i] = strides[i + 1] * spec.params[i + 1]
            self._strides = strides
            idx = np.arange(self.order, dtype=np.int64)
            self._digits = (idx[:, None] // strides[None, :]) % self._moduli[None, :]

    def _init_sl2(self, p: int) -> None:
        self.p = p
        a, b, c = np.meshgrid(np.arange(p), np.arange(p), np.arange(p), indexing="ij")
        a, b, c = a.ravel(), b.ravel(), c.ravel()
        rows = []
        # a != 0: d is forced to (1 + b c) / a
        nz = a != 0
        inv_a = np.array([0] + [pow(int(x), -1, p) for x in range(1, p)], dtype=np.int64)
        d = ((1 + b[nz] * c[nz]) * inv_a[a[nz]]) % p
        rows.append(np.stack([a[nz], b[nz], c[nz], d], axis=1))
        # a == 0: need -b c = 1, d free
        for bb in range(1, p):
            cc = (-pow(bb, -1, p)) % p
            dd = np.arange(p)
            rows.append(np.stack([np.zeros(p, dtype=np.int64), np.full(p, bb), np.full(p, cc), dd], axis=1))
        mats = np.concatenate(rows).astype(np.int64)
        keys = ((mats[:, 0] * p + mats[:, 1]) * p + mats[:, 2]) * p + mats[:, 3]
        order = np.argsort(keys, kind="stable")
        mats, keys = mats[order], keys[order]
        ident_key = (1 * p + 0) * p * p + 1
        pos = int(np.searchsorted(keys, ident_key))
        # identity first, then the remaining matrices lexicographically
        perm = np.concatenate([[pos], np.arange(pos), np.arange(pos + 1, len(keys))])
        self._mats = mats[perm]
        self._sorted_keys = keys
        self._key_to_index = np.empty(len(keys), dtype=np.int64)
        self._key_to_index[perm] = np.arange(len(keys))
        assert len(self._mats) == self.order

    # -- representation <-> index ------------------------------------------

    def rep(self, i: int):
        if not 0 <= i < self.order:
            raise IndexError(f"element index {i} outside [0, {self.order})")
        if self.spec.kind == "sl2":
            a, b, c, d = (int(x) for x in self._mats[i])
            return ((a, b), (c, d))
        return tuple(int(x) for x in self._digits[i])

    def index_of(self, rep) -> int:
        """Canonical index of a representation (residue tuple, integer or 2x2 matrix)."""
        if self.spec.kind == "sl2":
            m = np.asarray(rep, dtype=np.int64).reshape(4) % self.p
            a, b, c, d = (int(x) for x in m)
            if (a * d - b * c) % self.p != 1:
                raise ValueError(f"matrix {rep} does not have determinant 1 mod {self.p}")
            return int(self._sl2_indices(m[None, :])[0])
        digits = np.atleast_1d(np.asarray(rep, dtype=np.int64))
        if digits.shape != (len(self.spec.params),):
            raise ValueError(f"residue tuple {rep} does not match {self.spec}")
        return int(((digits % self._moduli) * self._strides).sum())

    def element(self, i: int) -> GroupElement:
        self.rep(i)
        return GroupElement(self, int(i))

    def from_rep(self, rep) -> GroupElement:
        return GroupElement(self, self.index_of(rep))

    def _sl2_indices(self, mats: np.ndarray) -> np.ndarray:
        p = self.p
        keys = ((mats[:, 0] * p + mats[:, 1]) * p + mats[:, 2]) * p + mats[:, 3]
        pos = np.searchsorted(self._sorted_keys, keys)
        return self._key_to_index[pos]

    # -- arithmetic on indices -----------------------------------------------

    @property
    def identity_index(self) -> int:
        return 0

    def identity(self) -> GroupElement:
        return GroupElement(self, 0)

    def mul_many(self, left, right) -> np.ndarray:
        """Vectorised product of index arrays (broadcasting)."""
        left = np.asarray(left, dtype=np.int64)
        right = np.asarray(right, dtype=np.int64)
        left, right = np.broadcast_arrays(left, right)
        shape = left.shape
        left, right = left.ravel(), right.ravel()
        if self.spec.kind == "sl2":
            x, y, p = self._mats[left], self._mats[right], self.p
            out = np.stack(
                [
                    x[:, 0] * y[:, 0] + x[:, 1] * y[:, 2],
                    x[:, 0] * y[:, 1] + x[:, 1] * y[:, 3],
                    x[:, 2] * y[:, 0] + x[:, 3] * y[:, 2],
                    x[:, 2] * y[:, 1] + x[:, 3] * y[:, 3],
                ],
                axis=1,
            ) % p
            return self._sl2_indices(out).reshape(shape)
        digits = (self._digits[left] + self._digits[right]) % self._moduli
        return (digits * self._strides).sum(axis=1).reshape(shape)

    def inv_many(self, g) -> np.ndarray:
        g = np.asarray(g, dtype=np.int64)
        shape = g.shape
        g = g.ravel()
        if self.spec.kind == "sl2":
            x, p = self._mats[g], self.p
            adj = np.stack([x[:, 3], -x[:, 1], -x[:, 2], x[:, 0]], axis=1) % p
            return self._sl2_indices(adj).reshape(shape)
        digits = (-self._digits[g]) % self._moduli
        return (digits * self._strides).sum(axis=1).reshape(shape)

    def mul_idx(self, a: int, b: int) -> int:
        return int(self.table[a, b]) if self._has_table else int(self.mul_many(a, b))

    def inv_idx(self, a: int) -> int:
        return int(self.inverses[a])

    @cached_property
    def inverses(self) -> np.ndarray:
        return self.inv_many(np.arange(self.order))

    @property
    def _has_table(self) -> bool:
        return self.order <= 4096

    @cached_property
    def table(self) -> np.ndarray:
        """Full multiplication table ``table[g, h] = index(g h)`` (small groups only)."""
        if not self._has_table:
            raise ValueError("multiplication table only built for |G| <= 4096")
        idx = np.arange(self.order)
        return self.mul_many(idx[:, None], idx[None, :])

    # -- element-level API -------------------------------------------------

    def _check(self, *elements: GroupElement) -> None:
        for e in elements:
            if not isinstance(e, GroupElement):
                raise TypeError(f"expected GroupElement, got {type(e).__name__}")
            if e.group.spec != self.spec:
                raise ValueError(f"element of {e.group.spec} used with {self.spec}")

    def mul(self, g: GroupElement, h: GroupElement) -> GroupElement:
        self._check(g, h)
        return GroupElement(self, self.mul_idx(g.index, h.index))

    def inv(self, g: GroupElement) -> GroupElement:
        self._check(g)
        return GroupElement(self, self.inv_idx(g.index))

    def enumerate(self) -> list[GroupElement]:
        return [GroupElement(self, i) for i in range(self.order)]

    def right_translates(self, h: int) -> np.ndarray:
        """``index(g h)`` for every g, in canonical order."""
        return self.mul_many(np.arange(self.order), h)

    def left_translates(self, h: int) -> np.ndarray:
        """``index(h g)`` for every g, in canonical order."""
        return self.mul_many(h, np.arange(self.order))

    @cached_property
    def is_abelian(self) -> bool:
        if self.spec.kind != "sl2":
            return True
        # generators of SL(2,p) suffice, but an exhaustive check is cheap enough
        t = self.table if self._has_table else None
        if t is not None:
            return bool(np.array_equal(t, t.T))
        idx = np.arange(self.order)
        for g in range(self.order):
            if not np.array_equal(self.mul_many(g, idx), self.mul_many(idx, g)):
                return False
        return True

    def normalizes(self, h: int | GroupElement, subset: Iterable[int | GroupElement]) -> bool:
        """True iff ``{h^-1 s h : s in subset} == subset`` as sets."""
        h_i = h.index if isinstance(h, GroupElement) else int(h)
        s_idx = {s.index if isinstance(s, GroupElement) else int(s) for s in subset}
        if not s_idx:
            raise ValueError("normalizes() needs a non-empty set")
        h_inv = self.inv_idx(h_i)
        conj = {self.mul_idx(self.mul_idx(h_inv, s), h_i) for s in s_idx}
        return conj == s_idx

    def __repr__(self) -> str:
        return f"FiniteGroup({self.spec}, order={self.order})"


def enumerate_group(spec: GroupSpec) -> list[GroupElement]:
    return FiniteGroup(spec).enumerate()


def is_abelian(spec: GroupSpec) -> bool:
    return FiniteGroup(spec).is_abelian


def indices(elements: Sequence[int | GroupElement]) -> list[int]:
    return [e.index if isinstance(e, GroupElement) else int(e) for e in elements]

