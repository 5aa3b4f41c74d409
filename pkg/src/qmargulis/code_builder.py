"""Two-block group-algebra (2BGA) CSS codes.

Given a group G and generator lists A (multiplying on the right) and B
(multiplying on the left), the block matrices are

    A[g, g a] = 1,   B[g, b g] = 1,

and the code is ``H_X = [A | B]``, ``H_Z = [B^T | A^T]``. Right and left
multiplication commute, so ``A B = B A`` and ``H_X H_Z^T = 0`` for every group.
Columns ``0..|G|-1`` are the A-block qubits, ``|G|..2|G|-1`` the B-block qubits.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from math import gcd
from pathlib import Path
from typing import Sequence

import numpy as np

from .finite_group import FiniteGroup, GroupElement, GroupSpec, indices
from .gf2 import BinMatrix, write_alist

CODE_FORMAT = "qmargulis-code/1"


class CodeFileError(ValueError):
    """Malformed, truncated or tampered code file."""


class OrthogonalityError(AssertionError):
    """H_X H_Z^T != 0: an implementation bug, never a user error."""


@dataclass(frozen=True)
class GeneratorSets:
    """Canonical indices of the right-acting set A and left-acting set B."""

    A: tuple[int, ...]
    B: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "A", tuple(int(a) for a in self.A))
        object.__setattr__(self, "B", tuple(int(b) for b in self.B))
        for name, s in (("A", self.A), ("B", self.B)):
            if len(set(s)) != len(s):
                raise ValueError(f"generators in {name} must be distinct: {s}")

    @property
    def r(self) -> int:
        return len(self.A)

    def validate(self, group: FiniteGroup, strict: bool = True) -> None:
        if strict:
            if len(self.A) != len(self.B):
                raise ValueError(f"|A|={len(self.A)} and |B|={len(self.B)} differ")
            if self.r < 2:
                raise ValueError(f"need r >= 2, got {self.r}")
        elif not self.A or not self.B:
            raise ValueError("A and B must be non-empty")
        for g in self.A + self.B:
            if not 0 <= g < group.order:
                raise ValueError(f"generator index {g} outside group of order {group.order}")


def _gens(gens: Sequence[int | GroupElement]) -> list[int]:
    idx = indices(gens)
    if len(set(idx)) != len(idx):
        raise ValueError(f"duplicate generators: {idx}")
    return idx


def cayley_right(group: FiniteGroup, gens: Sequence[int | GroupElement]) -> BinMatrix:
    """Biadjacency matrix with ones at ``(g, g a)``."""
    idx = _gens(gens)
    g = np.arange(group.order)
    cols = np.concatenate([group.right_translates(a) for a in idx]) if idx else np.zeros(0, int)
    return BinMatrix.from_positions(group.order, group.order, np.tile(g, len(idx)), cols)


def cayley_left(group: FiniteGroup, gens: Sequence[int | GroupElement]) -> BinMatrix:
    """Biadjacency matrix with ones at ``(g, b g)``."""
    idx = _gens(gens)
    g = np.arange(group.order)
    cols = np.concatenate([group.left_translates(b) for b in idx]) if idx else np.zeros(0, int)
    return BinMatrix.from_positions(group.order, group.order, np.tile(g, len(idx)), cols)


@dataclass
class CssCode:
    hx: BinMatrix
    hz: BinMatrix
    group: GroupSpec
    gens: GeneratorSets
    k: int
    girth_certificate: int | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.hx.ncols

    @property
    def d_v(self) -> int:
        return self.gens.r

    @property
    def d_c(self) -> int:
        return 2 * self.gens.r

    def check_orthogonal(self) -> bool:
        return self.hx.multiply(self.hz.transpose()).is_zero()

    def summary(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "d_v": self.d_v,
            "d_c": self.d_c,
            "girth": self.girth_certificate,
            "group": self.group.to_text(),
            "A": list(self.gens.A),
            "B": list(self.gens.B),
        }


def build_2bga(group: FiniteGroup | GroupSpec, gens: GeneratorSets, *, strict: bool = True) -> CssCode:
    """Assemble ``H_X = [A | B]`` and ``H_Z = [B^T | A^T]`` and compute k.

    ``strict=False`` admits unbalanced or single-element sets, which is only
    useful for small audit fixtures.
    """
    if isinstance(group, GroupSpec):
        group = group.build()
    gens.validate(group, strict=strict)
    a = cayley_right(group, gens.A)
    b = cayley_left(group, gens.B)
    hx = a.hstack(b)
    hz = b.transpose().hstack(a.transpose())
    code = CssCode(hx=hx, hz=hz, group=group.spec, gens=gens, k=0)
    if not code.check_orthogonal():
        raise OrthogonalityError("H_X H_Z^T is nonzero; Cayley blocks do not commute")
    code.k = compute_dimension(code)
    return code


def compute_dimension(code: CssCode) -> int:
    return code.n - code.hx.rank() - code.hz.rank()


# -- Margulis generators ----------------------------------------------------


def _complete_to_sl2z(m: int, q: int, eta: int) -> tuple[int, int]:
    """Integers (a, b) with ``m b - a q = 1`` and ``|a|, |b| < eta/2``."""
    if gcd(m, q) != 1:
        raise ValueError(f"pair ({m}, {q}) is not coprime")
    # extended Euclid on m x + q y = 1, then b = x, a = -y
    old_r, r, old_x, x, old_y, y = m, q, 1, 0, 0, 1
    while r:
        t = old_r // r
        old_r, r = r, old_r - t * r
        old_x, x = x, old_x - t * x
        old_y, y = y, old_y - t * y
    if old_r < 0:
        old_x, old_y = -old_x, -old_y
    b0, a0 = old_x, -old_y
    # general solution: b = b0 + t q, a = a0 + t m
    best = None
    span = eta + abs(b0) + abs(a0) + 2
    for t in range(-span, span + 1):
        a, b = a0 + t * m, b0 + t * q
        if 2 * abs(a) < eta and 2 * abs(b) < eta:
            cand = (abs(a) + abs(b), abs(a), a, b)
            if best is None or cand < best:
                best = cand
    if best is None:
        raise ValueError(f"no completion of ({m}, {q}) with |a|,|b| < {eta}/2")
    return best[2], best[3]


def margulis_generators(p: int, eta: int, pairs: Sequence[tuple[int, int]]) -> list[GroupElement]:
    """Elements ``C_i [[1, eta], [0, 1]] C_i^-1`` of SL(2, Z_p), one per ``(m_i, q_i)``."""
    group = GroupSpec.sl2(p).build()
    out = []
    for m, q in pairs:
        if not (0 <= 2 * m <= eta and 0 <= 2 * q <= eta):
            raise ValueError(f"pair ({m}, {q}) outside 0 <= m, q <= eta/2")
        a, b = _complete_to_sl2z(m, q, eta)
        c = np.array([[m, a], [q, b]], dtype=object)
        c_inv = np.array([[b, -a], [-q, m]], dtype=object)
        t = np.array([[1, eta], [0, 1]], dtype=object)
        g = (c @ t @ c_inv) % p
        out.append(group.from_rep(g.astype(np.int64)))
    return out


# -- serialisation ----------------------------------------------------------


def _payload(code: CssCode) -> dict:
    return {
        "group": code.group.to_text(),
        "A": list(code.gens.A),
        "B": list(code.gens.B),
        "n": code.n,
        "k": code.k,
        "girth_certificate": code.girth_certificate,
        "hx": code.hx.to_json_dict(),
        "hz": code.hz.to_json_dict(),
        "metadata": code.metadata,
    }


def _digest(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def dumps(code: CssCode) -> str:
    payload = _payload(code)
    doc = {"format": CODE_FORMAT, "sha256": _digest(payload), **payload}
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def loads(text: str) -> CssCode:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CodeFileError(f"code file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise CodeFileError("code file must hold a JSON object")
    if doc.get("format") != CODE_FORMAT:
        raise CodeFileError(f"unsupported code format {doc.get('format')!r}, expected {CODE_FORMAT}")
    try:
        payload = {key: doc[key] for key in ("group", "A", "B", "n", "k", "girth_certificate", "hx", "hz", "metadata")}
    except KeyError as exc:
        raise CodeFileError(f"code file lacks field {exc}") from exc
    if _digest(payload) != doc.get("sha256"):
        raise CodeFileError("checksum mismatch")
    try:
        code = CssCode(
            hx=BinMatrix.from_json_dict(payload["hx"]),
            hz=BinMatrix.from_json_dict(payload["hz"]),
            group=GroupSpec.from_text(payload["group"]),
            gens=GeneratorSets(payload["A"], payload["B"]),
            k=int(payload["k"]),
            girth_certificate=payload["girth_certificate"],
            metadata=payload["metadata"],
        )
    except (ValueError, TypeError) as exc:
        raise CodeFileError(str(exc)) from exc
    if code.n != payload["n"]:
        raise CodeFileError("stored n disagrees with matrix width")
    return code


def save(code: CssCode, path: str | Path) -> None:
    Path(path).write_text(dumps(code))


def load(path: str | Path) -> CssCode:
    return loads(Path(path).read_text())


def export_alist(code: CssCode, prefix: str | Path) -> tuple[Path, Path]:
    prefix = Path(prefix)
    px = prefix.with_name(prefix.name + "_hx.alist")
    pz = prefix.with_name(prefix.name + "_hz.alist")
    write_alist(code.hx, px)
    write_alist(code.hz, pz)
    return px, pz


def warn_if_trivial(code: CssCode) -> None:
    if code.k == 0:
        warnings.warn("code has trivial dimension (k = 0)", stacklevel=2)
