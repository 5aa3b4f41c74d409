"""Dense GF(2) linear algebra on bit-packed rows.

Each row of a :class:`BinMatrix` is stored as a Python integer used as a
bitset: bit ``j`` holds column ``j``. Row operations are single big-int XORs,
which keeps elimination fast for the few-thousand-column matrices used here.
Vectors cross the API as numpy ``uint8`` arrays of zeros and ones.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

import numpy as np

MATRIX_FORMAT = "qmargulis-binmatrix/1"


class InfeasibleSystem(ValueError):
    """Raised when ``M x = s`` has no solution."""


def pack_bits(bits) -> int:
    """Pack a 0/1 vector into an int (element ``j`` -> bit ``j``)."""
    arr = np.asarray(bits, dtype=np.uint8).ravel() & 1
    return int.from_bytes(np.packbits(arr, bitorder="little").tobytes(), "little")


def unpack_bits(value: int, length: int) -> np.ndarray:
    nbytes = max(1, (length + 7) // 8)
    raw = np.frombuffer(int(value).to_bytes(nbytes, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:length].copy()


def weight(v) -> int:
    return int(np.count_nonzero(np.asarray(v)))


def as_vector(v, length: int | None = None) -> np.ndarray:
    arr = np.asarray(v, dtype=np.uint8).ravel()
    if np.any(arr > 1):
        raise ValueError("binary vector entries must be 0 or 1")
    if length is not None and arr.size != length:
        raise ValueError(f"vector length {arr.size} != expected {length}")
    return arr


def _eliminate(rows: list[int], ncols: int, full: bool = False) -> tuple[list[int], list[int]]:
    """Leftmost-pivot elimination. Returns (reduced nonzero rows, pivot columns)."""
    work = [r for r in rows if r]
    pivots: list[int] = []
    out: list[int] = []
    for col in range(ncols):
        if not work:
            break
        bit = 1 << col
        hit = next((i for i, r in enumerate(work) if r & bit), None)
        if hit is None:
            continue
        piv = work.pop(hit)
        work = [r ^ piv if r & bit else r for r in work]
        work = [r for r in work if r]
        if full:
            out = [r ^ piv if r & bit else r for r in out]
        out.append(piv)
        pivots.append(col)
    return out, pivots


class BinMatrix:
    """Binary matrix with bit-packed rows."""

    __slots__ = ("nrows", "ncols", "rows")

    def __init__(self, rows: Iterable[int], ncols: int) -> None:
        self.rows = [int(r) for r in rows]
        self.nrows = len(self.rows)
        self.ncols = int(ncols)
        limit = 1 << self.ncols
        for r in self.rows:
            if r < 0 or r >= limit:
                raise ValueError("row has bits outside the column range")

    # -- constructors ----------------------------------------------------

    @classmethod
    def from_dense(cls, dense) -> "BinMatrix":
        arr = np.atleast_2d(np.asarray(dense, dtype=np.uint8))
        if np.any(arr > 1):
            raise ValueError("entries must be 0 or 1")
        return cls((pack_bits(row) for row in arr), arr.shape[1])

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "BinMatrix":
        return cls([0] * nrows, ncols)

    @classmethod
    def identity(cls, n: int) -> "BinMatrix":
        return cls((1 << i for i in range(n)), n)

    @classmethod
    def from_positions(cls, nrows: int, ncols: int, row_idx, col_idx) -> "BinMatrix":
        """Matrix with ones at ``(row_idx[t], col_idx[t])``; repeated positions cancel."""
        rows = [0] * nrows
        for r, c in zip(np.asarray(row_idx).tolist(), np.asarray(col_idx).tolist()):
            rows[r] ^= 1 << c
        return cls(rows, ncols)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.nrows, self.ncols), dtype=np.uint8)
        for i, r in enumerate(self.rows):
            out[i] = unpack_bits(r, self.ncols)
        return out

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BinMatrix):
            return NotImplemented
        return self.ncols == other.ncols and self.rows == other.rows

    def __repr__(self) -> str:
        return f"BinMatrix({self.nrows}x{self.ncols})"

    def row(self, i: int) -> np.ndarray:
        return unpack_bits(self.rows[i], self.ncols)

    def is_zero(self) -> bool:
        return not any(self.rows)

    # -- arithmetic --------------------------------------------------------

    def add(self, other: "BinMatrix") -> "BinMatrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        return BinMatrix((a ^ b for a, b in zip(self.rows, other.rows)), self.ncols)

    __add__ = add

    def multiply(self, other: "BinMatrix") -> "BinMatrix":
        if self.ncols != other.nrows:
            raise ValueError(f"inner dimensions differ: {self.shape} x {other.shape}")
        out = []
        orows = other.rows
        for r in self.rows:
            acc = 0
            while r:
                low = r & -r
                acc ^= orows[low.bit_length() - 1]
                r ^= low
            out.append(acc)
        return BinMatrix(out, other.ncols)

    __matmul__ = multiply

    def transpose(self) -> "BinMatrix":
        return BinMatrix.from_dense(self.to_dense().T)

    @property
    def T(self) -> "BinMatrix":
        return self.transpose()

    def hstack(self, other: "BinMatrix") -> "BinMatrix":
        if self.nrows != other.nrows:
            raise ValueError("hstack needs equal row counts")
        shift = self.ncols
        return BinMatrix((a | (b << shift) for a, b in zip(self.rows, other.rows)), self.ncols + other.ncols)

    def vstack(self, other: "BinMatrix") -> "BinMatrix":
        if self.ncols != other.ncols:
            raise ValueError("vstack needs equal column counts")
        return BinMatrix(self.rows + other.rows, self.ncols)

    def mul_vec(self, v) -> np.ndarray:
        """``M v^T`` over GF(2)."""
        x = pack_bits(as_vector(v, self.ncols))
        return np.array([(r & x).bit_count() & 1 for r in self.rows], dtype=np.uint8)

    def row_weights(self) -> np.ndarray:
        return np.array([r.bit_count() for r in self.rows], dtype=np.int64)

    def col_weights(self) -> np.ndarray:
        return self.to_dense().sum(axis=0, dtype=np.int64)

    # -- elimination -------------------------------------------------------

    def rank(self) -> int:
        return len(_eliminate(self.rows, self.ncols)[1])

    def kernel_basis(self) -> "BinMatrix":
        """Basis (as rows) of ``{x : M x^T = 0}``."""
        red, pivots = _eliminate(self.rows, self.ncols, full=True)
        pivot_set = set(pivots)
        basis = []
        for free in range(self.ncols):
            if free in pivot_set:
                continue
            x = 1 << free
            for r, c in zip(red, pivots):
                if (r >> free) & 1:
                    x |= 1 << c
            basis.append(x)
        return BinMatrix(basis, self.ncols)

    def in_row_space(self, v) -> bool:
        vec = pack_bits(as_vector(v, self.ncols))
        return BinMatrix(self.rows + [vec], self.ncols).rank() == self.rank()

    def solve_particular(self, s) -> np.ndarray:
        """Some ``x`` with ``M x^T = s``; raises :class:`InfeasibleSystem` otherwise."""
        s = as_vector(s, self.nrows)
        n = self.ncols
        aug = [r | (int(b) << n) for r, b in zip(self.rows, s)]
        red, pivots = _eliminate(aug, n + 1, full=True)
        if n in pivots:
            raise InfeasibleSystem("syndrome is not in the column space")
        x = 0
        for r, c in zip(red, pivots):
            if (r >> n) & 1:
                x |= 1 << c
        return unpack_bits(x, n)

    def row_space_reducer(self) -> "RowSpaceReducer":
        return RowSpaceReducer(self)

    # -- serialisation -----------------------------------------------------

    def hex_rows(self) -> list[str]:
        width = max(1, (self.ncols + 3) // 4)
        return [format(r, f"0{width}x") for r in self.rows]

    def to_json_dict(self) -> dict:
        return {"format": MATRIX_FORMAT, "rows": self.nrows, "cols": self.ncols, "data": self.hex_rows()}

    @classmethod
    def from_json_dict(cls, d: dict) -> "BinMatrix":
        if d.get("format") != MATRIX_FORMAT:
            raise ValueError(f"unsupported matrix format {d.get('format')!r}")
        data = d["data"]
        if len(data) != d["rows"]:
            raise ValueError("row count does not match data")
        return cls((int(h, 16) for h in data), d["cols"])

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "BinMatrix":
        return cls.from_json_dict(json.loads(text))


class RowSpaceReducer:
    """Pre-reduced row basis for repeated row-space membership queries."""

    def __init__(self, m: BinMatrix) -> None:
        red, pivots = _eliminate(m.rows, m.ncols, full=True)
        self.ncols = m.ncols
        self._basis = list(zip(pivots, red))

    def reduce(self, vec: int) -> int:
        for col, row in self._basis:
            if (vec >> col) & 1:
                vec ^= row
        return vec

    def contains(self, v) -> bool:
        return self.reduce(pack_bits(as_vector(v, self.ncols))) == 0


def multiply(a: BinMatrix, b: BinMatrix) -> BinMatrix:
    return a.multiply(b)


def rank(m: BinMatrix) -> int:
    return m.rank()


def in_row_space(v, m: BinMatrix) -> bool:
    return m.in_row_space(v)


def solve_particular(m: BinMatrix, s) -> np.ndarray:
    return m.solve_particular(s)


# -- alist -----------------------------------------------------------------


def to_alist(m: BinMatrix) -> str:
    """MacKay alist text for ``m`` (rows are checks, columns are variables)."""
    dense = m.to_dense()
    nrows, ncols = dense.shape
    col_lists = [np.flatnonzero(dense[:, j]) + 1 for j in range(ncols)]
    row_lists = [np.flatnonzero(dense[i]) + 1 for i in range(nrows)]
    max_c = max((len(c) for c in col_lists), default=0)
    max_r = max((len(r) for r in row_lists), default=0)

    def padded(lst, width):
        vals = [str(x) for x in lst] + ["0"] * (width - len(lst))
        return " ".join(vals)

    lines = [
        f"{ncols} {nrows}",
        f"{max_c} {max_r}",
        " ".join(str(len(c)) for c in col_lists),
        " ".join(str(len(r)) for r in row_lists),
    ]
    lines += [padded(c, max_c) for c in col_lists]
    lines += [padded(r, max_r) for r in row_lists]
    return "\n".join(lines) + "\n"


def from_alist(text: str) -> BinMatrix:
    tokens = [int(t) for t in text.split()]
    if len(tokens) < 4:
        raise ValueError("alist too short")
    ncols, nrows, max_c, max_r = tokens[:4]
    pos = 4
    col_deg = tokens[pos : pos + ncols]
    pos += ncols
    row_deg = tokens[pos : pos + nrows]
    pos += nrows
    if len(col_deg) != ncols or len(row_deg) != nrows:
        raise ValueError("alist degree lists truncated")
    rows = [0] * nrows
    for j in range(ncols):
        entries = tokens[pos : pos + max_c]
        if len(entries) != max_c:
            raise ValueError("alist column lists truncated")
        pos += max_c
        nz = [e for e in entries if e]
        if len(nz) != col_deg[j]:
            raise ValueError(f"column {j} degree mismatch")
        for i in nz:
            rows[i - 1] |= 1 << j
    m = BinMatrix(rows, ncols)
    # row lists are redundant; verify them when present
    check = [0] * nrows
    for i in range(nrows):
        entries = tokens[pos : pos + max_r]
        if len(entries) != max_r:
            raise ValueError("alist row lists truncated")
        pos += max_r
        for j in (e for e in entries if e):
            check[i] |= 1 << (j - 1)
    if check != rows:
        raise ValueError("alist row and column lists disagree")
    return m


def write_alist(m: BinMatrix, path: str | Path) -> None:
    Path(path).write_text(to_alist(m))


def read_alist(path: str | Path) -> BinMatrix:
    return from_alist(Path(path).read_text())
