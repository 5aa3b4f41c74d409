"""Syndrome-based message-passing decoders (BP, MS, normalised MS) and OSD-0.

Messages are log-likelihood ratios (positive favours "no error"). One
iteration of the flooding schedule is: every check updates from the current
variable-to-check messages, the hard decision is taken from the prior plus
all incoming check messages, then every variable-to-check message is
refreshed. Decoding stops after the first iteration whose hard decision
reproduces the syndrome.

The core works on batches: a ``(B, m)`` array of syndromes is decoded in
lock-step, and rows leave the batch as soon as they converge. Every operation
is row-wise, so a syndrome decodes identically whatever batch it sits in.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .gf2 import BinMatrix, InfeasibleSystem, pack_bits, unpack_bits

VARIANTS = ("BP", "MS", "nMS")
CLIP = 25.0


@dataclass(frozen=True)
class DecoderConfig:
    variant: str = "nMS"
    beta: float = 0.875
    max_iters: int = 300
    osd0: bool = False
    clip: float = CLIP

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.clip > 0:
            raise ValueError("clip must be positive")

    @property
    def scale(self) -> float:
        return self.beta if self.variant == "nMS" else 1.0


@dataclass
class MessageState:
    """Per-edge messages; edge ``e`` joins ``edge_check[e]`` and ``edge_var[e]``."""

    nu: np.ndarray  # variable -> check
    mu: np.ndarray  # check -> variable


@dataclass
class DecodeResult:
    estimate: np.ndarray
    converged: bool
    iterations: int
    soft: np.ndarray
    osd_used: bool = False
    hard_trace: list[np.ndarray] = field(default_factory=list)
    records: list[dict] = field(default_factory=list)

    def trace_lines(self) -> str:
        """Line-delimited JSON with iteration, estimate weight and syndrome mismatch."""
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records)


def depolarizing_llr(eps: float) -> float:
    """Prior LLR of one CSS side: X (or Z) flips with probability 2 eps / 3."""
    p = 2.0 * eps / 3.0
    if not 0.0 < p < 1.0:
        raise ValueError(f"depolarizing probability {eps} gives no usable prior")
    return float(np.log((1.0 - p) / p))


# -- scalar check updates (reference forms) ----------------------------------


def bp_check_update(incoming, syndrome_bit: int, clip: float = CLIP) -> float:
    """``2 (1 - 2 s) atanh(prod tanh(nu / 2))``, saturated at ``clip``."""
    nu = np.asarray(incoming, dtype=float)
    if nu.size == 0:
        raise ValueError("need at least one incoming message")
    prod = float(np.prod(np.tanh(nu / 2.0)))
    with np.errstate(divide="ignore"):
        mu = 2.0 * np.arctanh(prod)
    return float(np.clip((1 - 2 * int(syndrome_bit)) * mu, -clip, clip))


def ms_check_update(incoming, syndrome_bit: int) -> float:
    """``(1 - 2 s) prod sgn(nu) min |nu|`` with ``sgn(0) = +1``."""
    nu = np.asarray(incoming, dtype=float)
    if nu.size == 0:
        raise ValueError("need at least one incoming message")
    sign = -1.0 if np.count_nonzero(nu < 0) % 2 else 1.0
    return float((1 - 2 * int(syndrome_bit)) * sign * np.min(np.abs(nu)))


# -- graph layout -------------------------------------------------------------


class MessagePassingDecoder:
    """Decoder bound to one parity-check matrix.

    Padded neighbour tables point at a spare message slot (index ``E``) so
    irregular matrices vectorise like regular ones.
    """

    def __init__(self, h: BinMatrix | np.ndarray, cfg: DecoderConfig) -> None:
        self.h = h if isinstance(h, BinMatrix) else BinMatrix.from_dense(h)
        self.cfg = cfg
        dense = self.h.to_dense()
        self.m, self.n = dense.shape
        rows, cols = np.nonzero(dense)  # row-major: edges grouped by check
        self.edge_check, self.edge_var = rows, cols
        E = len(rows)
        self.num_edges = E
        cdeg = np.bincount(rows, minlength=self.m)
        vdeg = np.bincount(cols, minlength=self.n)
        self.dc = int(cdeg.max(initial=0))
        self.dv = int(vdeg.max(initial=0))
        self.check_edges = np.full((self.m, max(self.dc, 1)), E, dtype=np.int64)
        self.check_vars = np.full((self.m, max(self.dc, 1)), self.n, dtype=np.int64)
        self.var_edges = np.full((self.n, max(self.dv, 1)), E, dtype=np.int64)
        fill_c = np.zeros(self.m, dtype=np.int64)
        fill_v = np.zeros(self.n, dtype=np.int64)
        for e, (i, j) in enumerate(zip(rows.tolist(), cols.tolist())):
            self.check_edges[i, fill_c[i]] = e
            self.check_vars[i, fill_c[i]] = j
            fill_c[i] += 1
            self.var_edges[j, fill_v[j]] = e
            fill_v[j] += 1
        self._regular = bool(E) and bool(np.all(cdeg == self.dc))

    # -- building blocks ---------------------------------------------------

    def _check_update(self, nu: np.ndarray, synd: np.ndarray) -> np.ndarray:
        """All check-to-variable messages from ``nu`` (shape ``(B, E+1)``)."""
        cfg = self.cfg
        B, E = nu.shape[0], self.num_edges
        if self._regular:
            V = nu[:, :E].reshape(B, self.m, self.dc)
        else:
            V = nu[:, self.check_edges]  # (B, m, dc)
        synd_sign = 1.0 - 2.0 * synd[:, :, None]
        if cfg.variant == "BP":
            t = np.tanh(V / 2.0)
            dc = V.shape[2]
            prefix = np.ones_like(t)
            suffix = np.ones_like(t)
            for k in range(1, dc):
                prefix[:, :, k] = prefix[:, :, k - 1] * t[:, :, k - 1]
            for k in range(dc - 2, -1, -1):
                suffix[:, :, k] = suffix[:, :, k + 1] * t[:, :, k + 1]
            with np.errstate(divide="ignore"):
                out = 2.0 * np.arctanh(prefix * suffix)
            out *= synd_sign
        else:
            mag = np.abs(V)
            if V.shape[2] > 1:
                two = np.partition(mag, 1, axis=2)
                min1, min2 = two[:, :, :1], two[:, :, 1:2]
            else:
                min1, min2 = mag, np.full_like(mag, np.inf)
            # ties make min1 == min2, so the leave-one-out minimum stays exact
            out = np.where(mag == min1, min2, min1)
            sgn = np.where(V < 0, -1.0, 1.0)
            out *= sgn
            out *= sgn.prod(axis=2, keepdims=True) * synd_sign
            if cfg.variant == "nMS":
                out *= cfg.beta
        np.clip(out, -cfg.clip, cfg.clip, out=out)
        mu = np.empty((B, E + 1))
        if self._regular:
            mu[:, :E] = out.reshape(B, E)
        else:
            mu[:, self.check_edges] = out
        mu[:, E] = 0.0
        return mu

    def _totals(self, mu: np.ndarray, llr: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        gathered = [mu[:, self.var_edges[:, k]] for k in range(self.var_edges.shape[1])]
        total = llr.copy()
        for g in gathered:
            total = total + g
        return total, gathered

    def _var_update(self, gathered: list[np.ndarray], llr: np.ndarray) -> np.ndarray:
        B = llr.shape[0]
        nu = np.empty((B, self.num_edges + 1))
        dv = len(gathered)
        for k in range(dv):
            ext = llr.copy()
            for kk in range(dv):
                if kk != k:
                    ext = ext + gathered[kk]
            nu[:, self.var_edges[:, k]] = ext
        np.clip(nu, -self.cfg.clip, self.cfg.clip, out=nu)
        nu[:, self.num_edges] = np.inf
        return nu

    def syndrome_of(self, est: np.ndarray) -> np.ndarray:
        padded = np.concatenate([est, np.zeros((est.shape[0], 1), dtype=est.dtype)], axis=1)
        return (np.bitwise_xor.reduce(padded[:, self.check_vars], axis=2)).astype(np.uint8)

    def initial_nu(self, llr: np.ndarray) -> np.ndarray:
        nu = np.empty((llr.shape[0], self.num_edges + 1))
        nu[:, : self.num_edges] = llr[:, self.edge_var]
        np.clip(nu, -self.cfg.clip, self.cfg.clip, out=nu)
        nu[:, self.num_edges] = np.inf
        return nu

    # -- decoding ----------------------------------------------------------

    def _prepare(self, syndromes, llr) -> tuple[np.ndarray, np.ndarray]:
        synd = np.atleast_2d(np.asarray(syndromes, dtype=np.uint8))
        if synd.shape[1] != self.m:
            raise ValueError(f"syndrome length {synd.shape[1]} != number of checks {self.m}")
        B = synd.shape[0]
        lam = np.asarray(llr, dtype=float)
        if lam.ndim == 0:
            lam = np.full((B, self.n), float(lam))
        elif lam.ndim == 1:
            if lam.size != self.n:
                raise ValueError(f"prior length {lam.size} != number of variables {self.n}")
            lam = np.broadcast_to(lam, (B, self.n)).copy()
        if lam.shape != (B, self.n) or not np.all(np.isfinite(lam)):
            raise ValueError("priors must be finite with one value per variable")
        return synd, lam

    def decode_batch(self, syndromes, llr) -> dict[str, np.ndarray]:
        """Decode many syndromes. Returns arrays ``estimate``, ``converged``,
        ``iterations``, ``soft`` and ``osd_used`` indexed like the input rows."""
        synd, lam = self._prepare(syndromes, llr)
        B = synd.shape[0]
        estimate = np.zeros((B, self.n), dtype=np.uint8)
        soft = lam.copy()
        converged = np.zeros(B, dtype=bool)
        iterations = np.zeros(B, dtype=np.int64)
        active = np.arange(B)
        nu = self.initial_nu(lam)
        a_synd, a_lam = synd.astype(float), lam
        for it in range(1, self.cfg.max_iters + 1):
            if active.size == 0:
                break
            mu = self._check_update(nu, a_synd)
            total, gathered = self._totals(mu, a_lam)
            if not np.all(np.isfinite(total)):
                raise FloatingPointError("non-finite soft values despite clipping")
            est = (total < 0).astype(np.uint8)
            done = np.all(self.syndrome_of(est) == synd[active], axis=1)
            estimate[active] = est
            soft[active] = total
            iterations[active] = it
            if it == self.cfg.max_iters:
                converged[active] = done
                break
            nu = self._var_update(gathered, a_lam)
            if done.any():
                converged[active[done]] = True
                keep = ~done
                active = active[keep]
                nu, a_synd, a_lam = nu[keep], a_synd[keep], a_lam[keep]
        osd_used = np.zeros(B, dtype=bool)
        if self.cfg.osd0:
            for b in np.flatnonzero(~converged):
                estimate[b] = osd0(self.h, synd[b], soft[b])
                osd_used[b] = True
        return {
            "estimate": estimate,
            "converged": converged,
            "iterations": iterations,
            "soft": soft,
            "osd_used": osd_used,
        }

    def decode(
        self,
        syndrome,
        llr,
        *,
        trace: bool = False,
        callback: Callable[[int, MessageState, np.ndarray], None] | None = None,
    ) -> DecodeResult:
        """Decode one syndrome, optionally recording per-iteration hard decisions.

        ``callback(iteration, state, estimate)`` sees the messages after the
        variable update of each iteration (mu of this iteration, nu derived
        from it).
        """
        synd, lam = self._prepare(syndrome, llr)
        if synd.shape[0] != 1:
            raise ValueError("decode() takes a single syndrome; use decode_batch()")
        nu = self.initial_nu(lam)
        fsynd = synd.astype(float)
        hard_trace: list[np.ndarray] = []
        records: list[dict] = []
        est = np.zeros(self.n, dtype=np.uint8)
        total = lam[0]
        converged = False
        it = 0
        for it in range(1, self.cfg.max_iters + 1):
            mu = self._check_update(nu, fsynd)
            tot, gathered = self._totals(mu, lam)
            if not np.all(np.isfinite(tot)):
                raise FloatingPointError("non-finite soft values despite clipping")
            e2 = (tot < 0).astype(np.uint8)
            mismatch = int(np.count_nonzero(self.syndrome_of(e2)[0] != synd[0]))
            nu = self._var_update(gathered, lam)
            est, total = e2[0], tot[0]
            if trace:
                hard_trace.append(est.copy())
                records.append({"iteration": it, "weight": int(est.sum()), "syndrome_mismatch": mismatch})
            if callback is not None:
                callback(it, MessageState(nu=nu[0, : self.num_edges].copy(), mu=mu[0, : self.num_edges].copy()), est)
            if mismatch == 0:
                converged = True
                break
        osd_used = False
        if not converged and self.cfg.osd0:
            est = osd0(self.h, synd[0], total)
            osd_used = True
        return DecodeResult(
            estimate=est.copy(),
            converged=converged,
            iterations=it,
            soft=np.array(total, dtype=float),
            osd_used=osd_used,
            hard_trace=hard_trace,
            records=records,
        )


def decode(h: BinMatrix | np.ndarray, syndrome, cfg: DecoderConfig, llr, **kwargs) -> DecodeResult:
    return MessagePassingDecoder(h, cfg).decode(syndrome, llr, **kwargs)


# -- OSD-0 ---------------------------------------------------------------------


def osd0(h: BinMatrix | np.ndarray, syndrome, soft) -> np.ndarray:
    """Order-0 ordered-statistics solution of ``H e = s``.

    Columns are taken in order of increasing reliability ``|soft|`` and the
    first independent ones become pivots; every other position keeps its hard
    decision (``soft < 0``), and the pivots are solved so the syndrome holds.
    Equivalently the hard decision is kept on the most reliable information
    set.
    """
    hm = h if isinstance(h, BinMatrix) else BinMatrix.from_dense(h)
    dense = hm.to_dense()
    m, n = dense.shape
    s = np.asarray(syndrome, dtype=np.uint8).ravel()
    soft = np.asarray(soft, dtype=float).ravel()
    if s.size != m or soft.size != n:
        raise ValueError("syndrome/soft lengths do not match H")
    hard = (soft < 0).astype(np.uint8)
    order = np.argsort(np.abs(soft), kind="stable")
    permuted = dense[:, order]
    rows = [pack_bits(r) | (int(b) << n) for r, b in zip(permuted, s)]
    # Gauss-Jordan with leftmost pivots over the permuted columns
    pivots: list[int] = []
    reduced: list[int] = []
    work = [r for r in rows if r]
    for col in range(n):
        bit = 1 << col
        hit = next((i for i, r in enumerate(work) if r & bit), None)
        if hit is None:
            continue
        piv = work.pop(hit)
        work = [r ^ piv if r & bit else r for r in work]
        reduced = [r ^ piv if r & bit else r for r in reduced]
        reduced.append(piv)
        pivots.append(col)
        work = [r for r in work if r]
    if any(work):
        raise InfeasibleSystem("syndrome is inconsistent with H")
    pivot_mask = 0
    for c in pivots:
        pivot_mask |= 1 << c
    hard_perm = pack_bits(hard[order])
    fixed = hard_perm & ~pivot_mask & ((1 << n) - 1)
    x = fixed
    for row, c in zip(reduced, pivots):
        rhs = (row >> n) & 1
        rhs ^= (row & fixed & ((1 << n) - 1)).bit_count() & 1
        if rhs:
            x |= 1 << c
    out = np.zeros(n, dtype=np.uint8)
    out[order] = unpack_bits(x, n)
    return out
