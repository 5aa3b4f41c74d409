"""Decoder instrumentation: half-weight injections on symmetric stabilizers,
the weight trajectory ``W_k`` and the Bethe free entropy of message states.

Messages are LLRs, and each is read as a binary distribution through the
logistic map ``P(0) = e^x / (1 + e^x)``. Both directions use the same map:
check-to-variable messages ``mu`` and variable-to-check messages ``nu``.
Per edge, the check side contributes ``log sigma(+-mu)`` and the variable
side ``log sigma(+-nu)``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .code_builder import CssCode
from .decoder import DecoderConfig, MessagePassingDecoder, MessageState, depolarizing_llr
from .gf2 import BinMatrix, as_vector
from .tanner_graph import find_candidate_symmetric_stabilizers


def _log_sigmoid(x: np.ndarray) -> np.ndarray:
    return -np.logaddexp(0.0, -x)


def weight_trajectory(estimate, error, support) -> int:
    """Hamming weight of ``estimate + error + support`` over GF(2)."""
    e_hat, e, s = (np.asarray(v, dtype=np.uint8).ravel() for v in (estimate, error, support))
    if not (e_hat.size == e.size == s.size):
        raise ValueError("vectors must have equal length")
    return int(np.count_nonzero(e_hat ^ e ^ s))


class BetheEntropy:
    """Bethe free entropy evaluator bound to one parity-check matrix."""

    def __init__(self, h: BinMatrix | np.ndarray) -> None:
        self.layout = MessagePassingDecoder(h, DecoderConfig(variant="MS"))

    def parts(self, state: MessageState, syndrome) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-variable ``E_i``, per-check ``E_j`` and per-edge ``E_ij``."""
        lay = self.layout
        E = lay.num_edges
        mu = np.asarray(state.mu, dtype=float).ravel()
        nu = np.asarray(state.nu, dtype=float).ravel()
        if mu.size != E or nu.size != E:
            raise ValueError(f"expected {E} messages per direction")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(nu))):
            raise FloatingPointError("non-finite message in entropy evaluation")
        synd = np.asarray(syndrome, dtype=np.uint8).ravel()
        if synd.size != lay.m:
            raise ValueError(f"syndrome length {synd.size} != {lay.m}")

        # variables: log sum_u prod_j m_{j->i}(u)
        lm0 = np.append(_log_sigmoid(mu), 0.0)
        lm1 = np.append(_log_sigmoid(-mu), 0.0)
        e_var = np.logaddexp(lm0[lay.var_edges].sum(axis=1), lm1[lay.var_edges].sum(axis=1))

        # checks: probability mass of configurations with parity s_j
        p0 = np.append(np.exp(_log_sigmoid(nu)), 1.0)[lay.check_edges]
        p1 = np.append(np.exp(_log_sigmoid(-nu)), 0.0)[lay.check_edges]
        even = np.ones(lay.m)
        odd = np.zeros(lay.m)
        for k in range(p0.shape[1]):
            even, odd = even * p0[:, k] + odd * p1[:, k], even * p1[:, k] + odd * p0[:, k]
        e_chk = np.log(np.where(synd == 1, odd, even))

        # edges: log sum_u m_{j->i}(u) m_{i->j}(u)
        e_edge = np.logaddexp(_log_sigmoid(mu) + _log_sigmoid(nu), _log_sigmoid(-mu) + _log_sigmoid(-nu))
        return e_var, e_chk, e_edge

    def __call__(self, state: MessageState, syndrome) -> float:
        e_var, e_chk, e_edge = self.parts(state, syndrome)
        return float(e_var.sum() + e_chk.sum() - e_edge.sum())


def bethe_entropy(h: BinMatrix | np.ndarray, state: MessageState, syndrome) -> float:
    return BetheEntropy(h)(state, syndrome)


def check_entropy_bruteforce(nu: Sequence[float], syndrome_bit: int) -> float:
    """Reference ``E_j`` by enumerating all ``2^d`` assignments of one check."""
    nu = np.asarray(nu, dtype=float)
    d = nu.size
    bits = ((np.arange(2**d)[:, None] >> np.arange(d)[None, :]) & 1).astype(bool)
    keep = (bits.sum(axis=1) % 2) == int(syndrome_bit)
    probs = np.where(bits, 1.0 / (1.0 + np.exp(nu)), 1.0 / (1.0 + np.exp(-nu)))
    return float(np.log(np.prod(probs[keep], axis=1).sum()))


# -- stabilizer experiments --------------------------------------------------------


@dataclass
class StabilizerExperiment:
    support: np.ndarray
    error: np.ndarray
    decoder: DecoderConfig = field(default_factory=lambda: DecoderConfig(variant="nMS", beta=0.875, max_iters=300))
    eps: float = 0.05  # sets the uniform prior

    def validate(self, code: CssCode) -> None:
        s = as_vector(self.support, code.n)
        e = as_vector(self.error, code.n)
        ws, we = int(s.sum()), int(e.sum())
        if ws == 0 or ws % 2:
            raise ValueError("stabilizer support must have even, nonzero weight")
        if np.any(e & ~s & 1):
            raise ValueError("injected error must lie inside the stabilizer support")
        if 2 * we != ws:
            raise ValueError(f"injected error has weight {we}, expected half of {ws}")
        if not code.hx.in_row_space(s):
            raise ValueError("support is not an X stabilizer of the code")


@dataclass
class EntropyTrace:
    weights: list[int]
    entropy: list[float]
    converged: bool
    iterations: int

    @property
    def reached_zero(self) -> bool:
        return 0 in self.weights

    def series_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "W", "E"])
        for k, (wk, ek) in enumerate(zip(self.weights, self.entropy), start=1):
            w.writerow([k, wk, repr(float(ek))])
        return buf.getvalue()

    def phase_portrait_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["E_prev", "E_curr"])
        for prev, curr in zip(self.entropy, self.entropy[1:]):
            w.writerow([repr(float(prev)), repr(float(curr))])
        return buf.getvalue()


def run_stabilizer_experiment(code: CssCode, exp: StabilizerExperiment) -> EntropyTrace:
    """Decode the X syndrome of a half-weight error and trace ``W_k`` and ``E^(k)``.

    The error and its complement inside the stabilizer share a syndrome, so
    ``W_k = 0`` means the decoder settled on the complementary half.
    """
    exp.validate(code)
    s = as_vector(exp.support, code.n)
    e = as_vector(exp.error, code.n)
    syndrome = code.hz.mul_vec(e)
    decoder = MessagePassingDecoder(code.hz, exp.decoder)
    entropy = BetheEntropy(code.hz)
    weights: list[int] = []
    values: list[float] = []

    def record(_it: int, state: MessageState, estimate: np.ndarray) -> None:
        weights.append(weight_trajectory(estimate, e, s))
        values.append(entropy(state, syndrome))

    res = decoder.decode(syndrome, np.full(code.n, depolarizing_llr(exp.eps)), callback=record)
    return EntropyTrace(weights, values, res.converged, res.iterations)


def half_weight_injections(code: CssCode, max_candidates: int | None = None) -> Iterable[tuple[np.ndarray, np.ndarray]]:
    """``(support, error)`` pairs: each half of every symmetric single-row stabilizer."""
    found = find_candidate_symmetric_stabilizers(code, max_rows=1)
    count = 0
    for support, (p1, p2) in found:
        for part in (p1, p2):
            err = np.zeros(code.n, dtype=np.uint8)
            err[list(part)] = 1
            yield support, err
            count += 1
            if max_candidates is not None and count >= max_candidates:
                return


def find_converging_injection(
    code: CssCode,
    decoder: DecoderConfig | None = None,
    eps: float = 0.05,
    max_candidates: int | None = None,
) -> tuple[StabilizerExperiment, EntropyTrace] | None:
    """First symmetric half-weight injection whose trajectory reaches ``W = 0``."""
    for support, err in half_weight_injections(code, max_candidates):
        exp = StabilizerExperiment(support, err, eps=eps)
        if decoder is not None:
            exp.decoder = decoder
        trace = run_stabilizer_experiment(code, exp)
        if trace.reached_zero:
            return exp, trace
    return None
