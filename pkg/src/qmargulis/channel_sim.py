"""Depolarizing-noise Monte Carlo for CSS codes with degeneracy-aware scoring.

Each trial draws its randomness from a generator seeded by ``(seed, trial)``,
so a point depends only on the seed and the trial count, never on how trials
are batched or spread over workers. Per qubit, one uniform decides whether an
error happens (``u < eps``) and a second picks X, Y or Z; with a shared seed
the error sets at two noise levels are therefore nested.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

from .code_builder import CssCode
from .decoder import DecoderConfig, MessagePassingDecoder, depolarizing_llr
from .gf2 import BinMatrix, RowSpaceReducer, pack_bits

WILSON_Z = 1.959963984540054
CSV_COLUMNS = ("eps", "trials", "failures", "ler", "ci_low", "ci_high", "censored")


class Outcome(enum.Enum):
    SUCCESS = "Success"
    NON_CONVERGENCE = "NonConvergence"
    LOGICAL_ERROR = "LogicalError"


@dataclass(frozen=True)
class PauliError:
    e_x: np.ndarray
    e_z: np.ndarray

    def __post_init__(self) -> None:
        if self.e_x.shape != self.e_z.shape:
            raise ValueError("X and Z parts must have the same length")


@dataclass(frozen=True)
class TrialOutcome:
    x_side: Outcome
    z_side: Outcome

    @property
    def failed(self) -> bool:
        return self.x_side is not Outcome.SUCCESS or self.z_side is not Outcome.SUCCESS


@dataclass(frozen=True)
class SimConfig:
    eps: tuple[float, ...] = (0.05,)
    min_samples: int = 100_000
    min_failures: int = 20
    max_trials: int = 10_000_000
    rng_seed: int = 0
    workers: int = 1
    batch_size: int = 512

    def __post_init__(self) -> None:
        object.__setattr__(self, "eps", tuple(float(e) for e in self.eps))
        for e in self.eps:
            _check_eps(e)
        if self.min_samples < 1 or self.min_failures < 0 or self.max_trials < 1:
            raise ValueError("trial budgets must be positive")
        if self.workers < 1 or self.batch_size < 1:
            raise ValueError("workers and batch_size must be positive")


@dataclass(frozen=True)
class LerPoint:
    eps: float
    trials: int
    failures: int
    ci_low: float
    ci_high: float
    censored: bool
    x_failures: int = 0
    z_failures: int = 0

    @property
    def ler(self) -> float:
        return self.failures / self.trials if self.trials else 0.0

    def csv_row(self) -> list[str]:
        return [
            repr(self.eps),
            str(self.trials),
            str(self.failures),
            f"{self.ler:.10g}",
            f"{self.ci_low:.10g}",
            f"{self.ci_high:.10g}",
            str(int(self.censored)),
        ]


def _check_eps(eps: float) -> None:
    if not 0.0 <= eps <= 0.75:
        raise ValueError(f"depolarizing probability must lie in [0, 3/4], got {eps}")


def wilson_interval(failures: int, trials: int, z: float = WILSON_Z) -> tuple[float, float]:
    if trials <= 0:
        return 0.0, 1.0
    p = failures / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if failures == 0 else max(0.0, centre - half)
    hi = 1.0 if failures == trials else min(1.0, centre + half)
    return lo, hi


# -- sampling ----------------------------------------------------------------


def _draw(n: int, eps: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    u = rng.random(n)
    kind = np.minimum((rng.random(n) * 3).astype(np.int64), 2)  # 0: X, 1: Y, 2: Z
    hit = u < eps
    e_x = (hit & (kind <= 1)).astype(np.uint8)
    e_z = (hit & (kind >= 1)).astype(np.uint8)
    return e_x, e_z


def sample_depolarizing(n: int, eps: float, rng: np.random.Generator) -> PauliError:
    """Independent X, Y, Z with probability eps/3 each; Y sets both parts."""
    _check_eps(eps)
    return PauliError(*_draw(n, eps, rng))


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(trial)])


def sample_trials(n: int, eps: float, seed: int, start: int, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Errors for trials ``start .. start+count-1`` as ``(count, n)`` arrays."""
    ex = np.empty((count, n), dtype=np.uint8)
    ez = np.empty((count, n), dtype=np.uint8)
    for t in range(count):
        ex[t], ez[t] = _draw(n, eps, trial_rng(seed, start + t))
    return ex, ez


def _syndrome_batch(h: BinMatrix, errors: np.ndarray) -> np.ndarray:
    return ((errors.astype(np.int64) @ h.to_dense().T.astype(np.int64)) & 1).astype(np.uint8)


def syndromes(code: CssCode, err: PauliError) -> tuple[np.ndarray, np.ndarray]:
    """``s_X = e_X H_Z^T`` and ``s_Z = e_Z H_X^T``."""
    if err.e_x.shape != (code.n,):
        raise ValueError(f"error length {err.e_x.shape} does not match n={code.n}")
    return code.hz.mul_vec(err.e_x), code.hx.mul_vec(err.e_z)


def classify(stabilizers: BinMatrix | RowSpaceReducer, estimate, error, converged: bool) -> Outcome:
    """Success iff the residual ``estimate + error`` is a stabilizer.

    ``stabilizers`` is H_X when scoring the X side and H_Z for the Z side.
    """
    if not converged:
        return Outcome.NON_CONVERGENCE
    red = stabilizers if isinstance(stabilizers, RowSpaceReducer) else stabilizers.row_space_reducer()
    residual = np.asarray(estimate, dtype=np.uint8) ^ np.asarray(error, dtype=np.uint8)
    return Outcome.SUCCESS if red.reduce(pack_bits(residual)) == 0 else Outcome.LOGICAL_ERROR


# -- Monte Carlo ----------------------------------------------------------------


class _Side:
    def __init__(self, check: BinMatrix, stabilizers: BinMatrix, dcfg: DecoderConfig) -> None:
        self.check = check
        self.decoder = MessagePassingDecoder(check, dcfg)
        self.reducer = stabilizers.row_space_reducer()

    def run(self, errors: np.ndarray, llr: float) -> list[Outcome]:
        synd = _syndrome_batch(self.check, errors)
        out = self.decoder.decode_batch(synd, llr)
        converged = out["converged"] | out["osd_used"]
        return [
            classify(self.reducer, out["estimate"][t], errors[t], bool(converged[t])) for t in range(errors.shape[0])
        ]


_WORKER_CACHE: dict = {}


def _sides(code_key, hx: BinMatrix, hz: BinMatrix, dcfg: DecoderConfig) -> tuple[_Side, _Side]:
    key = (code_key, dcfg)
    if key not in _WORKER_CACHE:
        _WORKER_CACHE.clear()
        # X errors are seen by H_Z and are degenerate up to rows of H_X
        _WORKER_CACHE[key] = (_Side(hz, hx, dcfg), _Side(hx, hz, dcfg))
    return _WORKER_CACHE[key]


def _run_chunk(args) -> list[tuple[bool, bool]]:
    code_key, hx, hz, dcfg, eps, seed, start, count = args
    xs, zs = _sides(code_key, hx, hz, dcfg)
    ex, ez = sample_trials(hx.ncols, eps, seed, start, count)
    llr = depolarizing_llr(eps) if eps > 0 else 1e3
    x_out = xs.run(ex, llr)
    z_out = zs.run(ez, llr)
    return [(a is not Outcome.SUCCESS, b is not Outcome.SUCCESS) for a, b in zip(x_out, z_out)]


def run_point(
    code: CssCode,
    eps: float,
    cfg: SimConfig,
    dcfg: DecoderConfig,
    progress: Callable[[dict], None] | None = None,
    pool: ProcessPoolExecutor | None = None,
) -> LerPoint:
    """Estimate the logical error rate at one depolarizing probability.

    Trials run in index order until both ``min_samples`` trials and
    ``min_failures`` failures have been seen; the point stops at exactly that
    trial. Hitting ``max_trials`` first marks the point as censored.
    """
    _check_eps(eps)
    code_key = hash((tuple(code.hx.rows), tuple(code.hz.rows)))
    trials = failures = fx = fz = 0
    next_start = 0
    own_pool = pool is None and cfg.workers > 1
    if own_pool:
        pool = ProcessPoolExecutor(cfg.workers)
    try:
        while True:
            wave = []
            for _ in range(cfg.workers):
                count = min(cfg.batch_size, cfg.max_trials - next_start)
                if count <= 0:
                    break
                wave.append((code_key, code.hx, code.hz, dcfg, eps, cfg.rng_seed, next_start, count))
                next_start += count
            if not wave:
                break
            results = pool.map(_run_chunk, wave) if pool is not None else map(_run_chunk, wave)
            stop = False
            for chunk in results:
                for x_fail, z_fail in chunk:
                    if stop:
                        break
                    trials += 1
                    fx += x_fail
                    fz += z_fail
                    failures += x_fail or z_fail
                    if trials >= cfg.min_samples and failures >= cfg.min_failures:
                        stop = True
            if progress is not None:
                progress({"event": "progress", "eps": eps, "trials": trials, "failures": failures})
            if stop:
                break
    finally:
        if own_pool:
            pool.shutdown()
    censored = not (trials >= cfg.min_samples and failures >= cfg.min_failures)
    lo, hi = wilson_interval(failures, trials)
    return LerPoint(eps, trials, failures, lo, hi, censored, fx, fz)


def run_curve(
    code: CssCode,
    cfg: SimConfig,
    dcfg: DecoderConfig,
    progress: Callable[[dict], None] | None = None,
) -> list[LerPoint]:
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        return [run_point(code, e, cfg, dcfg, progress, pool) for e in cfg.eps]
    finally:
        if pool is not None:
            pool.shutdown()


def points_to_csv(points: Sequence[LerPoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for p in points:
        w.writerow(p.csv_row())
    return buf.getvalue()


def points_from_csv(text: str) -> list[LerPoint]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_COLUMNS:
        raise ValueError(f"CSV header must be {','.join(CSV_COLUMNS)}")
    out = []
    for r in rows[1:]:
        if len(r) != len(CSV_COLUMNS):
            raise ValueError(f"malformed CSV row: {r}")
        out.append(LerPoint(float(r[0]), int(r[1]), int(r[2]), float(r[4]), float(r[5]), bool(int(r[6]))))
    return out


def config_echo(cfg: SimConfig, dcfg: DecoderConfig) -> dict:
    sim = asdict(cfg)
    sim.pop("workers")
    sim.pop("batch_size")
    sim["eps"] = list(sim["eps"])
    return {"simulation": sim, "decoder": asdict(dcfg)}
