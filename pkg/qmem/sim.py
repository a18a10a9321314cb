"""
Pauli-frame Monte Carlo of repeated wait and refresh cycles on a small CSS
code, with an exact enumeration oracle for a single cycle.

Error patterns are held as integers, bit ``j`` standing for qubit ``j``, and
syndromes likewise, bit ``i`` standing for check row ``i``. The X and Z
sectors are decoded independently by minimum-weight lookup; a Y error is an X
and a Z on the same qubit. After the last cycle one ideal round of
extraction and correction runs before the logical check. Faults in the
correction gates themselves are not drawn separately; syndrome noise is an
independent bit flip with probability `q` on every measured check.

Example:
    >>> from qmem.codes import steane_code
    >>> table = build_decoder_table(steane_code())
    >>> [int(table.x_correction[table.x_syndrome[1 << j]]) == 1 << j for j in range(7)]
    [True, True, True, True, True, True, True]
    >>> round(exact_logical_error(steane_code(), 0.01, 0.0), 9)
    0.001578207
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Tuple

import numpy as np

from qmem.codes import CssCode
from qmem.config import max_workers
from qmem.errors import CapacityError, DomainError
from qmem.gf2 import BinaryMatrix, row_reduce

logger = logging.getLogger(__name__)

#: largest code the lookup decoder tabulates
MAX_QUBITS = 10

#: largest number of checks per sector
MAX_SYNDROME_BITS = 16

#: limits of the exact oracle
MAX_EXACT_QUBITS = 7
MAX_EXACT_FLIP_BITS = 8

#: trials drawn from one random stream
BLOCK_SIZE = 1 << 16


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _popcount(values: np.ndarray, bits: int) -> np.ndarray:
    shifts = np.arange(bits, dtype=np.int64)
    return ((values[..., None] >> shifts) & 1).sum(axis=-1)


def _pack_bits(bits: np.ndarray) -> np.ndarray:
    weights = np.left_shift(np.int64(1), np.arange(bits.shape[-1], dtype=np.int64))
    return bits.astype(np.int64) @ weights


def _syndromes(checks: BinaryMatrix) -> np.ndarray:
    """Syndrome integer of every error pattern on ``checks.cols`` qubits."""
    n = checks.cols
    patterns = np.arange(1 << n, dtype=np.int64)
    bits = (patterns[:, None] >> np.arange(n, dtype=np.int64)) & 1
    syn_bits = (bits @ checks.to_dense().astype(np.int64).T) & 1
    return _pack_bits(syn_bits)


def _row_space(generators: BinaryMatrix) -> np.ndarray:
    """Integers of every vector in the row space of `generators`."""
    reduced, pivots = row_reduce(generators)
    span = np.zeros(1, dtype=np.int64)
    for i in range(len(pivots)):
        word = int(_pack_bits(reduced.row(i).astype(np.int64)))
        span = np.concatenate([span, span ^ word])
    return span


def _lookup(checks: BinaryMatrix, syndrome_of: np.ndarray) -> np.ndarray:
    n, r = checks.cols, checks.rows
    correction = np.full(1 << r, -1, dtype=np.int64)
    for weight in range(n + 1):
        for support in itertools.combinations(range(n), weight):
            pattern = sum(1 << j for j in support)
            s = syndrome_of[pattern]
            if correction[s] < 0:
                correction[s] = pattern
    reachable = np.flatnonzero(correction >= 0)
    missing = np.flatnonzero(correction < 0)
    if missing.size:
        logger.debug("%d of %d syndromes are unreachable", missing.size, correction.size)
        # nearest reachable syndrome; argmin keeps the smaller one on ties
        dist = _popcount(missing[:, None] ^ reachable[None, :], r)
        correction[missing] = correction[reachable[np.argmin(dist, axis=1)]]
    return correction


@dataclass(frozen=True, eq=False)
class DecoderTable:
    """
    Minimum-weight lookup decoder for both sectors of a CSS code.

    X errors are detected by the rows of ``h_z`` and are harmless when they
    lie in the row space of ``h_x``; Z errors the other way round.
    """

    n: int
    x_syndrome: np.ndarray
    x_correction: np.ndarray
    x_trivial: np.ndarray
    z_syndrome: np.ndarray
    z_correction: np.ndarray
    z_trivial: np.ndarray

    @property
    def x_bits(self) -> int:
        return int(self.x_correction.size).bit_length() - 1

    @property
    def z_bits(self) -> int:
        return int(self.z_correction.size).bit_length() - 1

    def decode_x(self, syndrome: int) -> int:
        return int(self.x_correction[syndrome])

    def decode_z(self, syndrome: int) -> int:
        return int(self.z_correction[syndrome])


def _sector(checks: BinaryMatrix, stabilizers: BinaryMatrix) -> Tuple[np.ndarray, ...]:
    syndrome_of = _syndromes(checks)
    trivial = np.zeros(1 << checks.cols, dtype=bool)
    trivial[_row_space(stabilizers)] = True
    return _frozen(syndrome_of), _frozen(_lookup(checks, syndrome_of)), _frozen(trivial)


def build_decoder_table(code: CssCode) -> DecoderTable:
    """
    Tabulate a minimum-weight correction for every syndrome of both sectors.

    Among patterns of least weight the first support in
    ``itertools.combinations`` order wins. Syndromes no error produces
    borrow the correction of the nearest reachable syndrome.

    Example:
        >>> from qmem.codes import builtin_code
        >>> table = build_decoder_table(builtin_code("hgp-rep2"))
        >>> singles = [int(table.x_syndrome[1 << j]) for j in range(5)]
        >>> len(set(singles)) < 5
        True
    """
    if code.n > MAX_QUBITS:
        raise CapacityError(f"lookup decoding needs n <= {MAX_QUBITS}, got n = {code.n}")
    for name, checks in (("h_x", code.h_x), ("h_z", code.h_z)):
        if checks.rows > MAX_SYNDROME_BITS:
            raise CapacityError(
                f"{name} has {checks.rows} rows, more than {MAX_SYNDROME_BITS} syndrome bits"
            )
    logger.debug("tabulating lookup decoder for %s", code.params)
    x_syn, x_corr, x_triv = _sector(code.h_z, code.h_x)
    z_syn, z_corr, z_triv = _sector(code.h_x, code.h_z)
    return DecoderTable(code.n, x_syn, x_corr, x_triv, z_syn, z_corr, z_triv)


def _check_probability(x: float, name: str) -> None:
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {x}")


@dataclass(frozen=True)
class SimConfig:
    code: CssCode
    p_tilde: float
    q: float = 0.0
    cycles: int = 1
    trials: int = 10_000
    seed: int = 0

    def __post_init__(self) -> None:
        _check_probability(self.p_tilde, "p_tilde")
        _check_probability(self.q, "q")
        if self.cycles < 1:
            raise DomainError(f"cycles must be at least 1, got {self.cycles}")
        if self.trials < 1:
            raise DomainError(f"trials must be at least 1, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


@dataclass(frozen=True)
class SimResult:
    logical_error_estimate: float
    confidence_halfwidth: float
    trials_run: int
    failures: int

    @classmethod
    def from_counts(cls, failures: int, trials: int) -> "SimResult":
        """
        Example:
            >>> round(SimResult.from_counts(25, 100).confidence_halfwidth, 6)
            0.129904
        """
        est = failures / trials
        return cls(est, 3.0 * math.sqrt(est * (1.0 - est) / trials), trials, failures)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "logical_error_estimate": self.logical_error_estimate,
            "confidence_halfwidth": self.confidence_halfwidth,
            "trials_run": self.trials_run,
            "failures": self.failures,
        }


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def _draw_flips(rng: np.random.Generator, size: int, bits: int, q: float) -> np.ndarray:
    if bits == 0:
        return np.zeros(size, dtype=np.int64)
    return _pack_bits(rng.random((size, bits)) < q)


def _run_block(table: DecoderTable, cfg: SimConfig, block: int, size: int) -> int:
    rng = _block_rng(cfg.seed, block)
    p = cfg.p_tilde
    frame_x = np.zeros(size, dtype=np.int64)
    frame_z = np.zeros(size, dtype=np.int64)
    for _ in range(cfg.cycles):
        u = rng.random((size, table.n))
        frame_x ^= _pack_bits(u < 2.0 * p / 3.0)
        frame_z ^= _pack_bits((u >= p / 3.0) & (u < p))
        sx = table.x_syndrome[frame_x] ^ _draw_flips(rng, size, table.x_bits, cfg.q)
        sz = table.z_syndrome[frame_z] ^ _draw_flips(rng, size, table.z_bits, cfg.q)
        frame_x ^= table.x_correction[sx]
        frame_z ^= table.z_correction[sz]
    frame_x ^= table.x_correction[table.x_syndrome[frame_x]]
    frame_z ^= table.z_correction[table.z_syndrome[frame_z]]
    failed = ~table.x_trivial[frame_x] | ~table.z_trivial[frame_z]
    return int(np.count_nonzero(failed))


def simulate(cfg: SimConfig) -> SimResult:
    """
    Estimate the probability that `cfg.cycles` noisy cycles end in a logical
    error.

    Trials are split into blocks of `BLOCK_SIZE`, each with its own
    counter-based stream keyed by ``(seed, block)``, so the estimate does not
    depend on how many threads run the blocks.

    Example:
        >>> from qmem.codes import steane_code
        >>> simulate(SimConfig(steane_code(), 0.0, trials=100)).logical_error_estimate
        0.0
    """
    table = build_decoder_table(cfg.code)
    sizes = [min(BLOCK_SIZE, cfg.trials - start) for start in range(0, cfg.trials, BLOCK_SIZE)]
    workers = min(max_workers(), len(sizes))
    logger.debug("running %d trials in %d blocks on %d threads", cfg.trials, len(sizes), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        counts: List[int] = list(
            pool.map(lambda job: _run_block(table, cfg, *job), enumerate(sizes))
        )
    result = SimResult.from_counts(sum(counts), cfg.trials)
    logger.info(
        "%s after %d cycles: %d failures in %d trials",
        cfg.code.params,
        cfg.cycles,
        result.failures,
        result.trials_run,
    )
    return result


def _flip_probabilities(bits: int, q: float) -> Tuple[np.ndarray, np.ndarray]:
    if q == 0.0:
        return np.zeros(1, dtype=np.int64), np.ones(1)
    flips = np.arange(1 << bits, dtype=np.int64)
    weight = _popcount(flips, bits)
    return flips, q**weight * (1.0 - q) ** (bits - weight)


def _sector_failure(
    syndrome_of: np.ndarray, correction: np.ndarray, trivial: np.ndarray, bits: int, q: float
) -> np.ndarray:
    """Failure probability of one sector for every error pattern."""
    patterns = np.arange(syndrome_of.size, dtype=np.int64)
    flips, weights = _flip_probabilities(bits, q)
    residual = patterns[:, None] ^ correction[syndrome_of[patterns][:, None] ^ flips[None, :]]
    residual ^= correction[syndrome_of[residual]]
    return (~trivial[residual]).astype(float) @ weights


def exact_logical_error(code: CssCode, p_tilde: float, q: float) -> float:
    """
    Single-cycle logical error probability, summed over every Pauli pattern
    and every syndrome flip pattern.

    Example:
        >>> from qmem.codes import steane_code
        >>> exact_logical_error(steane_code(), 0.0, 0.5)
        0.0
    """
    _check_probability(p_tilde, "p_tilde")
    _check_probability(q, "q")
    if code.n > MAX_EXACT_QUBITS:
        raise CapacityError(f"exact enumeration needs n <= {MAX_EXACT_QUBITS}, got n = {code.n}")
    if q > 0 and code.h_x.rows + code.h_z.rows > MAX_EXACT_FLIP_BITS:
        raise CapacityError(
            f"exact enumeration with q > 0 needs at most {MAX_EXACT_FLIP_BITS} syndrome bits, "
            f"got {code.h_x.rows + code.h_z.rows}"
        )
    table = build_decoder_table(code)
    fail_x = _sector_failure(
        table.x_syndrome, table.x_correction, table.x_trivial, table.x_bits, q
    )
    fail_z = _sector_failure(
        table.z_syndrome, table.z_correction, table.z_trivial, table.z_bits, q
    )
    patterns = np.arange(1 << code.n, dtype=np.int64)
    weight = _popcount(patterns[:, None] | patterns[None, :], code.n)
    prob = (p_tilde / 3.0) ** weight * (1.0 - p_tilde) ** (code.n - weight)
    either = fail_x[:, None] + fail_z[None, :] - fail_x[:, None] * fail_z[None, :]
    total = float(np.sum(prob * either))
    logger.debug("exact single-cycle error of %s: %r", code.params, total)
    return min(max(total, 0.0), 1.0)
