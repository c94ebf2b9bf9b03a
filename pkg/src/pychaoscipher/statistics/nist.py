"""
Statistical tests of NIST SP 800-22 Rev 1a.

Every test takes a :class:`BitSequence` and returns a :class:`TestResult`
(``cumulative_sums`` returns a forward/backward pair). Tests whose
applicability conditions are not met raise :class:`NotApplicableError`;
:func:`run_battery` turns those into non-applicable results.
"""
from __future__ import annotations
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Callable

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache

import numpy as np
from scipy.special import erfc, gammaincc, gammaln
from scipy.stats import chi2, norm

from ..exceptions import NotApplicableError
from .bits import BitSequence
from .report import TestResult
from .templates import (
    aperiodic_templates,
    count_non_overlapping,
    template_count_distribution,
    window_values,
)

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 0.01

# Longest run of ones: (min n, block length M, category bounds (v_min, v_max), probabilities)
_LONGEST_RUN_TIERS = (
    (750000, 10000, (10, 16), (0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727)),
    (6272, 128, (4, 9), (0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124)),
    (128, 8, (1, 4), (0.2148, 0.3672, 0.2305, 0.1875)),
)

RANK_MIN_MATRICES = 38

# Overlapping template probabilities for m=9, M=1032, K=5
_OVERLAPPING_PI = (0.364091, 0.185659, 0.139381, 0.100571, 0.0704323, 0.139865)
OVERLAPPING_RECOMMENDED_N = 10**6

# Maurer's universal test, indexed by L
_UNIVERSAL_EXPECTED = (
    0.0, 0.7326495, 1.5374383, 2.4016068, 3.3112247, 4.2534266, 5.2177052,
    6.1962507, 7.1836656, 8.1764248, 9.1723243, 10.170032, 11.168765,
    12.168070, 13.167693, 14.167488, 15.167379,
)
_UNIVERSAL_VARIANCE = (
    0.0, 0.690, 1.338, 1.901, 2.358, 2.705, 2.954, 3.125, 3.238, 3.311,
    3.356, 3.384, 3.401, 3.410, 3.416, 3.419, 3.421,
)
_UNIVERSAL_STANDARD_TIERS = (
    (1059061760, 16), (496435200, 15), (231669760, 14), (107560960, 13),
    (49643520, 12), (22753280, 11), (10342400, 10), (4654080, 9),
    (2068480, 8), (904960, 7), (387840, 6),
)
# Standard-deviation factor c of the short tiers, L < 6, measured by simulation
# at the block counts the tiers produce. The closed form below underestimates
# them (0.300 instead of 0.488 for L=2).
_UNIVERSAL_EXTENDED_C = {2: 0.488, 3: 0.518, 4: 0.546, 5: 0.573}

_LINEAR_COMPLEXITY_PI = (0.010417, 0.03125, 0.125, 0.5, 0.25, 0.0625, 0.020833)
LINEAR_COMPLEXITY_RECOMMENDED_BLOCKS = 200

# Non-overlapping templates: exact null of the statistic when matches are rare
TEMPLATE_EXACT_MAX_MEAN = 4.0
TEMPLATE_EXACT_MAX_BLOCKS = 16

EXCURSION_STATES = (-4, -3, -2, -1, 1, 2, 3, 4)
EXCURSION_VARIANT_STATES = tuple(x for x in range(-9, 10) if x != 0)
EXCURSION_MIN_CYCLES = 500
EXCURSION_MIN_EXPECTED = 5.0


def _igamc(a: float, x: float) -> float:
    return float(gammaincc(a, x))


def _chi_square(observed: np.ndarray, expected: np.ndarray) -> float:
    return float(np.sum((observed - expected) ** 2 / expected))


def _bonferroni_min(p_values: list[float]) -> float:
    return min(1.0, len(p_values) * min(p_values))


def monobit(seq: BitSequence, alpha: float = DEFAULT_ALPHA) -> TestResult:
    """Frequency (monobit) test: balance of ones and zeros."""
    n = seq.n
    s = int(seq.as_pm1().sum())
    s_obs = abs(s) / math.sqrt(n)
    p = float(erfc(s_obs / math.sqrt(2)))

    ones = seq.ones
    return TestResult.from_p_values(
        "monobit", [p], s_obs, alpha,
        {
            "n": n,
            "sum": s,
            "categories": ["zeros", "ones"],
            "observed": [n - ones, ones],
            "expected": [n / 2, n / 2],
        },
    )


def block_frequency(seq: BitSequence, M: int = 128, alpha: float = DEFAULT_ALPHA) -> TestResult:
    """Frequency test within non-overlapping blocks of ``M`` bits."""
    if M < 2:
        raise ValueError(f"Block length must be at least 2 (got {M})")
    if M > seq.n:
        raise NotApplicableError(f"block length {M} exceeds sequence length {seq.n}")

    n_blocks = seq.n // M
    blocks = seq.bits[: n_blocks * M].reshape(n_blocks, M)
    proportions = blocks.mean(axis=1)

    statistic = 4.0 * M * float(np.sum((proportions - 0.5) ** 2))
    p = _igamc(n_blocks / 2, statistic / 2)

    return TestResult.from_p_values(
        "block_frequency", [p], statistic, alpha, {"M": M, "N": n_blocks}
    )


def runs(seq: BitSequence, alpha: float = DEFAULT_ALPHA) -> TestResult:
    """Runs test: total number of runs of identical bits."""
    n = seq.n
    pi = seq.ones / n
    tau = 2 / math.sqrt(n)

    if abs(pi - 0.5) >= tau or pi in (0.0, 1.0):
        raise NotApplicableError(
            f"frequency prerequisite failed (|pi - 1/2| = {abs(pi - 0.5):.6f}, tau = {tau:.6f})"
        )

    v_obs = 1 + int(np.count_nonzero(seq.bits[1:] != seq.bits[:-1]))
    p = float(erfc(
        abs(v_obs - 2 * n * pi * (1 - pi)) / (2 * math.sqrt(2 * n) * pi * (1 - pi))
    ))

    return TestResult.from_p_values("runs", [p], v_obs, alpha, {"pi": pi, "V_obs": v_obs})


def longest_runs_of_ones(blocks: np.ndarray) -> np.ndarray:
    """Longest run of ones in every row of a 2D 0/1 array."""
    current = np.zeros(blocks.shape[0], dtype=np.int64)
    longest = np.zeros(blocks.shape[0], dtype=np.int64)
    for column in blocks.T:
        current = (current + 1) * column
        np.maximum(longest, current, out=longest)
    return longest


def longest_run(seq: BitSequence, alpha: float = DEFAULT_ALPHA) -> TestResult:
    """Longest run of ones within blocks, block size chosen from ``n``."""
    n = seq.n
    for min_n, M, (v_min, v_max), pi in _LONGEST_RUN_TIERS:
        if n >= min_n:
            break
    else:
        raise NotApplicableError(f"at least 128 bits are required (got {n})")

    n_blocks = n // M
    blocks = seq.bits[: n_blocks * M].reshape(n_blocks, M)
    longest = np.clip(longest_runs_of_ones(blocks), v_min, v_max)

    observed = np.bincount(longest - v_min, minlength=v_max - v_min + 1)
    expected = n_blocks * np.asarray(pi)
    K = len(pi) - 1

    statistic = _chi_square(observed, expected)
    p = _igamc(K / 2, statistic / 2)

    return TestResult.from_p_values(
        "longest_run", [p], statistic, alpha,
        {
            "M": M,
            "N": n_blocks,
            "K": K,
            "categories": list(range(v_min, v_max + 1)),
            "observed": observed,
            "expected": expected,
        },
    )


def gf2_rank(rows: list[int], n_cols: int) -> int:
    """Rank over GF(2) of a matrix given as row bitmasks (MSB first)."""
    rows = list(rows)
    rank = 0
    for col in range(n_cols - 1, -1, -1):
        pivot = next((r for r in range(rank, len(rows)) if (rows[r] >> col) & 1), None)
        if pivot is None:
            continue

        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for r in range(len(rows)):
            if r != rank and (rows[r] >> col) & 1:
                rows[r] ^= rows[rank]
        rank += 1

    return rank


def binary_matrix_rank(matrix: np.ndarray) -> int:
    """Rank over GF(2) of a 2D 0/1 array."""
    matrix = np.asarray(matrix, dtype=np.uint8)
    n_cols = matrix.shape[1]
    rows = [int("".join(map(str, row)), 2) if n_cols else 0 for row in matrix]
    return gf2_rank(rows, n_cols)


def rank_probability(r: int, M: int = 32, Q: int = 32) -> float:
    """Probability that a random M x Q binary matrix has rank ``r``."""
    log_p = (r * (Q + M - r) - M * Q) * math.log(2)
    for i in range(r):
        log_p += math.log((1 - 2.0 ** (i - Q)) * (1 - 2.0 ** (i - M)) / (1 - 2.0 ** (i - r)))
    return math.exp(log_p)


def rank(
    seq: BitSequence, min_matrices: int = RANK_MIN_MATRICES, alpha: float = DEFAULT_ALPHA
) -> TestResult:
    """Binary matrix rank test over disjoint 32x32 matrices."""
    M = Q = 32
    n_matrices = seq.n // (M * Q)
    if n_matrices < max(min_matrices, 1):
        raise NotApplicableError(
            f"{n_matrices} matrices available, at least {max(min_matrices, 1)} required"
        )

    packed = np.packbits(seq.bits[: n_matrices * M * Q].reshape(n_matrices * M, Q), axis=1)
    row_values = packed.view(">u4").ravel().reshape(n_matrices, M)
    ranks = np.array([gf2_rank([int(v) for v in rows], Q) for rows in row_values])

    p_full = rank_probability(32)
    p_minus_one = rank_probability(31)
    probabilities = np.array([p_full, p_minus_one, 1 - p_full - p_minus_one])

    observed = np.array([
        np.count_nonzero(ranks == 32),
        np.count_nonzero(ranks == 31),
        np.count_nonzero(ranks <= 30),
    ])
    expected = n_matrices * probabilities

    statistic = _chi_square(observed, expected)
    p = float(chi2.sf(statistic, 2))

    return TestResult.from_p_values(
        "rank", [p], statistic, alpha,
        {
            "N": n_matrices,
            "reduced_power": n_matrices < RANK_MIN_MATRICES,
            "categories": ["32", "31", "<=30"],
            "observed": observed,
            "expected": expected,
        },
    )


def dft(seq: BitSequence, alpha: float = DEFAULT_ALPHA) -> TestResult:
    """Discrete Fourier transform (spectral) test."""
    n = seq.n - seq.n % 2
    if n < 2:
        raise NotApplicableError("at least 2 bits are required")

    x = seq.as_pm1()[:n].astype(np.float64)
    modulus = np.abs(np.fft.fft(x)[: n // 2])

    threshold = math.sqrt(math.log(1 / 0.05) * n)
    n0 = 0.95 * n / 2
    n1 = int(np.count_nonzero(modulus < threshold))

    d = (n1 - n0) / math.sqrt(n * 0.95 * 0.05 / 4)
    p = float(erfc(abs(d) / math.sqrt(2)))

    return TestResult.from_p_values(
        "dft", [p], d, alpha,
        {
            "n": n,
            "threshold": threshold,
            "categories": ["below threshold", "above threshold"],
            "observed": [n1, n // 2 - n1],
            "expected": [n0, n / 2 - n0],
        },
    )


def _template_moments(m: int, M: int) -> tuple[float, float]:
    mu = (M - m + 1) / 2**m
    sigma2 = M * (1 / 2**m - (2 * m - 1) / 2 ** (2 * m))
    return mu, sigma2


@lru_cache(maxsize=16)
def template_statistic_null(m: int, M: int, n_blocks: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact null of the non-overlapping template statistic.

    The statistic only depends on the sums of the block counts and of their
    squares, whose joint distribution is built one block at a time from
    :func:`template_count_distribution`.

    Returns
    -------
    tuple[np.ndarray, np.ndarray]
        Attainable statistic values in ascending order and the probability
        that the statistic is at least each of them.
    """
    pmf = template_count_distribution(m, M)
    K = len(pmf) - 1

    # joint[s1, s2]: probability that the counts sum to s1 and their squares to s2
    joint = np.zeros((n_blocks * K + 1, n_blocks * K * K + 1))
    joint[0, 0] = 1.0
    for block in range(n_blocks):
        s1_max, s2_max = block * K, block * K * K
        previous = joint[: s1_max + 1, : s2_max + 1].copy()
        joint[:] = 0.0
        for k, p in enumerate(pmf):
            joint[k: k + s1_max + 1, k * k: k * k + s2_max + 1] += p * previous

    s1, s2 = np.nonzero(joint)
    probabilities = joint[s1, s2]
    mu, sigma2 = _template_moments(m, M)
    statistics = (s2 - 2 * mu * s1 + n_blocks * mu * mu) / sigma2

    order = np.argsort(statistics, kind="stable")
    tail = np.cumsum(probabilities[order][::-1])[::-1]
    return statistics[order], np.minimum(tail, 1.0)


def _exact_template_p_value(statistic: float, null: tuple[np.ndarray, np.ndarray]) -> float:
    values, tail = null
    index = int(np.searchsorted(values, statistic - 1e-9))
    return float(tail[index]) if index < len(tail) else 0.0


def non_overlapping_template(
    seq: BitSequence,
    m: int = 9,
    n_blocks: int = 8,
    alpha: float = DEFAULT_ALPHA,
    exact_null: bool | None = None,
) -> TestResult:
    """Non-overlapping template matching over every aperiodic template of length ``m``.

    The row p-value is the smallest template p-value multiplied by the number
    of templates (capped at 1). Every template p-value is kept in ``params``.

    When the expected count per block is at most ``TEMPLATE_EXACT_MAX_MEAN``
    (and there are at most ``TEMPLATE_EXACT_MAX_BLOCKS`` blocks), template
    p-values come from the exact null distribution of the statistic instead
    of the chi-square approximation. ``exact_null`` forces one or the other;
    the choice is recorded in ``params``.
    """
    M = seq.n // n_blocks
    if M < m:
        raise NotApplicableError(f"blocks of {M} bits are shorter than the template length {m}")

    mu, sigma2 = _template_moments(m, M)
    blocks = seq.bits[: n_blocks * M].reshape(n_blocks, M)

    if exact_null is None:
        exact = mu <= TEMPLATE_EXACT_MAX_MEAN and n_blocks <= TEMPLATE_EXACT_MAX_BLOCKS
    else:
        exact = exact_null
    null = template_statistic_null(m, M, n_blocks) if exact else None

    p_by_template = {}
    statistics = {}
    for template in aperiodic_templates(m):
        counts = np.array([count_non_overlapping(block, template) for block in blocks])
        statistic = float(np.sum((counts - mu) ** 2) / sigma2)
        statistics[template] = statistic
        if exact:
            p_by_template[template] = _exact_template_p_value(statistic, null)
        else:
            p_by_template[template] = _igamc(n_blocks / 2, statistic / 2)

    p_values = list(p_by_template.values())
    worst = min(p_by_template, key=p_by_template.get)

    return TestResult.from_p_values(
        "non_overlapping_template", [_bonferroni_min(p_values)], statistics[worst], alpha,
        {
            "m": m,
            "N": n_blocks,
            "M": M,
            "exact_null": exact,
            "n_templates": len(p_values),
            "min_p_value": p_by_template[worst],
            "worst_template": worst,
            "p_values_by_template": p_by_template,
        },
    )


def _overlapping_probabilities(m: int, M: int, K: int) -> np.ndarray:
    if (m, M, K) == (9, 1032, 5):
        return np.asarray(_OVERLAPPING_PI)

    eta = (M - m + 1) / 2**m / 2
    pi = []
    for u in range(K):
        if u == 0:
            pi.append(math.exp(-eta))
        else:
            pi.append(sum(
                math.exp(
                    -eta - u * math.log(2) + ell * math.log(eta)
                    - gammaln(ell + 1) + gammaln(u) - gammaln(ell) - gammaln(u - ell + 1)
                )
                for ell in range(1, u + 1)
            ))
    pi.append(1 - sum(pi))
    return np.asarray(pi)


def overlapping_template(
    seq: BitSequence, m: int = 9, M: int = 1032, K: int = 5, alpha: float = DEFAULT_ALPHA
) -> TestResult:
    """Overlapping matching of the all-ones template of length ``m``."""
    n_blocks = seq.n // M
    if n_blocks == 0:
        raise NotApplicableError(f"at least one block of {M} bits is required")

    blocks = seq.bits[: n_blocks * M].reshape(n_blocks, M)
    target = 2**m - 1
    counts = np.array([np.count_nonzero(window_values(block, m) == target) for block in blocks])

    observed = np.bincount(np.minimum(counts, K), minlength=K + 1)
    expected = n_blocks * _overlapping_probabilities(m, M, K)

    statistic = _chi_square(observed, expected)
    p = _igamc(K / 2, statistic / 2)

    return TestResult.from_p_values(
        "overlapping_template", [p], statistic, alpha,
        {
            "m": m,
            "M": M,
            "N": n_blocks,
            "reduced_power": seq.n < OVERLAPPING_RECOMMENDED_N,
            "categories": [str(i) for i in range(K)] + [f">={K}"],
            "observed": observed,
            "expected": expected,
        },
    )


def universal_block_length(n: int, extended: bool = True) -> int:
    """Block length ``L`` for Maurer's test.

    Uses the standard table from ``n = 387840`` on. With ``extended``,
    smaller sequences use the largest ``L`` in 3..5 with at least
    ``1000 * 2**L`` test blocks, then ``L = 2`` down to 880 bits.
    """
    for min_n, L in _UNIVERSAL_STANDARD_TIERS:
        if n >= min_n:
            return L

    if extended:
        for L in (5, 4, 3):
            if n >= 1010 * 2**L * L:
                return L
        if n >= (10 * 2**2 + 100 * 2**2) * 2:
            return 2

    raise NotApplicableError(f"sequence of {n} bits is too short for the universal test")


def universal(seq: BitSequence, extended: bool = True, alpha: float = DEFAULT_ALPHA) -> TestResult:
    """Maurer's universal statistical test (compressibility)."""
    L = universal_block_length(seq.n, extended)
    Q = 10 * 2**L
    K = seq.n // L - Q

    blocks = window_values(seq.bits[: (Q + K) * L], L)[::L]

    last_seen = np.zeros(2**L, dtype=np.int64)
    for i, value in enumerate(blocks[:Q], start=1):
        last_seen[value] = i

    total = 0.0
    for i, value in enumerate(blocks[Q:], start=Q + 1):
        total += math.log2(i - last_seen[value])
        last_seen[value] = i

    fn = total / K
    if L in _UNIVERSAL_EXTENDED_C:
        c = _UNIVERSAL_EXTENDED_C[L]
    else:
        c = 0.7 - 0.8 / L + (4 + 32 / L) * K ** (-3 / L) / 15
    sigma = c * math.sqrt(_UNIVERSAL_VARIANCE[L] / K)
    p = float(erfc(abs(fn - _UNIVERSAL_EXPECTED[L]) / (math.sqrt(2) * sigma)))

    return TestResult.from_p_values(
        "universal", [p], fn, alpha,
        {
            "L": L,
            "Q": Q,
            "K": K,
            "expected_value": _UNIVERSAL_EXPECTED[L],
            "sigma": sigma,
            "extended_tier": L < 6,
        },
    )


def berlekamp_massey(s: int, length: int) -> int:
    """Length of the shortest LFSR generating a bit sequence.

    The sequence is given as ``s = sum(2**i * s_i)``. Products of the
    sequence with both connection polynomials are updated incrementally with
    integer operations.
    """
    if length < 0:
        raise ValueError("Bit sequence cannot have negative length")

    sb, sc = s, s
    degree = 0
    shift = 0
    for n in range(length):
        discrepancy = sc & (1 << shift)
        shift += 1
        if discrepancy:
            sc >>= shift
            shift = 0
            if 2 * degree <= n:
                sb, sc = sc, sb
                degree = n + 1 - degree
            sc ^= sb

    return degree


def linear_complexity_of(bits: np.ndarray) -> int:
    s = int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")
    return berlekamp_massey(s, len(bits))


def linear_complexity(seq: BitSequence, M: int = 500, alpha: float = DEFAULT_ALPHA) -> TestResult:
    """Linear complexity test, Berlekamp-Massey over blocks of ``M`` bits."""
    n_blocks = seq.n // M
    if n_blocks == 0:
        raise NotApplicableError(f"at least {M} bits are required (got {seq.n})")

    blocks = seq.bits[: n_blocks * M].reshape(n_blocks, M)
    complexities = np.array([linear_complexity_of(block) for block in blocks])

    sign = -1.0 if M % 2 else 1.0
    mu = M / 2 + (9 - sign) / 36 - (M / 3 + 2 / 9) * math.ldexp(1.0, -M)
    t = sign * (complexities - mu) + 2 / 9

    edges = np.array([-2.5, -1.5, -0.5, 0.5, 1.5, 2.5])
    observed = np.bincount(np.searchsorted(edges, t, side="left"), minlength=7)
    expected = n_blocks * np.asarray(_LINEAR_COMPLEXITY_PI)

    statistic = _chi_square(observed, expected)
    p = _igamc(3.0, statistic / 2)

    return TestResult.from_p_values(
        "linear_complexity", [p], statistic, alpha,
        {
            "M": M,
            "N": n_blocks,
            "reduced_power": n_blocks < LINEAR_COMPLEXITY_RECOMMENDED_BLOCKS,
            "categories": ["<=-2.5", "-1.5", "-0.5", "0", "0.5", "1.5", ">2.5"],
            "observed": observed,
            "expected": expected,
        },
    )


def pattern_counts(bits: np.ndarray, m: int) -> np.ndarray:
    """Counts of every m-bit pattern over the ``n`` cyclic windows of the sequence."""
    if m <= 0:
        return np.array([len(bits)])
    extended = np.concatenate([bits, bits[: m - 1]])
    return np.bincount(window_values(extended, m), minlength=2**m)


def _psi_squared(bits: np.ndarray, m: int) -> float:
    if m <= 0:
        return 0.0
    n = len(bits)
    counts = pattern_counts(bits, m).astype(np.float64)
    return float(2**m / n * np.sum(counts**2) - n)


def serial(seq: BitSequence, m: int = 3, alpha: float = DEFAULT_ALPHA) -> TestResult:
    """Serial test: uniformity of overlapping m-bit patterns. Two p-values."""
    n = seq.n
    if m < 2 or 2**m > n:
        raise NotApplicableError(f"pattern length m={m} unusable for n={n}")

    psi_m = _psi_squared(seq.bits, m)
    psi_m1 = _psi_squared(seq.bits, m - 1)
    psi_m2 = _psi_squared(seq.bits, m - 2)

    delta1 = psi_m - psi_m1
    delta2 = psi_m - 2 * psi_m1 + psi_m2
    p1 = _igamc(2 ** (m - 2), delta1 / 2)
    p2 = _igamc(2 ** (m - 3), delta2 / 2)

    return TestResult.from_p_values(
        "serial", [p1, p2], delta1, alpha,
        {
            "m": m,
            "psi_squared": [psi_m, psi_m1, psi_m2],
            "delta_psi_squared": delta1,
            "delta2_psi_squared": delta2,
            "reduced_power": m >= int(math.log2(n)) - 2,
            "categories": [format(i, f"0{m}b") for i in range(2**m)],
            "observed": pattern_counts(seq.bits, m),
            "expected": [n / 2**m] * 2**m,
        },
    )


def _phi(bits: np.ndarray, m: int) -> float:
    if m <= 0:
        return 0.0
    counts = pattern_counts(bits, m)
    pi = counts[counts > 0] / len(bits)
    return float(np.sum(pi * np.log(pi)))


def approximate_entropy(seq: BitSequence, m: int = 2, alpha: float = DEFAULT_ALPHA) -> TestResult:
    """Approximate entropy test, frequencies of overlapping m and m+1 bit patterns."""
    n = seq.n
    if m < 1:
        raise ValueError(f"Pattern length must be at least 1 (got {m})")

    apen = _phi(seq.bits, m) - _phi(seq.bits, m + 1)
    statistic = 2 * n * (math.log(2) - apen)
    p = _igamc(2 ** (m - 1), statistic / 2)

    return TestResult.from_p_values(
        "approximate_entropy", [p], statistic, alpha,
        {
            "m": m,
            "ApEn": apen,
            "reduced_power": m >= int(math.log2(n)) - 5,
        },
    )


def _cusum_p_value(z: int, n: int) -> float:
    sqrt_n = math.sqrt(n)

    k1 = np.arange(int((-n / z + 1) / 4), int((n / z - 1) / 4) + 1)
    sum1 = np.sum(norm.cdf((4 * k1 + 1) * z / sqrt_n) - norm.cdf((4 * k1 - 1) * z / sqrt_n))

    k2 = np.arange(int((-n / z - 3) / 4), int((n / z - 1) / 4) + 1)
    sum2 = np.sum(norm.cdf((4 * k2 + 3) * z / sqrt_n) - norm.cdf((4 * k2 + 1) * z / sqrt_n))

    return float(1.0 - sum1 + sum2)


def _cusum(seq: BitSequence, name: str, alpha: float) -> TestResult:
    z = int(np.max(np.abs(np.cumsum(seq.as_pm1()))))
    p = _cusum_p_value(z, seq.n)
    return TestResult.from_p_values(name, [p], z, alpha, {"z": z})


def cumulative_sums(seq: BitSequence, alpha: float = DEFAULT_ALPHA) -> tuple[TestResult, TestResult]:
    """Cumulative sums test, forward and backward walks."""
    forward = _cusum(seq, "cumulative_sums_forward", alpha)
    backward = _cusum(seq.reversed(), "cumulative_sums_backward", alpha)
    return forward, backward


def random_walk_cycles(seq: BitSequence) -> tuple[np.ndarray, np.ndarray, int]:
    """Partial sums of the +/-1 walk, cycle index of every step and number of cycles.

    Cycles are the excursions between consecutive zeros of the walk, the walk
    being padded with a zero at both ends.
    """
    walk = np.cumsum(seq.as_pm1())
    padded = np.concatenate([[0], walk, [0]])
    zeros = padded == 0
    n_cycles = int(np.count_nonzero(zeros)) - 1

    # cycle of a step: zeros strictly before it in the padded walk, minus one
    cycle_of_step = np.cumsum(zeros)[: len(walk)] - 1
    return walk, cycle_of_step, n_cycles


def _excursion_probabilities(x: int) -> np.ndarray:
    a = 1 - 1 / (2 * abs(x))
    pi = [a]
    for k in range(1, 5):
        pi.append(1 / (4 * x * x) * a ** (k - 1))
    pi.append(1 / (2 * abs(x)) * a**4)
    return np.asarray(pi)


def pool_categories(
    observed: np.ndarray, expected: np.ndarray, min_expected: float
) -> tuple[np.ndarray, np.ndarray]:
    """Merges adjacent categories, from the last one down, until each bin expects ``min_expected``.

    A remainder below ``min_expected`` is merged into the last bin closed.
    """
    bins_observed, bins_expected = [], []
    acc_observed, acc_expected = 0.0, 0.0
    for o, e in zip(observed[::-1], expected[::-1]):
        acc_observed += o
        acc_expected += e
        if acc_expected >= min_expected:
            bins_observed.append(acc_observed)
            bins_expected.append(acc_expected)
            acc_observed, acc_expected = 0.0, 0.0

    if acc_expected > 0:
        if bins_expected:
            bins_observed[-1] += acc_observed
            bins_expected[-1] += acc_expected
        else:
            bins_observed.append(acc_observed)
            bins_expected.append(acc_expected)

    return np.asarray(bins_observed[::-1]), np.asarray(bins_expected[::-1])


def _check_cycles(name: str, n_cycles: int, min_cycles: int) -> bool:
    if n_cycles < 1:
        raise NotApplicableError("the random walk has no cycle")

    applicable = n_cycles >= min_cycles
    if not applicable:
        warnings.warn(
            f"{name}: only {n_cycles} cycles (at least {min_cycles} required), "
            f"p-values are reported for information only",
            RuntimeWarning,
        )
    return applicable


def random_excursions(
    seq: BitSequence,
    min_cycles: int = EXCURSION_MIN_CYCLES,
    alpha: float = DEFAULT_ALPHA,
    min_expected: float = EXCURSION_MIN_EXPECTED,
) -> TestResult:
    """Random excursions test, visits per cycle to the states -4..-1, 1..4.

    Below ``min_cycles`` cycles the result is marked non-applicable but its
    p-values are still computed. The row p-value is the smallest state
    p-value multiplied by the number of states (capped at 1).

    The six visit categories of a state are pooled with
    :func:`pool_categories` so that every bin expects at least
    ``min_expected`` cycles, the chi-square having one degree of freedom less
    than the number of bins. A state left with a single bin has p-value 1.
    With the default ``min_expected`` no pooling happens from 500 cycles on;
    ``min_expected=0`` always keeps the six categories.
    """
    walk, cycle_of_step, n_cycles = random_walk_cycles(seq)
    applicable = _check_cycles("random_excursions", n_cycles, min_cycles)

    p_by_state = {}
    statistics = {}
    observed_by_state = {}
    bins_by_state = {}
    for x in EXCURSION_STATES:
        visits = np.bincount(cycle_of_step[walk == x], minlength=n_cycles)[:n_cycles]
        observed = np.bincount(np.minimum(visits, 5), minlength=6)
        expected = n_cycles * _excursion_probabilities(x)

        binned_observed, binned_expected = pool_categories(observed, expected, min_expected)
        if len(binned_expected) < 2:
            statistic, p = 0.0, 1.0
        else:
            statistic = _chi_square(binned_observed, binned_expected)
            p = _igamc((len(binned_expected) - 1) / 2, statistic / 2)
        statistics[x] = statistic
        p_by_state[x] = p
        bins_by_state[x] = len(binned_expected)
        observed_by_state[x] = observed

    p_values = list(p_by_state.values())
    worst = min(p_by_state, key=p_by_state.get)

    return TestResult.from_p_values(
        "random_excursions", [_bonferroni_min(p_values)], statistics[worst], alpha,
        {
            "J": n_cycles,
            "low_cycle": n_cycles < EXCURSION_MIN_CYCLES,
            "reduced_power": n_cycles < EXCURSION_MIN_CYCLES,
            "min_p_value": p_by_state[worst],
            "worst_state": worst,
            "p_values_by_state": p_by_state,
            "visits_by_state": observed_by_state,
            "min_expected": min_expected,
            "bins_by_state": bins_by_state,
        },
        applicable=applicable,
    )


def random_excursions_variant(
    seq: BitSequence, min_cycles: int = EXCURSION_MIN_CYCLES, alpha: float = DEFAULT_ALPHA
) -> TestResult:
    """Random excursions variant test, total visits to the states -9..-1, 1..9."""
    walk, _, n_cycles = random_walk_cycles(seq)
    applicable = _check_cycles("random_excursions_variant", n_cycles, min_cycles)

    p_by_state = {}
    visits_by_state = {}
    for x in EXCURSION_VARIANT_STATES:
        xi = int(np.count_nonzero(walk == x))
        visits_by_state[x] = xi
        p_by_state[x] = float(erfc(abs(xi - n_cycles) / math.sqrt(2 * n_cycles * (4 * abs(x) - 2))))

    p_values = list(p_by_state.values())
    worst = min(p_by_state, key=p_by_state.get)

    return TestResult.from_p_values(
        "random_excursions_variant", [_bonferroni_min(p_values)], visits_by_state[worst], alpha,
        {
            "J": n_cycles,
            "low_cycle": n_cycles < EXCURSION_MIN_CYCLES,
            "reduced_power": n_cycles < EXCURSION_MIN_CYCLES,
            "min_p_value": p_by_state[worst],
            "worst_state": worst,
            "p_values_by_state": p_by_state,
            "visits_by_state": visits_by_state,
        },
        applicable=applicable,
    )


BATTERY_ORDER = (
    "monobit",
    "block_frequency",
    "cumulative_sums_forward",
    "cumulative_sums_backward",
    "dft",
    "approximate_entropy",
    "linear_complexity",
    "longest_run",
    "non_overlapping_template",
    "overlapping_template",
    "random_excursions",
    "random_excursions_variant",
    "rank",
    "runs",
    "serial",
    "universal",
)


def _battery_jobs(alpha: float, strict: bool) -> list[tuple[tuple[str, ...], Callable]]:
    min_matrices = RANK_MIN_MATRICES if strict else 1
    min_cycles = EXCURSION_MIN_CYCLES if strict else 1

    return [
        (("monobit",), lambda s: monobit(s, alpha=alpha)),
        (("block_frequency",), lambda s: block_frequency(s, alpha=alpha)),
        (
            ("cumulative_sums_forward", "cumulative_sums_backward"),
            lambda s: cumulative_sums(s, alpha=alpha),
        ),
        (("dft",), lambda s: dft(s, alpha=alpha)),
        (("approximate_entropy",), lambda s: approximate_entropy(s, alpha=alpha)),
        (("linear_complexity",), lambda s: linear_complexity(s, alpha=alpha)),
        (("longest_run",), lambda s: longest_run(s, alpha=alpha)),
        (("non_overlapping_template",), lambda s: non_overlapping_template(s, alpha=alpha)),
        (("overlapping_template",), lambda s: overlapping_template(s, alpha=alpha)),
        (("random_excursions",), lambda s: random_excursions(s, min_cycles, alpha=alpha)),
        (
            ("random_excursions_variant",),
            lambda s: random_excursions_variant(s, min_cycles, alpha=alpha),
        ),
        (("rank",), lambda s: rank(s, min_matrices, alpha=alpha)),
        (("runs",), lambda s: runs(s, alpha=alpha)),
        (("serial",), lambda s: serial(s, 3, alpha=alpha)),
        (("universal",), lambda s: universal(s, extended=not strict, alpha=alpha)),
    ]


def _run_job(names: tuple[str, ...], func: Callable, seq: BitSequence) -> list[TestResult]:
    try:
        results = func(seq)
    except NotApplicableError as e:
        logger.debug("%s not applicable: %s", names[0], e)
        return [TestResult.not_applicable(name, str(e)) for name in names]

    return list(results) if isinstance(results, tuple) else [results]


def run_battery(
    seq: BitSequence, alpha: float = DEFAULT_ALPHA, n_jobs: int = 1, strict: bool = False
) -> list[TestResult]:
    """Runs the fifteen tests and returns the sixteen report rows in table order.

    Parameters
    ----------
    seq : BitSequence
        Sequence under test.
    alpha : float, default=0.01
        Significance level.
    n_jobs : int, default=1
        Number of worker threads. Results do not depend on it.
    strict : bool, default=False
        Enforce the standard's applicability gates (32x32 rank needs 38
        matrices, random excursions need 500 cycles, universal uses the
        standard table only). Otherwise the tests are computed whenever
        possible and flagged ``reduced_power``, which allows short sequences
        such as 6480 bits to be reported in full.

    Returns
    -------
    list[TestResult]
        Sixteen rows, cumulative sums contributing the forward and backward rows.
    """
    jobs = _battery_jobs(alpha, strict)
    logger.debug("Running %d tests on %d bits with %d worker(s)", len(jobs), seq.n, n_jobs)

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as executor:
            chunks = list(executor.map(lambda job: _run_job(*job, seq), jobs))
    else:
        chunks = [_run_job(names, func, seq) for names, func in jobs]

    results = [result for chunk in chunks for result in chunk]
    return sorted(results, key=lambda r: BATTERY_ORDER.index(r.name))
