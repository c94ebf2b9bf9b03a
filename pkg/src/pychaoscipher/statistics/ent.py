from __future__ import annotations
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from typing import Any

    from .._typing import BytesLike

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import erfc
from scipy.stats import chi2

MONTE_CARLO_GROUP = 6


def _as_array(data: BytesLike, min_length: int = 1) -> np.ndarray:
    array = np.frombuffer(bytes(data), dtype=np.uint8)
    if len(array) < min_length:
        raise ValueError(f"At least {min_length} byte(s) required (got {len(array)})")
    return array


def byte_counts(data: BytesLike) -> np.ndarray:
    return np.bincount(_as_array(data, 0), minlength=256)


def ent_entropy(data: BytesLike) -> float:
    """Shannon entropy in bits per byte."""
    counts = byte_counts(_as_array(data))
    p = counts[counts > 0] / counts.sum()
    return float(max(0.0, -np.sum(p * np.log2(p))))


def ent_optimum_compression(entropy: float) -> float:
    """Optimum compression as the ratio entropy / 8."""
    if not 0 <= entropy <= 8:
        raise ValueError(f"Entropy must be in [0, 8] bits per byte (got {entropy})")
    return entropy / 8


def ent_chi_square(data: BytesLike) -> tuple[float, float]:
    """Chi-square of the byte distribution and the percentage of random streams exceeding it.

    Returns
    -------
    statistic : float
        Chi-square statistic over 256 bins.
    percentile : float
        ``100 * P(chi2_255 > statistic)``.
    """
    counts = byte_counts(_as_array(data))
    expected = counts.sum() / 256
    statistic = float(np.sum((counts - expected) ** 2) / expected)
    return statistic, 100.0 * float(chi2.sf(statistic, 255))


def ent_mean(data: BytesLike) -> float:
    return float(_as_array(data).mean())


def ent_monte_carlo_pi(data: BytesLike) -> tuple[float, float]:
    """Monte Carlo estimate of pi from 6-byte groups.

    The first three bytes of a group are the x coordinate and the last three
    the y coordinate (24-bit big-endian, scaled to [0, 1)). A point is a hit
    when strictly inside the unit circle. Trailing bytes are ignored.

    Returns
    -------
    pi_estimate : float
    error_percent : float
        ``100 * |pi_estimate - pi| / pi``.
    """
    array = _as_array(data, MONTE_CARLO_GROUP)
    n_points = len(array) // MONTE_CARLO_GROUP
    groups = array[: n_points * MONTE_CARLO_GROUP].reshape(n_points, MONTE_CARLO_GROUP).astype(np.int64)

    scale = float(1 << 24)
    x = ((groups[:, 0] << 16) | (groups[:, 1] << 8) | groups[:, 2]) / scale
    y = ((groups[:, 3] << 16) | (groups[:, 4] << 8) | groups[:, 5]) / scale
    hits = int(np.count_nonzero(x * x + y * y < 1.0))

    pi_estimate = 4.0 * hits / n_points
    return pi_estimate, 100.0 * abs(pi_estimate - math.pi) / math.pi


def ent_serial_correlation(data: BytesLike) -> float:
    """Lag-1 correlation of adjacent byte values, without wraparound.

    Returns 0 with a warning when the values have no variance.
    """
    return autocorrelation(data, lag=1)


def autocorrelation(data: BytesLike, lag: int = 1) -> float:
    """Pearson correlation between byte values ``lag`` positions apart."""
    if lag < 1:
        raise ValueError(f"Lag must be at least 1 (got {lag})")

    array = _as_array(data, lag + 1).astype(np.float64)
    a, b = array[:-lag], array[lag:]
    a = a - a.mean()
    b = b - b.mean()

    denominator = math.sqrt(float(np.sum(a * a)) * float(np.sum(b * b)))
    if denominator == 0:
        warnings.warn("Serial correlation undefined for constant data, reporting 0", RuntimeWarning)
        return 0.0

    return float(np.clip(np.sum(a * b) / denominator, -1.0, 1.0))


def basic_chi_square(data: BytesLike, n_bins: int = 256) -> tuple[float, float]:
    """Chi-square uniformity test of byte values over ``n_bins`` equal-width bins.

    Returns
    -------
    statistic : float
    p_value : float
        Probability of a larger statistic for uniform data (``n_bins - 1`` degrees of freedom).
    """
    if not 2 <= n_bins <= 256 or 256 % n_bins:
        raise ValueError(f"Number of bins must divide 256 and be at least 2 (got {n_bins})")

    array = _as_array(data)
    counts = np.bincount(array // (256 // n_bins), minlength=n_bins)
    expected = len(array) / n_bins
    statistic = float(np.sum((counts - expected) ** 2) / expected)
    return statistic, float(chi2.sf(statistic, n_bins - 1))


@dataclass(frozen=True)
class EntReport:
    """The six ENT metrics of a byte stream."""

    entropy_bits_per_byte: float
    optimum_compression: float
    chi_square_stat: float
    chi_square_percentile: float
    arithmetic_mean: float
    monte_carlo_pi: float
    pi_error_percent: float
    serial_correlation: float
    n_bytes: int

    @classmethod
    def from_data(cls, data: BytesLike) -> EntReport:
        entropy = ent_entropy(data)
        statistic, percentile = ent_chi_square(data)
        pi_estimate, pi_error = ent_monte_carlo_pi(data)

        return cls(
            entropy_bits_per_byte=entropy,
            optimum_compression=ent_optimum_compression(entropy),
            chi_square_stat=statistic,
            chi_square_percentile=percentile,
            arithmetic_mean=ent_mean(data),
            monte_carlo_pi=pi_estimate,
            pi_error_percent=pi_error,
            serial_correlation=ent_serial_correlation(data),
            n_bytes=len(data),
        )

    def p_values(self) -> dict[str, float]:
        """Two-sided significance of every metric under uniform random bytes.

        Entropy and compression use the G-test, whose statistic
        ``2 N ln2 (8 - H)`` follows a chi-square with 255 degrees of freedom.
        """
        n = self.n_bytes
        g_statistic = 2 * n * math.log(2) * (8 - self.entropy_bits_per_byte)
        p_entropy = float(chi2.sf(g_statistic, 255))

        p_chi = self.chi_square_percentile / 100
        p_chi_two_sided = min(1.0, 2 * min(p_chi, 1 - p_chi))

        byte_std = math.sqrt((256**2 - 1) / 12)
        p_mean = float(erfc(abs(self.arithmetic_mean - 127.5) * math.sqrt(n) / byte_std / math.sqrt(2)))

        n_points = n // MONTE_CARLO_GROUP
        hits = self.monte_carlo_pi * n_points / 4
        p_hit = math.pi / 4
        z_pi = abs(hits - n_points * p_hit) / math.sqrt(n_points * p_hit * (1 - p_hit))
        p_pi = float(erfc(z_pi / math.sqrt(2)))

        p_serial = float(erfc(abs(self.serial_correlation) * math.sqrt(n - 1) / math.sqrt(2)))

        return {
            "entropy": p_entropy,
            "optimum_compression": p_entropy,
            "chi_square": p_chi_two_sided,
            "arithmetic_mean": p_mean,
            "monte_carlo_pi": p_pi,
            "serial_correlation": p_serial,
        }

    def verdicts(self, alpha: float = 0.01) -> dict[str, bool]:
        return {name: p >= alpha for name, p in self.p_values().items()}

    def passed(self, alpha: float = 0.01) -> bool:
        return all(self.verdicts(alpha).values())

    def rows(self) -> list[tuple[str, str, str]]:
        """(test, expected condition, result) rows."""
        return [
            ("Entropy", "≈ 8 bits/byte", f"{self.entropy_bits_per_byte:.4f}"),
            ("Optimum Compression", "≈ 1", f"{self.optimum_compression:.4f}"),
            (
                "Chi-Square",
                "10%-90%",
                f"{self.chi_square_stat:.2f} ({self.chi_square_percentile:.2f}%)",
            ),
            ("Arithmetic Mean", "≈ 127.5", f"{self.arithmetic_mean:.4f}"),
            (
                "Monte Carlo π",
                "≈ 3.1416",
                f"{self.monte_carlo_pi:.6f} (error {self.pi_error_percent:.2f}%)",
            ),
            ("Serial Correlation", "≈ 0", f"{self.serial_correlation:.6f}"),
        ]

    def to_dict(self, alpha: float = 0.01) -> dict[str, Any]:
        verdicts = list(self.verdicts(alpha).values())
        return {
            "metrics": asdict(self),
            "alpha": alpha,
            "pass": all(verdicts),
            "rows": [
                {"test": test, "condition": condition, "result": result, "pass": verdict}
                for (test, condition, result), verdict in zip(self.rows(), verdicts)
            ],
        }


def ent_report(data: BytesLike) -> EntReport:
    return EntReport.from_data(data)
