from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.signal import fftconvolve

COUNT_TAIL_CUTOFF = 1e-12


def is_aperiodic(template: str) -> bool:
    """True if no proper prefix of the template equals its suffix of the same length.

    Occurrences of such a template can never overlap.
    """
    m = len(template)
    return all(template[k:] != template[: m - k] for k in range(1, m))


@lru_cache(maxsize=None)
def aperiodic_templates(m: int) -> tuple[str, ...]:
    """All aperiodic templates of length ``m`` in ascending binary order.

    For ``m=9`` this is the standard set of 148 templates.
    """
    if not 2 <= m <= 21:
        raise ValueError(f"Template length must be in [2, 21] (got {m})")

    words = (format(value, f"0{m}b") for value in range(2**m))
    return tuple(word for word in words if is_aperiodic(word))


def template_to_int(template: str) -> int:
    return int(template, 2)


def window_values(bits: np.ndarray, m: int) -> np.ndarray:
    """Integer value of every length-``m`` window, MSB first.

    ``window_values(bits, m)[i]`` encodes ``bits[i:i+m]``.
    """
    n_windows = len(bits) - m + 1
    if n_windows <= 0:
        return np.zeros(0, dtype=np.int64)

    values = np.zeros(n_windows, dtype=np.int64)
    for j in range(m):
        values = (values << 1) | bits[j: j + n_windows].astype(np.int64)
    return values


def count_non_overlapping(bits: np.ndarray, template: str) -> int:
    """Counts template matches, resuming the scan after each match."""
    m = len(template)
    target = template_to_int(template)
    matches = np.flatnonzero(window_values(bits, m) == target)

    count = 0
    next_allowed = 0
    for position in matches:
        if position >= next_allowed:
            count += 1
            next_allowed = position + m
    return count


def count_overlapping(bits: np.ndarray, template: str) -> int:
    """Counts template matches at every position."""
    return int(np.count_nonzero(window_values(bits, len(template)) == template_to_int(template)))


@lru_cache(maxsize=64)
def template_count_distribution(m: int, M: int) -> np.ndarray:
    """Distribution of the number of matches of an aperiodic template in ``M`` random bits.

    Entry ``k`` is the probability of exactly ``k`` matches. The distribution
    is the same for every aperiodic template of length ``m``: matches cannot
    overlap, so the gaps between them are independent and distributed as the
    position of the first match. Counts whose tail probability is below
    ``COUNT_TAIL_CUTOFF`` are lumped into the last entry.
    """
    if M < m:
        raise ValueError(f"Block length {M} is shorter than the template length {m}")

    # first[t]: first match ends at bit t (1-based)
    first = np.zeros(M + 1)
    cumulative = np.zeros(M + 1)
    for t in range(m, M + 1):
        first[t] = 2.0**-m * (1.0 - cumulative[t - m])
        cumulative[t] = cumulative[t - 1] + first[t]

    at_least = [1.0]
    kth = first
    for _ in range(1, M // m + 1):
        at_least.append(float(kth.sum()))
        if at_least[-1] < COUNT_TAIL_CUTOFF:
            break
        kth = np.clip(fftconvolve(kth, first)[: M + 1], 0.0, None)
    else:
        at_least.append(0.0)

    pmf = -np.diff(at_least)
    pmf[-1] = at_least[-2]
    return pmf
