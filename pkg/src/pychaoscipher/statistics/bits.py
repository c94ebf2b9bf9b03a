from __future__ import annotations
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Iterable

    from .._typing import BytesLike

import numpy as np


class BitSequence:
    """Sequence of bits under test.

    Bytes are unpacked most significant bit first.

    Attributes
    ----------
    bits : np.ndarray
        Array of 0/1 values (``uint8``).
    n : int
        Number of bits.

    Parameters
    ----------
    bits : array_like
        Sequence of 0/1 values.
    """

    def __init__(self, bits: Iterable[int] | np.ndarray):
        bits = np.asarray(bits, dtype=np.uint8).ravel()
        self._check_bits(bits)
        bits.flags.writeable = False
        self.bits = bits

    @staticmethod
    def _check_bits(bits: np.ndarray) -> None:
        if len(bits) == 0:
            raise ValueError("Bit sequence must contain at least one bit")
        if np.any(bits > 1):
            raise ValueError("Bit sequence must only contain 0 and 1 values")

    @classmethod
    def from_bytes(cls, data: BytesLike) -> BitSequence:
        return cls(np.unpackbits(np.frombuffer(bytes(data), dtype=np.uint8)))

    @classmethod
    def from_string(cls, s: str) -> BitSequence:
        """Builds a sequence from a string of ``0`` and ``1``, whitespace ignored."""
        s = "".join(s.split())
        if not set(s) <= {"0", "1"}:
            raise ValueError("Bit string must only contain '0' and '1' characters")
        return cls(np.frombuffer(s.encode("ascii"), dtype=np.uint8) - ord("0"))

    @property
    def n(self) -> int:
        return len(self.bits)

    @property
    def ones(self) -> int:
        return int(self.bits.sum())

    def as_pm1(self) -> np.ndarray:
        """The sequence mapped to -1/+1 values."""
        return 2 * self.bits.astype(np.int64) - 1

    def complement(self) -> BitSequence:
        return BitSequence(1 - self.bits)

    def reversed(self) -> BitSequence:
        return BitSequence(self.bits[::-1])

    def __len__(self) -> int:
        return self.n

    def __str__(self) -> str:
        return "BitSequence(n={})".format(self.n)
