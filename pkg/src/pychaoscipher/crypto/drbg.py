from __future__ import annotations
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .._typing import BytesLike

import logging

from .primitives import HASH_LEN, hmac_sha256

logger = logging.getLogger(__name__)

MAX_GENERATE_BYTES = 1 << 16


class DrbgState:
    """HMAC_DRBG state with SHA-256 (SP 800-90A).

    No reseed interval is enforced, keystreams are short-lived.

    Attributes
    ----------
    K : bytes
        32-byte key.
    V : bytes
        32-byte chaining value.
    reseed_counter : int
        Number of generate requests since the last (re)seed, plus one.

    Parameters
    ----------
    entropy : bytes
        Entropy input, must be non-empty.
    nonce : bytes
        Nonce.
    personalization : bytes
        Personalization string.
    """

    def __init__(self, entropy: BytesLike, nonce: BytesLike = b"", personalization: BytesLike = b""):
        if len(entropy) == 0:
            raise ValueError("DRBG entropy input must not be empty")

        self.K = bytes(HASH_LEN)
        self.V = b"\x01" * HASH_LEN
        self._update(bytes(entropy) + bytes(nonce) + bytes(personalization))
        self.reseed_counter = 1

    def _update(self, provided_data: bytes) -> None:
        self.K = hmac_sha256(self.K, self.V + b"\x00" + provided_data)
        self.V = hmac_sha256(self.K, self.V)
        if len(provided_data) != 0:
            self.K = hmac_sha256(self.K, self.V + b"\x01" + provided_data)
            self.V = hmac_sha256(self.K, self.V)

    def reseed(self, entropy: BytesLike, additional_input: BytesLike = b"") -> None:
        if len(entropy) == 0:
            raise ValueError("DRBG entropy input must not be empty")

        self._update(bytes(entropy) + bytes(additional_input))
        self.reseed_counter = 1
        logger.debug("DRBG reseeded")

    def generate(self, n: int, additional_input: BytesLike = b"") -> bytes:
        """Returns ``n`` pseudo-random bytes and advances the state.

        Raises
        ------
        ValueError
            If ``n`` is not in [1, 2**16].
        """
        if not 1 <= n <= MAX_GENERATE_BYTES:
            raise ValueError(
                f"DRBG request size must be in [1, {MAX_GENERATE_BYTES}] (got {n})"
            )

        additional_input = bytes(additional_input)
        if len(additional_input) != 0:
            self._update(additional_input)

        output = bytearray()
        while len(output) < n:
            self.V = hmac_sha256(self.K, self.V)
            output += self.V

        self._update(additional_input)
        self.reseed_counter += 1

        return bytes(output[:n])

    def copy(self) -> DrbgState:
        other = object.__new__(DrbgState)
        other.K = self.K
        other.V = self.V
        other.reseed_counter = self.reseed_counter
        return other

    def __str__(self) -> str:
        return "DrbgState(reseed_counter={})".format(self.reseed_counter)


def drbg_instantiate(entropy: BytesLike, nonce: BytesLike, personalization: BytesLike) -> DrbgState:
    return DrbgState(entropy, nonce, personalization)


def drbg_generate(state: DrbgState, n: int, additional_input: BytesLike = b"") -> bytes:
    return state.generate(n, additional_input)


def drbg_reseed(state: DrbgState, entropy: BytesLike, additional_input: BytesLike = b"") -> None:
    state.reseed(entropy, additional_input)
