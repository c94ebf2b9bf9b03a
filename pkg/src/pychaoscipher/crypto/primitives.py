from __future__ import annotations
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .._typing import BytesLike

import hashlib
import hmac
import os

from ..exceptions import EntropySourceError

HASH_LEN = 32
HKDF_MAX_LENGTH = 255 * HASH_LEN


def sha256(data: BytesLike) -> bytes:
    return hashlib.sha256(data).digest()


def hmac_sha256(key: BytesLike, data: BytesLike) -> bytes:
    """HMAC-SHA-256 (RFC 2104). Keys longer than the block size are hashed first."""
    return hmac.digest(bytes(key), bytes(data), hashlib.sha256)


def hkdf_extract(salt: BytesLike, ikm: BytesLike) -> bytes:
    if len(salt) == 0:
        salt = bytes(HASH_LEN)
    return hmac_sha256(salt, ikm)


def hkdf_expand(prk: BytesLike, info: BytesLike, length: int) -> bytes:
    if not 0 < length <= HKDF_MAX_LENGTH:
        raise ValueError(
            f"HKDF output length must be in [1, {HKDF_MAX_LENGTH}] (got {length})"
        )

    okm = b""
    block = b""
    counter = 1
    while len(okm) < length:
        block = hmac_sha256(prk, block + bytes(info) + bytes([counter]))
        okm += block
        counter += 1

    return okm[:length]


def hkdf_sha256(ikm: BytesLike, salt: BytesLike, info: BytesLike, length: int) -> bytes:
    """HKDF-SHA-256 extract-then-expand (RFC 5869).

    Parameters
    ----------
    ikm : bytes
        Input keying material.
    salt : bytes
        Salt, an empty salt is replaced by 32 zero bytes.
    info : bytes
        Context string bound into the output.
    length : int
        Output length, at most 255 * 32 bytes.

    Returns
    -------
    bytes
        Output keying material.

    Raises
    ------
    ValueError
        If ``length`` is out of range.
    """
    if not 0 < length <= HKDF_MAX_LENGTH:
        raise ValueError(
            f"HKDF output length must be in [1, {HKDF_MAX_LENGTH}] (got {length})"
        )
    return hkdf_expand(hkdf_extract(salt, ikm), info, length)


def ct_equal(a: BytesLike, b: BytesLike) -> bool:
    """Constant-time comparison, running time independent of where the inputs differ."""
    return hmac.compare_digest(bytes(a), bytes(b))


def secure_bytes(n: int) -> bytes:
    """Bytes from the operating system CSPRNG.

    Raises
    ------
    ValueError
        If ``n`` is negative.
    EntropySourceError
        If no OS entropy source is available.
    """
    if n < 0:
        raise ValueError(f"Number of bytes must be non-negative (got {n})")

    try:
        return os.urandom(n)
    except NotImplementedError as e:
        raise EntropySourceError("OS entropy source unavailable") from e
