from __future__ import annotations
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .._typing import BytesLike
    from .chaotic import ExtractionMode, ParameterDisc

from dataclasses import dataclass

import numpy as np

from ..exceptions import AuthenticationFailedError, MalformedMessageError
from . import chaotic
from .chaotic import WARM_UP
from .primitives import ct_equal, hkdf_sha256, hmac_sha256, secure_bytes

IV_SIZE = 16
TAG_SIZE = 32
SUBKEY_SIZE = 32
OVERHEAD = IV_SIZE + TAG_SIZE


@dataclass(frozen=True)
class KeyMaterial:
    """Subkeys split from a master key with HKDF-SHA-256.

    ``stream_key || mac_key = HKDF(ikm=master_key, salt=iv, info=b"split" + ad, length=64)``.
    """

    master_key: bytes
    stream_key: bytes
    mac_key: bytes

    @classmethod
    def derive(cls, master_key: BytesLike, iv: BytesLike, ad: BytesLike = b"") -> KeyMaterial:
        if len(master_key) == 0:
            raise ValueError("Master key must not be empty")

        okm = hkdf_sha256(master_key, iv, b"split" + bytes(ad), 2 * SUBKEY_SIZE)
        return cls(bytes(master_key), okm[:SUBKEY_SIZE], okm[SUBKEY_SIZE:])

    def __repr__(self) -> str:
        return "KeyMaterial(...)"


@dataclass(frozen=True)
class SealedMessage:
    """Parsed view of the wire format ``iv (16) || ciphertext || tag (32)``."""

    iv: bytes
    ciphertext: bytes
    tag: bytes

    @classmethod
    def from_bytes(cls, sealed: BytesLike) -> SealedMessage:
        sealed = bytes(sealed)
        if len(sealed) < OVERHEAD:
            raise MalformedMessageError()
        return cls(sealed[:IV_SIZE], sealed[IV_SIZE:-TAG_SIZE], sealed[-TAG_SIZE:])

    def to_bytes(self) -> bytes:
        return self.iv + self.ciphertext + self.tag

    def __len__(self) -> int:
        return len(self.ciphertext) + OVERHEAD


def _xor(data: bytes, stream: bytes) -> bytes:
    return (
        np.frombuffer(data, dtype=np.uint8) ^ np.frombuffer(stream, dtype=np.uint8)
    ).tobytes()


def _compute_tag(mac_key: bytes, ad: BytesLike, iv: bytes, ciphertext: bytes) -> bytes:
    return hmac_sha256(mac_key, bytes(ad) + iv + ciphertext)


def encrypt(
    plaintext: BytesLike,
    key: BytesLike,
    ad: BytesLike = b"",
    iv: BytesLike | None = None,
    disc: ParameterDisc | None = None,
    mode: ExtractionMode | None = None,
    warm: int = WARM_UP,
) -> bytes:
    """Encrypts then authenticates ``plaintext``.

    ``disc``, ``mode`` and ``warm`` are not stored in the output, the
    recipient must use the same values.

    Parameters
    ----------
    plaintext : bytes
        Message to encrypt.
    key : bytes
        Master key (32 bytes or more recommended).
    ad : bytes, default=b""
        Associated data, authenticated but not encrypted.
    iv : bytes, optional
        16-byte initialization vector, drawn from the OS CSPRNG when omitted.
    disc : ParameterDisc, optional
        Parameter disc, chaotic profile by default.
    mode : ExtractionMode, optional
        Keystream extraction mode, ``per3`` by default.
    warm : int, default=100
        Keystream warm-up length.

    Returns
    -------
    bytes
        ``iv || ciphertext || tag``, 48 bytes longer than the plaintext.

    Raises
    ------
    ValueError
        If the key is empty or the IV is not 16 bytes long.
    """
    if len(key) == 0:
        raise ValueError("Key must not be empty")

    if iv is None:
        iv = secure_bytes(IV_SIZE)
    iv = bytes(iv)
    if len(iv) != IV_SIZE:
        raise ValueError(f"IV must be {IV_SIZE} bytes long (got {len(iv)})")

    plaintext = bytes(plaintext)
    keys = KeyMaterial.derive(key, iv, ad)

    stream = chaotic.keystream(keys.stream_key, iv, ad, len(plaintext), disc, mode, warm)
    ciphertext = _xor(plaintext, stream)
    tag = _compute_tag(keys.mac_key, ad, iv, ciphertext)

    return SealedMessage(iv, ciphertext, tag).to_bytes()


def decrypt(
    sealed: BytesLike,
    key: BytesLike,
    ad: BytesLike = b"",
    disc: ParameterDisc | None = None,
    mode: ExtractionMode | None = None,
    warm: int = WARM_UP,
) -> bytes:
    """Verifies and decrypts a sealed message.

    The tag is checked before any keystream is produced, nothing is released
    for a forged message.

    Raises
    ------
    MalformedMessageError
        If the input is shorter than 48 bytes.
    AuthenticationFailedError
        If the tag does not verify.
    """
    if len(key) == 0:
        raise ValueError("Key must not be empty")

    message = SealedMessage.from_bytes(sealed)
    keys = KeyMaterial.derive(key, message.iv, ad)

    expected_tag = _compute_tag(keys.mac_key, ad, message.iv, message.ciphertext)
    if not ct_equal(message.tag, expected_tag):
        raise AuthenticationFailedError()

    stream = chaotic.keystream(
        keys.stream_key, message.iv, ad, len(message.ciphertext), disc, mode, warm
    )
    return _xor(message.ciphertext, stream)
