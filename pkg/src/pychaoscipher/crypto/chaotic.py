from __future__ import annotations
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .._typing import BytesLike

import hashlib
import logging
import math
import struct
from dataclasses import dataclass
from enum import Enum

from ..exceptions import RejectionLimitError
from .drbg import DrbgState, drbg_instantiate
from .primitives import hmac_sha256

logger = logging.getLogger(__name__)

DELTA_STABLE_MAX = 0.89
DELTA_CHAOTIC_MIN = 3.0
DEFAULT_DELTA = 3.5
STABLE_DELTA = 0.5
WARM_UP = 100

Z0_MIN_RADIUS = 0.1
Z0_MAX_RADIUS = 0.9
ORBIT_LOWER_BOUND = 1e-6
ORBIT_UPPER_BOUND = 1e6
MAX_REJECTIONS = 256
MAX_ACCUMULATE = 64

_STATE_FORMAT = struct.Struct(">ddQ")
_COUNTER_FORMAT = struct.Struct(">Q")


class Profile(Enum):
    STABLE = "stable"    # delta < 0.89, Julia set stable under parameter perturbation
    CHAOTIC = "chaotic"  # delta > 3
    CUSTOM = "custom"


@dataclass(frozen=True)
class ParameterDisc:
    """Closed disc of radius ``delta`` from which the map parameters are drawn.

    ``delta=0`` is accepted for the custom profile and degenerates to the
    single parameter ``c=0``.

    Attributes
    ----------
    delta : float
        Disc radius.
    profile : Profile
        Regime the radius belongs to.
    """

    delta: float = DEFAULT_DELTA
    profile: Profile = Profile.CHAOTIC

    def __post_init__(self) -> None:
        if not math.isfinite(self.delta) or self.delta < 0:
            raise ValueError(f"Disc radius must be a finite non-negative number (got {self.delta})")

        if self.profile is Profile.STABLE and not self.delta < DELTA_STABLE_MAX:
            raise ValueError(
                f"Stable profile requires delta < {DELTA_STABLE_MAX} (got {self.delta})"
            )
        if self.profile is Profile.CHAOTIC and not self.delta > DELTA_CHAOTIC_MIN:
            raise ValueError(
                f"Chaotic profile requires delta > {DELTA_CHAOTIC_MIN} (got {self.delta})"
            )
        if self.profile is not Profile.CUSTOM and self.delta == 0:
            raise ValueError("delta=0 is only allowed with the custom profile")

    @classmethod
    def stable(cls) -> ParameterDisc:
        return cls(STABLE_DELTA, Profile.STABLE)

    @classmethod
    def chaotic(cls) -> ParameterDisc:
        return cls(DEFAULT_DELTA, Profile.CHAOTIC)

    @classmethod
    def custom(cls, delta: float) -> ParameterDisc:
        return cls(delta, Profile.CUSTOM)

    @classmethod
    def from_profile(cls, profile: Profile | str, delta: float | None = None) -> ParameterDisc:
        profile = Profile(profile)

        if profile is Profile.CUSTOM:
            return cls.custom(DEFAULT_DELTA if delta is None else delta)

        if delta is not None:
            raise ValueError(
                f"delta can only be set with the custom profile (profile: {profile.value})"
            )
        return cls.stable() if profile is Profile.STABLE else cls.chaotic()


class ExtractionKind(Enum):
    PER3 = "per3"
    ACCUMULATE = "accumulate"
    RUNNING_HASH = "running"


@dataclass(frozen=True)
class ExtractionMode:
    """How orbit states are turned into keystream blocks.

    Attributes
    ----------
    kind : ExtractionKind
        ``PER3`` hashes the state every three steps, ``ACCUMULATE`` hashes the
        concatenation of ``k`` successive states, ``RUNNING_HASH`` hashes a
        running SHA-256 digest of every state seen so far.
    k : int
        Number of accumulated states, only used by ``ACCUMULATE``.
    """

    kind: ExtractionKind = ExtractionKind.PER3
    k: int = 3

    def __post_init__(self) -> None:
        if self.kind is ExtractionKind.ACCUMULATE and not 1 <= self.k <= MAX_ACCUMULATE:
            raise ValueError(
                f"Accumulated state count must be in [1, {MAX_ACCUMULATE}] (got {self.k})"
            )

    @property
    def steps_per_block(self) -> int:
        if self.kind is ExtractionKind.ACCUMULATE:
            return self.k
        return 3

    @classmethod
    def per3(cls) -> ExtractionMode:
        return cls(ExtractionKind.PER3)

    @classmethod
    def accumulate(cls, k: int) -> ExtractionMode:
        return cls(ExtractionKind.ACCUMULATE, k)

    @classmethod
    def running_hash(cls) -> ExtractionMode:
        return cls(ExtractionKind.RUNNING_HASH)

    @classmethod
    def parse(cls, text: str) -> ExtractionMode:
        """Parses ``per3``, ``accumulate:K`` or ``running``."""
        name, _, arg = text.strip().partition(":")

        if name == "accumulate":
            if not arg:
                raise ValueError("accumulate mode requires a count, e.g. accumulate:10")
            try:
                k = int(arg)
            except ValueError as e:
                raise ValueError(f"Invalid accumulate count: {arg!r}") from e
            return cls.accumulate(k)

        if arg:
            raise ValueError(f"Unexpected argument for extraction mode {name!r}")
        if name in ("running", "running_hash"):
            return cls.running_hash()
        if name == "per3":
            return cls.per3()

        raise ValueError(f"Unknown extraction mode: {text!r}")

    def __str__(self) -> str:
        if self.kind is ExtractionKind.ACCUMULATE:
            return f"accumulate:{self.k}"
        return self.kind.value


class ChaoticState:
    """Orbit of the random cubic map.

    Single owner, not safe for concurrent use.

    Attributes
    ----------
    z : complex
        Current orbit point, always finite.
    iter_count : int
        Number of map steps applied, reseeds included.
    reseed_count : int
        Number of times the orbit guard restarted the orbit.
    drbg : DrbgState
        Source of the map parameters and restart points.
    """

    def __init__(self, z: complex, drbg: DrbgState, iter_count: int = 0, reseed_count: int = 0):
        self.z = complex(z)
        self.drbg = drbg
        self.iter_count = iter_count
        self.reseed_count = reseed_count

    def __str__(self) -> str:
        return "ChaoticState(z={}, iter_count={}, reseed_count={})".format(
            self.z, self.iter_count, self.reseed_count
        )


def _unit_pair(drbg: DrbgState) -> tuple[float, float]:
    """Two uniform floats in [0, 1) with 53-bit resolution each."""
    raw = drbg.generate(16)
    u = (int.from_bytes(raw[:8], "big") >> 11) * 2.0**-53
    v = (int.from_bytes(raw[8:], "big") >> 11) * 2.0**-53
    return u, v


def sample_c(drbg: DrbgState, disc: ParameterDisc) -> complex:
    """Draws a parameter uniformly from the closed disc of radius ``disc.delta``.

    Points are drawn in the bounding square and rejected outside the disc.

    Raises
    ------
    RejectionLimitError
        After 256 consecutive rejections.
    """
    delta = disc.delta
    for _ in range(MAX_REJECTIONS):
        u, v = _unit_pair(drbg)
        x = (2.0 * u - 1.0) * delta
        y = (2.0 * v - 1.0) * delta
        if math.hypot(x, y) <= delta:
            return complex(x, y)

    raise RejectionLimitError(f"Parameter sampling rejected {MAX_REJECTIONS} times in a row")


def sample_z0(drbg: DrbgState) -> complex:
    """Draws a starting point uniformly from the annulus 0.1 <= |z| <= 0.9."""
    for _ in range(MAX_REJECTIONS):
        u, v = _unit_pair(drbg)
        x = (2.0 * u - 1.0) * Z0_MAX_RADIUS
        y = (2.0 * v - 1.0) * Z0_MAX_RADIUS
        if Z0_MIN_RADIUS <= math.hypot(x, y) <= Z0_MAX_RADIUS:
            return complex(x, y)

    raise RejectionLimitError(f"Starting point sampling rejected {MAX_REJECTIONS} times in a row")


def _cubic(zr: float, zi: float, cr: float, ci: float) -> tuple[float, float]:
    # z**3 + c*z with plain binary64 products and sums, no fused operations
    z2r = zr * zr - zi * zi
    z2i = zr * zi + zi * zr
    z3r = z2r * zr - z2i * zi
    z3i = z2r * zi + z2i * zr
    czr = cr * zr - ci * zi
    czi = cr * zi + ci * zr
    return z3r + czr, z3i + czi


def step_map(state: ChaoticState, disc: ParameterDisc) -> ChaoticState:
    """Applies one step ``z <- z**3 + c*z`` with a fresh parameter ``c``.

    If the new point is non-finite or leaves ``1e-6 <= |z| <= 1e6``, the
    orbit is restarted from a new starting point drawn from the DRBG.
    The state is updated in place and returned.
    """
    c = sample_c(state.drbg, disc)
    zr, zi = _cubic(state.z.real, state.z.imag, c.real, c.imag)
    state.iter_count += 1

    if math.isfinite(zr) and math.isfinite(zi):
        modulus = math.hypot(zr, zi)
        if ORBIT_LOWER_BOUND <= modulus <= ORBIT_UPPER_BOUND:
            state.z = complex(zr, zi)
            return state

    state.z = sample_z0(state.drbg)
    state.reseed_count += 1
    logger.debug("Orbit restarted at step %d", state.iter_count)

    return state


def warm_up(state: ChaoticState, disc: ParameterDisc, n: int = WARM_UP) -> ChaoticState:
    if n < 0:
        raise ValueError(f"Warm-up length must be non-negative (got {n})")

    for _ in range(n):
        step_map(state, disc)

    return state


def pack_state(z: complex, counter: int) -> bytes:
    """Big-endian binary64 real part, binary64 imaginary part and 64-bit counter."""
    if not 0 <= counter < 2**64:
        raise ValueError(f"Counter must be in [0, 2**64) (got {counter})")
    return _STATE_FORMAT.pack(z.real, z.imag, counter)


def unpack_state(data: BytesLike) -> tuple[complex, int]:
    if len(data) != _STATE_FORMAT.size:
        raise ValueError(f"Packed state must be {_STATE_FORMAT.size} bytes (got {len(data)})")
    re, im, counter = _STATE_FORMAT.unpack(bytes(data))
    return complex(re, im), counter


def new_state(stream_key: BytesLike, iv: BytesLike, ad: BytesLike) -> ChaoticState:
    """Seeds a DRBG from (stream_key, iv, ad) and draws the starting point."""
    drbg = drbg_instantiate(stream_key, iv, ad)
    return ChaoticState(sample_z0(drbg), drbg)


def keystream(
    stream_key: BytesLike,
    iv: BytesLike,
    ad: BytesLike,
    n: int,
    disc: ParameterDisc | None = None,
    mode: ExtractionMode | None = None,
    warm: int = WARM_UP,
) -> bytes:
    """Generates ``n`` keystream bytes.

    The orbit is seeded from (stream_key, iv, ad), warmed up for ``warm``
    steps, then every block is an HMAC-SHA-256 under ``stream_key`` of the
    orbit states selected by ``mode``. Shorter outputs are prefixes of longer
    ones.

    Parameters
    ----------
    stream_key : bytes
        Key for the DRBG and the extraction HMAC.
    iv : bytes
        Initialization vector, used as DRBG nonce.
    ad : bytes
        Associated data, used as DRBG personalization.
    n : int
        Number of bytes to produce.
    disc : ParameterDisc, optional
        Parameter disc, chaotic profile by default.
    mode : ExtractionMode, optional
        Extraction mode, ``per3`` by default.
    warm : int, default=100
        Number of discarded initial steps.

    Returns
    -------
    bytes
        Keystream of length ``n``.
    """
    if n < 0:
        raise ValueError(f"Keystream length must be non-negative (got {n})")
    if n == 0:
        return b""

    disc = ParameterDisc.chaotic() if disc is None else disc
    mode = ExtractionMode.per3() if mode is None else mode
    stream_key = bytes(stream_key)

    state = new_state(stream_key, iv, ad)
    warm_up(state, disc, warm)

    running = hashlib.sha256() if mode.kind is ExtractionKind.RUNNING_HASH else None

    output = bytearray()
    block_index = 0
    while len(output) < n:
        counter = _COUNTER_FORMAT.pack(block_index)

        if mode.kind is ExtractionKind.PER3:
            for _ in range(3):
                step_map(state, disc)
            block = hmac_sha256(stream_key, pack_state(state.z, block_index))

        elif mode.kind is ExtractionKind.ACCUMULATE:
            parts = []
            for _ in range(mode.k):
                step_map(state, disc)
                parts.append(pack_state(state.z, state.iter_count))
            block = hmac_sha256(stream_key, b"".join(parts) + counter)

        else:
            for _ in range(mode.steps_per_block):
                step_map(state, disc)
                running.update(pack_state(state.z, state.iter_count))
            block = hmac_sha256(stream_key, running.digest() + counter)

        output += block
        block_index += 1

    logger.debug(
        "Keystream of %d bytes generated (%d steps, %d orbit restarts)",
        n, state.iter_count, state.reseed_count,
    )

    return bytes(output[:n])
