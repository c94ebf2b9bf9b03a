import hashlib
import hmac
import math
import struct

import pytest

from pychaoscipher.crypto.chaotic import (
    ChaoticState,
    ExtractionKind,
    ExtractionMode,
    ParameterDisc,
    Profile,
    keystream,
    new_state,
    pack_state,
    sample_c,
    sample_z0,
    step_map,
    unpack_state,
    warm_up,
)
from pychaoscipher.crypto.drbg import DrbgState
from pychaoscipher.exceptions import RejectionLimitError


STREAM_KEY = bytes(range(32))
IV = bytes.fromhex("000102030405060708090a0b0c0d0e0f")
AD = b"header"


class ReferenceDrbg:
    """HMAC_DRBG-SHA-256 written from the standard, generate without additional input only."""

    def __init__(self, entropy, nonce, personalization):
        self.key = bytes(32)
        self.value = b"\x01" * 32
        self.update(entropy + nonce + personalization)

    def update(self, data):
        self.key = hmac.digest(self.key, self.value + b"\x00" + data, "sha256")
        self.value = hmac.digest(self.key, self.value, "sha256")
        if data:
            self.key = hmac.digest(self.key, self.value + b"\x01" + data, "sha256")
            self.value = hmac.digest(self.key, self.value, "sha256")

    def generate(self, n):
        out = b""
        while len(out) < n:
            self.value = hmac.digest(self.key, self.value, "sha256")
            out += self.value
        self.update(b"")
        return out[:n]


def straight_line_keystream(stream_key, iv, ad, n, delta=3.5, warm=100, mode="per3", k=3):
    """Independent transcription of the keystream construction with Python complex arithmetic."""
    drbg = ReferenceDrbg(stream_key, iv, ad)

    def uniform_pair():
        raw = drbg.generate(16)
        return (
            (int.from_bytes(raw[:8], "big") >> 11) / 2**53,
            (int.from_bytes(raw[8:], "big") >> 11) / 2**53,
        )

    def draw_c():
        while True:
            u, v = uniform_pair()
            c = complex((2 * u - 1) * delta, (2 * v - 1) * delta)
            if abs(c) <= delta:
                return c

    def draw_z0():
        while True:
            u, v = uniform_pair()
            z = complex((2 * u - 1) * 0.9, (2 * v - 1) * 0.9)
            if 0.1 <= abs(z) <= 0.9:
                return z

    z = draw_z0()
    steps = 0

    def step():
        nonlocal z, steps
        c = draw_c()
        w = z * z * z + c * z
        steps += 1
        if math.isfinite(w.real) and math.isfinite(w.imag) and 1e-6 <= abs(w) <= 1e6:
            z = w
        else:
            z = draw_z0()

    for _ in range(warm):
        step()

    running = hashlib.sha256()
    out = b""
    block = 0
    while len(out) < n:
        if mode == "per3":
            for _ in range(3):
                step()
            out += hmac.new(stream_key, struct.pack(">ddQ", z.real, z.imag, block), "sha256").digest()
        elif mode == "accumulate":
            parts = b""
            for _ in range(k):
                step()
                parts += struct.pack(">ddQ", z.real, z.imag, steps)
            out += hmac.new(stream_key, parts + struct.pack(">Q", block), "sha256").digest()
        else:
            for _ in range(3):
                step()
                running.update(struct.pack(">ddQ", z.real, z.imag, steps))
            out += hmac.new(stream_key, running.digest() + struct.pack(">Q", block), "sha256").digest()
        block += 1

    return out[:n]


class ConstantDrbg:
    """Stand-in DRBG always returning the same bytes."""

    def __init__(self, value):
        self.value = value

    def generate(self, n, additional_input=b""):
        return self.value * n


@pytest.mark.parametrize("warm", [0, 1, 100])
def test_keystream_matches_straight_line_oracle(warm):
    expected = straight_line_keystream(STREAM_KEY, IV, AD, 200, warm=warm)

    assert keystream(STREAM_KEY, IV, AD, 200, warm=warm) == expected


@pytest.mark.parametrize(
    "mode, oracle_kwargs",
    [
        (ExtractionMode.accumulate(1), {"mode": "accumulate", "k": 1}),
        (ExtractionMode.accumulate(10), {"mode": "accumulate", "k": 10}),
        (ExtractionMode.running_hash(), {"mode": "running"}),
    ],
)
def test_extraction_modes_match_oracle(mode, oracle_kwargs):
    expected = straight_line_keystream(STREAM_KEY, IV, AD, 100, **oracle_kwargs)

    assert keystream(STREAM_KEY, IV, AD, 100, mode=mode) == expected


def test_stable_disc_matches_oracle():
    expected = straight_line_keystream(STREAM_KEY, IV, AD, 64, delta=0.5)

    assert keystream(STREAM_KEY, IV, AD, 64, ParameterDisc.stable()) == expected


def test_keystream_lengths():
    assert keystream(STREAM_KEY, IV, AD, 0) == b""
    for n in (1, 31, 32, 33, 810):
        assert len(keystream(STREAM_KEY, IV, AD, n)) == n

    with pytest.raises(ValueError):
        keystream(STREAM_KEY, IV, AD, -1)


def test_keystream_prefix_property():
    long_stream = keystream(STREAM_KEY, IV, AD, 130)

    for n in (1, 32, 33, 97):
        assert keystream(STREAM_KEY, IV, AD, n) == long_stream[:n]


def test_keystream_sensitivity():
    reference = keystream(STREAM_KEY, IV, AD, 64)

    assert keystream(STREAM_KEY, IV, AD, 64) == reference
    assert keystream(bytes(32), IV, AD, 64) != reference
    assert keystream(STREAM_KEY, bytes(16), AD, 64) != reference
    assert keystream(STREAM_KEY, IV, b"other", 64) != reference
    assert keystream(STREAM_KEY, IV, AD, 64, warm=99) != reference
    assert keystream(STREAM_KEY, IV, AD, 64, ParameterDisc.stable()) != reference
    assert keystream(STREAM_KEY, IV, AD, 64, mode=ExtractionMode.accumulate(10)) != reference
    assert keystream(STREAM_KEY, IV, AD, 64, mode=ExtractionMode.running_hash()) != reference


@pytest.mark.parametrize("disc", [ParameterDisc.stable(), ParameterDisc.chaotic(), ParameterDisc.custom(10.0)])
def test_sample_c_within_disc(disc):
    drbg = DrbgState(b"sample_c")

    for _ in range(500):
        assert abs(sample_c(drbg, disc)) <= disc.delta


def test_sample_c_zero_radius():
    drbg = DrbgState(b"sample_c")

    assert sample_c(drbg, ParameterDisc.custom(0.0)) == 0


def test_sample_c_determinism():
    a = DrbgState(b"seed")
    b = DrbgState(b"seed")

    assert [sample_c(a, ParameterDisc.chaotic()) for _ in range(10)] == [
        sample_c(b, ParameterDisc.chaotic()) for _ in range(10)
    ]


def test_sample_z0_within_annulus():
    drbg = DrbgState(b"sample_z0")

    for _ in range(500):
        assert 0.1 <= abs(sample_z0(drbg)) <= 0.9


def test_rejection_limit():
    # every draw lands in the corner of the bounding square
    drbg = ConstantDrbg(b"\xff")

    with pytest.raises(RejectionLimitError):
        sample_c(drbg, ParameterDisc.chaotic())
    with pytest.raises(RejectionLimitError):
        sample_z0(drbg)


def test_step_map_restarts_fixed_point():
    state = ChaoticState(0j, DrbgState(b"restart"))

    step_map(state, ParameterDisc.chaotic())

    assert state.reseed_count == 1
    assert state.iter_count == 1
    assert 0.1 <= abs(state.z) <= 0.9


def test_step_map_restarts_diverging_orbit():
    state = ChaoticState(complex(1e5, 0), DrbgState(b"restart"))

    step_map(state, ParameterDisc.chaotic())

    assert state.reseed_count == 1
    assert abs(state.z) <= 0.9


def test_step_map_zero_radius_is_cube():
    state = ChaoticState(0.5 + 0j, DrbgState(b"cube"))

    step_map(state, ParameterDisc.custom(0.0))

    assert state.z == 0.125
    assert state.reseed_count == 0


def test_sample_c_is_centered():
    drbg = DrbgState(b"sample_c mean")
    disc = ParameterDisc.chaotic()
    draws = [sample_c(drbg, disc) for _ in range(10_000)]

    # uniform on the disc: each coordinate has variance delta**2 / 4
    tolerance = 4 * disc.delta / 2 / math.sqrt(len(draws))
    assert abs(sum(c.real for c in draws) / len(draws)) < tolerance
    assert abs(sum(c.imag for c in draws) / len(draws)) < tolerance
    assert sum(abs(c) ** 2 for c in draws) / len(draws) == pytest.approx(disc.delta**2 / 2, rel=0.05)


def differing_bit_fraction(a, b):
    return sum(bin(x ^ y).count("1") for x, y in zip(a, b)) / (8 * len(a))


@pytest.mark.parametrize("bit", [0, 77, 255])
def test_keystream_avalanche(bit):
    flipped = bytearray(STREAM_KEY)
    flipped[bit // 8] ^= 1 << (bit % 8)

    reference = keystream(STREAM_KEY, IV, AD, 1024)
    fraction = differing_bit_fraction(reference, keystream(bytes(flipped), IV, AD, 1024))

    # 8192 bits, standard deviation of the fraction about 0.0055
    assert fraction == pytest.approx(0.5, abs=0.03)


def test_orbit_stays_bounded():
    state = new_state(STREAM_KEY, IV, AD)
    disc = ParameterDisc.chaotic()

    for _ in range(10_000):
        step_map(state, disc)
        assert math.isfinite(state.z.real) and math.isfinite(state.z.imag)
        assert 1e-6 <= abs(state.z) <= 1e6

    assert state.iter_count == 10_000


def test_warm_up():
    a = new_state(STREAM_KEY, IV, AD)
    b = new_state(STREAM_KEY, IV, AD)

    warm_up(a, ParameterDisc.chaotic(), 100)
    warm_up(b, ParameterDisc.chaotic(), 100)

    assert a.iter_count == 100
    assert a.z == b.z
    assert a.reseed_count == b.reseed_count

    with pytest.raises(ValueError):
        warm_up(a, ParameterDisc.chaotic(), -1)


@pytest.mark.parametrize(
    "z, counter, expected_hex",
    [
        (1 + 0j, 0, "3ff0000000000000" "0000000000000000" "0000000000000000"),
        (complex(-2, 0.5), 1, "c000000000000000" "3fe0000000000000" "0000000000000001"),
        (complex(0, -0.0), 2**64 - 1, "0000000000000000" "8000000000000000" "ffffffffffffffff"),
    ],
)
def test_pack_state(z, counter, expected_hex):
    packed = pack_state(z, counter)

    assert packed.hex() == expected_hex
    assert unpack_state(packed) == (z, counter)


def test_pack_state_invalid():
    with pytest.raises(ValueError):
        pack_state(1j, -1)
    with pytest.raises(ValueError):
        pack_state(1j, 2**64)
    with pytest.raises(ValueError):
        unpack_state(b"\x00" * 23)


@pytest.mark.parametrize(
    "delta, profile",
    [
        (0.89, Profile.STABLE),
        (1.0, Profile.STABLE),
        (3.0, Profile.CHAOTIC),
        (0.5, Profile.CHAOTIC),
        (-1.0, Profile.CUSTOM),
        (math.inf, Profile.CUSTOM),
        (math.nan, Profile.CUSTOM),
    ],
)
def test_parameter_disc_invalid(delta, profile):
    with pytest.raises(ValueError):
        ParameterDisc(delta, profile)


def test_parameter_disc_profiles():
    assert ParameterDisc() == ParameterDisc.chaotic()
    assert ParameterDisc.chaotic().delta == 3.5
    assert ParameterDisc.stable().delta == 0.5
    assert ParameterDisc.custom(0.0).delta == 0.0

    assert ParameterDisc.from_profile("stable") == ParameterDisc.stable()
    assert ParameterDisc.from_profile("custom", 2.0) == ParameterDisc.custom(2.0)
    with pytest.raises(ValueError) as excinfo:
        ParameterDisc.from_profile("chaotic", 4.0)
    assert "custom profile" in str(excinfo.value)


@pytest.mark.parametrize(
    "text, kind, k",
    [
        ("per3", ExtractionKind.PER3, 3),
        ("accumulate:10", ExtractionKind.ACCUMULATE, 10),
        ("running", ExtractionKind.RUNNING_HASH, 3),
    ],
)
def test_extraction_mode_parse(text, kind, k):
    mode = ExtractionMode.parse(text)

    assert mode.kind is kind
    assert mode.steps_per_block == k
    assert str(mode) == text


@pytest.mark.parametrize("text", ["accumulate", "accumulate:0", "accumulate:65", "accumulate:x", "per3:2", "sum"])
def test_extraction_mode_parse_invalid(text):
    with pytest.raises(ValueError):
        ExtractionMode.parse(text)
