import pytest

from pychaoscipher.crypto.drbg import (
    MAX_GENERATE_BYTES,
    DrbgState,
    drbg_generate,
    drbg_instantiate,
    drbg_reseed,
)


# SP 800-90A CAVP, HMAC_DRBG SHA-256, no prediction resistance, with reseed
CAVP_ENTROPY = bytes.fromhex("06032cd5eed33f39265f49ecb142c511da9aff2af71203bffaf34a9ca5bd9c0d")
CAVP_NONCE = bytes.fromhex("0e66f71edc43e42a45ad3c6fc6cdc4df")
CAVP_ENTROPY_RESEED = bytes.fromhex("01920a4e669ed3a85ae8a33b35a74ad7fb2a6bb4cf395ce00334a9c9a5a5d552")
CAVP_OUTPUT = bytes.fromhex(
    "76fc79fe9b50beccc991a11b5635783a83536add03c157fb30645e611c2898bb"
    "2b1bc215000209208cd506cb28da2a51bdb03826aaf2bd2335d576d519160842"
    "e7158ad0949d1a9ec3e66ea1b1a064b005de914eac2e9d4f2d72a8616a802254"
    "22918250ff66a41bd2f864a6a38cc5b6499dc43f7f2bd09e1e0f8f5885935124"
)


def test_cavp_vector():
    state = drbg_instantiate(CAVP_ENTROPY, CAVP_NONCE, b"")
    drbg_reseed(state, CAVP_ENTROPY_RESEED)
    drbg_generate(state, 128)

    assert drbg_generate(state, 128) == CAVP_OUTPUT
    assert state.reseed_counter == 3


def test_state_sizes():
    state = DrbgState(b"entropy", b"nonce", b"personalization")

    assert len(state.K) == 32
    assert len(state.V) == 32
    assert state.reseed_counter == 1

    state.generate(100)
    assert len(state.K) == 32
    assert len(state.V) == 32


def test_determinism():
    a = drbg_instantiate(b"seed", b"nonce", b"ps")
    b = drbg_instantiate(b"seed", b"nonce", b"ps")

    assert [a.generate(n) for n in (1, 17, 64)] == [b.generate(n) for n in (1, 17, 64)]


@pytest.mark.parametrize(
    "other_args",
    [
        (b"seed2", b"nonce", b"ps"),
        (b"seed", b"nonce2", b"ps"),
        (b"seed", b"nonce", b"ps2"),
    ],
)
def test_seed_sensitivity(other_args):
    reference = drbg_instantiate(b"seed", b"nonce", b"ps").generate(32)

    assert drbg_instantiate(*other_args).generate(32) != reference


def test_additional_input_changes_output():
    a = drbg_instantiate(b"seed", b"", b"")
    b = drbg_instantiate(b"seed", b"", b"")

    assert a.generate(32, b"extra") != b.generate(32)


def test_request_size_limits():
    state = drbg_instantiate(b"seed", b"", b"")

    assert len(state.generate(MAX_GENERATE_BYTES)) == MAX_GENERATE_BYTES

    for n in (0, MAX_GENERATE_BYTES + 1):
        with pytest.raises(ValueError) as excinfo:
            state.generate(n)
        assert "request size" in str(excinfo.value)


def test_empty_entropy():
    with pytest.raises(ValueError):
        drbg_instantiate(b"", b"nonce", b"")

    state = drbg_instantiate(b"seed", b"", b"")
    with pytest.raises(ValueError):
        state.reseed(b"")


def test_copy_is_independent():
    state = drbg_instantiate(b"seed", b"", b"")
    clone = state.copy()

    assert clone.generate(32) == state.generate(32)
    clone.generate(1)
    assert clone.generate(32) != state.generate(32)
