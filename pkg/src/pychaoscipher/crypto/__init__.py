from .aead import IV_SIZE, TAG_SIZE, KeyMaterial, SealedMessage, decrypt, encrypt
from .drbg import DrbgState, drbg_generate, drbg_instantiate, drbg_reseed
from .chaotic import (
    DEFAULT_DELTA,
    DELTA_CHAOTIC_MIN,
    DELTA_STABLE_MAX,
    STABLE_DELTA,
    WARM_UP,
    ChaoticState,
    ExtractionKind,
    ExtractionMode,
    ParameterDisc,
    Profile,
    keystream,
    pack_state,
    sample_c,
    sample_z0,
    step_map,
    unpack_state,
    warm_up,
)
from .primitives import ct_equal, hkdf_sha256, hmac_sha256, secure_bytes, sha256
