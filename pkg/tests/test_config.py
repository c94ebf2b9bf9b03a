from pathlib import Path

import pytest

from pychaoscipher.config import PROFILE_ENV_VAR, CliConfig, read_config_file
from pychaoscipher.crypto.chaotic import ExtractionMode, ParameterDisc, Profile

CURRENT_DIR = Path(__file__).parent.resolve()
DATA_PATH = CURRENT_DIR / "data"


def test_defaults():
    config = CliConfig.resolve({}, environ={})

    assert config.profile is Profile.CHAOTIC
    assert config.disc == ParameterDisc.chaotic()
    assert config.warm_up == 100
    assert config.extraction == ExtractionMode.per3()
    assert config.alpha == 0.01
    assert config.output_format == "text"


def test_read_config_file():
    assert read_config_file(DATA_PATH / "chaoscipher.ini") == {
        "profile": "custom",
        "delta": "2.0",
        "warm_up": "50",
        "extraction": "accumulate:10",
        "alpha": "0.05",
        "output_format": "json",
    }


def test_config_file():
    config = CliConfig.resolve({}, config_file=DATA_PATH / "chaoscipher.ini", environ={})

    assert config.disc == ParameterDisc.custom(2.0)
    assert config.warm_up == 50
    assert config.extraction == ExtractionMode.accumulate(10)
    assert config.alpha == 0.05
    assert config.output_format == "json"


def test_environment_overrides_config_file():
    config = CliConfig.resolve(
        {}, config_file=DATA_PATH / "chaoscipher.ini", environ={PROFILE_ENV_VAR: "custom"}
    )
    assert config.disc == ParameterDisc.custom(2.0)

    config = CliConfig.resolve({}, environ={PROFILE_ENV_VAR: "stable"})
    assert config.disc == ParameterDisc.stable()


def test_flags_override_everything():
    config = CliConfig.resolve(
        {"profile": "stable", "warm_up": 10, "alpha": None},
        config_file=DATA_PATH / "chaoscipher.ini",
        environ={PROFILE_ENV_VAR: "chaotic"},
    )

    # the file delta only applies to the custom profile
    assert config.disc == ParameterDisc.stable()
    assert config.warm_up == 10
    assert config.alpha == 0.05


def test_custom_delta_flag():
    config = CliConfig.resolve({"profile": "custom", "delta": 0.0}, environ={})

    assert config.disc == ParameterDisc.custom(0.0)


@pytest.mark.parametrize(
    "overrides",
    [
        {"delta": 4.0},
        {"profile": "stable", "delta": 0.5},
        {"profile": "unknown"},
        {"warm_up": -1},
        {"alpha": 1.5},
        {"output_format": "xml"},
        {"extraction": "accumulate:0"},
    ],
)
def test_invalid_settings(overrides):
    with pytest.raises(ValueError):
        CliConfig.resolve(overrides, environ={})


def test_invalid_environment_profile():
    with pytest.raises(ValueError):
        CliConfig.resolve({}, environ={PROFILE_ENV_VAR: "turbo"})


def test_config_file_errors(tmp_path):
    missing_section = tmp_path / "missing.ini"
    missing_section.write_text("[other]\nprofile = stable\n")
    with pytest.raises(ValueError) as excinfo:
        read_config_file(missing_section)
    assert "[chaoscipher]" in str(excinfo.value)

    unknown_key = tmp_path / "unknown.ini"
    unknown_key.write_text("[chaoscipher]\nkey = 00\n")
    with pytest.raises(ValueError) as excinfo:
        read_config_file(unknown_key)
    assert "Unknown keys" in str(excinfo.value)

    with pytest.raises(OSError):
        read_config_file(tmp_path / "absent.ini")
