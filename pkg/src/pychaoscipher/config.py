from __future__ import annotations
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Mapping

    from ._typing import FilePath

import configparser
import os
from dataclasses import dataclass, field

from .crypto.chaotic import WARM_UP, ExtractionMode, ParameterDisc, Profile
from .statistics.nist import DEFAULT_ALPHA

PROFILE_ENV_VAR = "CHAOSCIPHER_PROFILE"
CONFIG_SECTION = "chaoscipher"
OUTPUT_FORMATS = ("text", "json")


@dataclass
class CliConfig:
    """Settings shared by the cipher and test commands.

    Attributes
    ----------
    profile : Profile
        Parameter regime, chaotic by default.
    delta : float or None
        Disc radius, only accepted with the custom profile.
    warm_up : int
        Discarded initial map steps.
    extraction : ExtractionMode
        Keystream extraction mode.
    alpha : float
        Significance level of the test batteries.
    output_format : str
        ``text`` or ``json``.
    """

    profile: Profile = Profile.CHAOTIC
    delta: float | None = None
    warm_up: int = WARM_UP
    extraction: ExtractionMode = field(default_factory=ExtractionMode.per3)
    alpha: float = DEFAULT_ALPHA
    output_format: str = "text"

    def __post_init__(self) -> None:
        self._check_config()

    def _check_config(self) -> None:
        if self.warm_up < 0:
            raise ValueError(f"warm-up must be non-negative (got {self.warm_up})")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must be in (0, 1) (got {self.alpha})")
        if self.output_format not in OUTPUT_FORMATS:
            raise ValueError(f"output format must be one of {OUTPUT_FORMATS} (got {self.output_format!r})")
        ParameterDisc.from_profile(self.profile, self.delta)

    @property
    def disc(self) -> ParameterDisc:
        return ParameterDisc.from_profile(self.profile, self.delta)

    @classmethod
    def resolve(
        cls,
        overrides: Mapping[str, object],
        config_file: FilePath | None = None,
        environ: Mapping[str, str] | None = None,
    ) -> CliConfig:
        """Merges defaults, the INI config file, the environment and the command-line flags.

        Parameters
        ----------
        overrides : mapping
            Command-line values, ``None`` values are ignored.
        config_file : str, optional
            INI file with a ``[chaoscipher]`` section.
        environ : mapping, optional
            Environment, ``os.environ`` by default.
        """
        environ = os.environ if environ is None else environ

        settings: dict[str, object] = {}
        if config_file is not None:
            settings |= read_config_file(config_file)

        if environ.get(PROFILE_ENV_VAR):
            settings["profile"] = environ[PROFILE_ENV_VAR]

        flags = {key: value for key, value in overrides.items() if value is not None}
        # a profile flag discards a delta coming from the config file
        if "profile" in flags and "delta" not in flags:
            settings.pop("delta", None)
        settings |= flags

        return cls(
            profile=Profile(settings.get("profile", Profile.CHAOTIC.value)),
            delta=None if settings.get("delta") is None else float(settings["delta"]),
            warm_up=int(settings.get("warm_up", WARM_UP)),
            extraction=ExtractionMode.parse(str(settings.get("extraction", "per3"))),
            alpha=float(settings.get("alpha", DEFAULT_ALPHA)),
            output_format=str(settings.get("output_format", "text")),
        )


def read_config_file(filename: FilePath) -> dict[str, str]:
    """Reads the ``[chaoscipher]`` section of an INI file.

    Keys: ``profile``, ``delta``, ``warm_up``, ``extraction``, ``alpha``, ``format``.
    """
    parser = configparser.ConfigParser()
    with open(filename) as fp:
        parser.read_file(fp)

    if not parser.has_section(CONFIG_SECTION):
        raise ValueError(f"Missing [{CONFIG_SECTION}] section in {filename}")

    section = dict(parser[CONFIG_SECTION])
    if "format" in section:
        section["output_format"] = section.pop("format")
    if "warm-up" in section:
        section["warm_up"] = section.pop("warm-up")

    unknown = set(section) - {"profile", "delta", "warm_up", "extraction", "alpha", "output_format"}
    if unknown:
        raise ValueError(f"Unknown keys in [{CONFIG_SECTION}] section: {sorted(unknown)}")

    return section
