from .config import CliConfig
from .crypto import (
    ExtractionMode,
    ParameterDisc,
    Profile,
    decrypt,
    encrypt,
    keystream,
)
from .exceptions import (
    AuthenticationFailedError,
    EntropySourceError,
    MalformedMessageError,
    NotApplicableError,
    RejectionLimitError,
)
from .julia import Family, JuliaApprox, OmegaSpec, render, stability_distance, stability_probe
from .statistics import BitSequence, EntReport, TestResult, ent_report, run_battery
