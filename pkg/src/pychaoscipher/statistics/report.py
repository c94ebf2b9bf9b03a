from __future__ import annotations
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Sequence
    from typing import Any

    from .._typing import FilePath
    from .ent import EntReport

import json
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from rich.table import Table

from ..utils.csv_metadata import dispatch_to_appropriate_loader, write_csv_metadata

REPORT_FORMAT_VERSION = "0.1"

TABLE_LABELS = {
    "monobit": "Frequency (Monobit)",
    "block_frequency": "Block Frequency",
    "cumulative_sums_forward": "Cumulative Sums (fwd)",
    "cumulative_sums_backward": "Cumulative Sums (bwd)",
    "dft": "FFT",
    "approximate_entropy": "Approximate Entropy",
    "linear_complexity": "Linear Complexity",
    "longest_run": "Longest Run of Ones",
    "non_overlapping_template": "Non-overlapping Templates",
    "overlapping_template": "Overlapping Templates",
    "random_excursions": "Random Excursions",
    "random_excursions_variant": "Random Excursions Variant",
    "rank": "Rank (32x32)",
    "runs": "Runs",
    "serial": "Serial (m=3)",
    "universal": "Universal (Maurer)",
}


def to_builtin(value: Any) -> Any:
    """Converts numpy scalars/arrays (possibly nested) into JSON-serializable values."""
    if isinstance(value, dict):
        return {str(k): to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [to_builtin(v) for v in value]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def clip_p_value(p: float) -> float:
    p = float(p)
    if math.isnan(p):
        return 0.0
    return min(max(p, 0.0), 1.0)


@dataclass
class TestResult:
    """Outcome of one statistical test.

    Attributes
    ----------
    name : str
        Test identifier (e.g. ``"monobit"``).
    p_values : list[float]
        P-values, all in [0, 1]. Empty when the test could not be computed.
    statistic : float
        Main test statistic.
    passed : bool
        True iff the test is applicable and every p-value is at least alpha.
    params : dict
        Parameters, intermediate counts and flags.
    applicable : bool
        False if the input does not meet the test requirements.
    """

    __test__ = False  # not a pytest test class

    name: str
    p_values: list[float]
    statistic: float
    passed: bool
    params: dict = field(default_factory=dict)
    applicable: bool = True

    @classmethod
    def from_p_values(
        cls,
        name: str,
        p_values: Sequence[float],
        statistic: float,
        alpha: float,
        params: dict | None = None,
        applicable: bool = True,
    ) -> TestResult:
        p_values = [clip_p_value(p) for p in p_values]
        passed = applicable and len(p_values) > 0 and min(p_values) >= alpha
        params = {} if params is None else params
        params.setdefault("alpha", alpha)
        return cls(name, p_values, float(statistic), bool(passed), params, applicable)

    @classmethod
    def not_applicable(cls, name: str, reason: str) -> TestResult:
        return cls(name, [], 0.0, False, {"reason": reason}, applicable=False)

    @property
    def p_value(self) -> float:
        return min(self.p_values) if self.p_values else float("nan")

    @property
    def label(self) -> str:
        return TABLE_LABELS.get(self.name, self.name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "p_values": list(self.p_values),
            "statistic": self.statistic,
            "pass": self.passed,
            "applicable": self.applicable,
            "params": to_builtin(self.params),
        }

    def __str__(self) -> str:
        return "TestResult(name={}, p_values={}, pass={})".format(
            self.name, self.p_values, self.passed
        )


def format_p_values(result: TestResult) -> str:
    if not result.p_values:
        return "n/a"
    return "/".join(f"{p:.4f}" for p in result.p_values)


def results_to_dataframe(results: Sequence[TestResult]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "name": r.name,
                "label": r.label,
                "p_values": format_p_values(r),
                "statistic": r.statistic,
                "pass": r.passed,
                "applicable": r.applicable,
            }
            for r in results
        ]
    )


def results_to_json(results: Sequence[TestResult], indent: int | None = 2) -> str:
    return json.dumps([r.to_dict() for r in results], indent=indent, allow_nan=False)


def results_table(results: Sequence[TestResult], title: str = "NIST SP 800-22") -> Table:
    table = Table(title=title)
    table.add_column("Test")
    table.add_column("p-value", justify="right")
    table.add_column("Pass", justify="center")

    for r in results:
        verdict = "Yes" if r.passed else "No"
        if not r.applicable:
            verdict += " (n/a)"
        table.add_row(r.label, format_p_values(r), verdict)

    return table


def write_report_csv(
    results: Sequence[TestResult], filename: FilePath, metadata: dict[str, str] | None = None
) -> None:
    """Writes a results table preceded by a ``# key: value`` metadata header."""
    metadata = {"format_version": REPORT_FORMAT_VERSION} | (metadata or {})
    write_csv_metadata(filename, metadata)

    results_to_dataframe(results).to_csv(filename, sep=";", index=False, mode="a")


class CSVReportLoader:
    @classmethod
    def load(cls, filename: FilePath) -> pd.DataFrame:
        return dispatch_to_appropriate_loader(filename, cls)

    @staticmethod
    def _load_v0_1(filename: FilePath) -> pd.DataFrame:
        df = pd.read_csv(
            filename,
            sep=";",
            comment="#",
            skip_blank_lines=True,
            keep_default_na=False,
            dtype={"name": str, "label": str, "p_values": str},
        )
        expected_columns = {"name", "p_values", "statistic", "pass", "applicable"}
        missing = expected_columns - set(df.columns)
        if missing:
            raise ValueError(f"Missing report columns: {sorted(missing)}")
        return df


def load_report(filename: FilePath) -> pd.DataFrame:
    return CSVReportLoader.load(filename)


def figure_data(results: Sequence[TestResult]) -> list[dict[str, Any]]:
    """Observed against expected counts for every test that records them."""
    figures = []
    for r in results:
        if "observed" in r.params and "expected" in r.params:
            observed = to_builtin(r.params["observed"])
            figures.append(
                {
                    "name": r.name,
                    "label": r.label,
                    "categories": to_builtin(
                        r.params.get("categories", list(range(len(observed))))
                    ),
                    "observed": observed,
                    "expected": to_builtin(r.params["expected"]),
                }
            )
    return figures


def ent_table(report: EntReport, alpha: float = 0.01, title: str = "ENT") -> Table:
    table = Table(title=title)
    table.add_column("Test")
    table.add_column("Expected")
    table.add_column("Result", justify="right")
    table.add_column("Pass", justify="center")

    verdicts = report.verdicts(alpha).values()
    for (test, condition, value), verdict in zip(report.rows(), verdicts):
        table.add_row(test, condition, value, "Yes" if verdict else "No")

    return table
