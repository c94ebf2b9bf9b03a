import json
import math
from pathlib import Path

import pandas as pd
import pytest

from pychaoscipher.statistics.ent import EntReport
from pychaoscipher.statistics.report import (
    TestResult,
    ent_table,
    figure_data,
    format_p_values,
    load_report,
    results_table,
    results_to_dataframe,
    results_to_json,
    write_report_csv,
)
from pychaoscipher.utils.csv_metadata import read_csv_metadata

CURRENT_DIR = Path(__file__).parent.resolve()
DATA_PATH = CURRENT_DIR / "data"


@pytest.fixture
def results():
    return [
        TestResult.from_p_values(
            "monobit", [0.527089], 0.632456, 0.01,
            {"categories": ["zeros", "ones"], "observed": [4, 6], "expected": [5.0, 5.0]},
        ),
        TestResult.from_p_values("serial", [0.808792, 0.005], 1.6, 0.01),
        TestResult.not_applicable("runs", "frequency prerequisite failed"),
    ]


def test_from_p_values(results):
    monobit, serial, runs = results

    assert monobit.passed
    assert monobit.params["alpha"] == 0.01
    assert not serial.passed
    assert serial.p_value == 0.005
    assert not runs.passed
    assert not runs.applicable
    assert math.isnan(runs.p_value)


def test_p_values_are_clipped():
    result = TestResult.from_p_values("dft", [1.0000001, -1e-12, float("nan")], 0.0, 0.01)

    assert result.p_values == [1.0, 0.0, 0.0]
    assert not result.passed


def test_labels(results):
    assert [r.label for r in results] == ["Frequency (Monobit)", "Serial (m=3)", "Runs"]
    assert TestResult.not_applicable("custom", "").label == "custom"


def test_format_p_values(results):
    assert [format_p_values(r) for r in results] == ["0.5271", "0.8088/0.0050", "n/a"]


def test_results_to_json(results):
    report = json.loads(results_to_json(results))

    assert [row["name"] for row in report] == ["monobit", "serial", "runs"]
    assert report[0]["pass"] is True
    assert report[0]["p_values"] == [0.527089]
    assert report[2]["applicable"] is False
    assert report[2]["params"]["reason"] == "frequency prerequisite failed"


def test_results_table(results):
    table = results_table(results)

    assert table.row_count == 3
    assert [column.header for column in table.columns] == ["Test", "p-value", "Pass"]


def test_results_to_dataframe(results):
    df = results_to_dataframe(results)

    assert list(df.columns) == ["name", "label", "p_values", "statistic", "pass", "applicable"]
    assert df["pass"].tolist() == [True, False, False]


def test_load_report():
    df = load_report(DATA_PATH / "nist_report_v0_1.csv")

    assert df["name"].tolist() == ["monobit", "serial", "runs"]
    assert df["p_values"].tolist() == ["0.5271", "0.8088/0.6703", "n/a"]
    assert df["pass"].tolist() == [True, True, False]
    assert read_csv_metadata(DATA_PATH / "nist_report_v0_1.csv") == {
        "format_version": "0.1",
        "n_bits": "6480",
        "alpha": "0.01",
    }


def test_write_and_load_report(results, tmp_path):
    filename = tmp_path / "report.csv"
    write_report_csv(results, filename, {"n_bits": "10"})

    metadata = read_csv_metadata(filename)
    assert metadata == {"format_version": "0.1", "n_bits": "10"}

    df = load_report(filename)
    pd.testing.assert_frame_equal(df, results_to_dataframe(results), check_dtype=False)


def test_load_report_unknown_version():
    with pytest.warns(RuntimeWarning) as record:
        df = load_report(DATA_PATH / "nist_report_unknown_version.csv")

    assert "No loader for format version 9.9" in str(record[0].message)
    assert df["name"].tolist() == ["monobit"]


def test_load_report_missing_columns():
    with pytest.raises(ValueError) as excinfo:
        load_report(DATA_PATH / "nist_report_missing_columns.csv")

    assert "Missing report columns" in str(excinfo.value)


def test_figure_data(results):
    figures = figure_data(results)

    assert len(figures) == 1
    assert figures[0] == {
        "name": "monobit",
        "label": "Frequency (Monobit)",
        "categories": ["zeros", "ones"],
        "observed": [4, 6],
        "expected": [5.0, 5.0],
    }


def test_ent_table():
    report = EntReport.from_data(bytes(range(256)) * 64)
    table = ent_table(report)

    assert table.row_count == 6
    assert [column.header for column in table.columns] == ["Test", "Expected", "Result", "Pass"]
