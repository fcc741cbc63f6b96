"""This module contains tests for the utility functions and report persistence."""
import json

import pytest

from ks2lab.results import GramReport, IotaNormReport
from ks2lab.utils import load_results, read_json, write_json


def test_write_json_is_deterministic(tmp_path):
    """Test sorted keys, indentation and parent directories."""
    path = write_json({"b": 1, "a": [1, 2]}, tmp_path / "out" / "report.json")
    text = path.read_text()
    assert text.endswith("\n")
    assert text.index('"a"') < text.index('"b"')
    assert read_json(path) == {"a": [1, 2], "b": 1}


def test_report_to_json(tmp_path):
    """Test the JSON rendering of a report."""
    report = IotaNormReport(0.25, 0.5)
    text = report.to_json(tmp_path / "iota.json")
    assert json.loads(text)["holds"]
    assert read_json(tmp_path / "iota.json") == json.loads(text)


def test_save_and_load(tmp_path):
    """Test that a saved report loads again."""
    report = GramReport("paper", 2, "geometric", 0.0, [0.5, 0.5])
    path = str(tmp_path / "gram.pkl")
    report.save(path)
    loaded = load_results(path)
    assert loaded.diag_values == [0.5, 0.5]
    assert not loaded.orthonormal


def test_save_to_invalid_path(tmp_path):
    """Test that saving to a missing directory warns instead of raising."""
    with pytest.warns(UserWarning):
        IotaNormReport(0.25, 0.5).save(str(tmp_path / "missing" / "iota.pkl"))
