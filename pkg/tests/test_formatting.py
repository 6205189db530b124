"""
Tests for the JSON envelope and CSV output.
"""

import csv
import json
import os
from dataclasses import dataclass

import numpy as np
import pytest

from nsde_bounds import __version__
from nsde_bounds.config.loader import config_from_dict, config_hash
from nsde_bounds.formatting import DataConverter, ResponseFormatter


@dataclass
class _Point:
    x: np.ndarray
    value: float


class _WithDict:
    def to_dict(self):
        return {"a": np.float64(1.5), "b": np.array([1, 2])}


class TestDataConverter:
    """Test conversion of numerical results to JSON-ready data."""

    def test_non_finite_floats_become_none(self):
        data = DataConverter.to_jsonable({"nan": float("nan"), "inf": np.inf, "ok": np.float32(0.5)})
        assert data == {"nan": None, "inf": None, "ok": 0.5}

    def test_numpy_types(self):
        data = DataConverter.to_jsonable([np.int64(3), np.bool_(True), np.arange(3.0), (1, 2)])
        assert data == [3, True, [0.0, 1.0, 2.0], [1, 2]]
        assert isinstance(data[0], int)
        assert isinstance(data[1], bool)

    def test_dataclasses_and_to_dict(self):
        assert DataConverter.to_jsonable(_Point(x=np.array([1.0, np.nan]), value=2.0)) == {
            "x": [1.0, None], "value": 2.0}
        assert DataConverter.to_jsonable(_WithDict()) == {"a": 1.5, "b": [1, 2]}

    def test_dict_keys_are_strings(self):
        assert DataConverter.to_jsonable({1: "a"}) == {"1": "a"}

    @pytest.mark.parametrize("value,expected", [
        (0.1, "0.1"),
        (np.float64(1e-300), "1e-300"),
        (True, "true"),
        (np.bool_(False), "false"),
        (np.int32(7), "7"),
        (None, ""),
        ("label", "label"),
    ])
    def test_format_cell(self, value, expected):
        assert DataConverter.format_cell(value) == expected

    def test_write_csv_creates_directories(self, temp_dir):
        path = os.path.join(temp_dir, "nested", "table.csv")
        returned = DataConverter.write_csv(path, ["N", "mse"], [[8, 0.125], [16, np.float64(0.0625)]])

        assert returned == path
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        assert rows == [["N", "mse"], ["8", "0.125"], ["16", "0.0625"]]


class TestResponseFormatter:
    """Test the output envelope."""

    def setup_method(self):
        self.config = config_from_dict({"seed": 11, "T": 2.0})

    def test_success_envelope(self):
        response = ResponseFormatter.format_success_response("action", {"value": np.float64(0.5)}, self.config)

        assert list(response) == ["version", "command", "seed", "config_hash", "config", "result"]
        assert response["version"] == __version__
        assert response["command"] == "action"
        assert response["seed"] == 11
        assert response["config_hash"] == config_hash(self.config)
        assert response["config"]["T"] == 2.0
        assert response["result"] == {"value": 0.5}

    def test_seed_override(self):
        response = ResponseFormatter.format_success_response("simulate", {}, self.config, seed=3)
        assert response["seed"] == 3

    def test_error_response(self):
        response = ResponseFormatter.format_error_response(ValueError("bad x"), "run action", 2)
        assert response == {
            "error": True,
            "version": __version__,
            "operation": "run action",
            "message": "bad x",
            "type": "ValueError",
            "exit_code": 2,
        }

    def test_format_json_is_strict_and_stable(self):
        text = ResponseFormatter.format_json({"b": float("nan"), "a": [1.0]})
        assert text.endswith("\n")
        assert json.loads(text) == {"b": None, "a": [1.0]}
        assert "NaN" not in text
        assert text == ResponseFormatter.format_json({"b": float("nan"), "a": [1.0]})
