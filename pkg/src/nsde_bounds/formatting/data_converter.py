"""
Data converter for nsde-bounds.

This module converts numerical results into JSON-ready values and writes
tabular results as CSV.
"""

import csv
import dataclasses
import math
import os
from typing import Any, Iterable, Sequence

import numpy as np


class DataConverter:
    """Converts numpy-heavy results into plain JSON and CSV data."""

    @staticmethod
    def to_jsonable(value: Any) -> Any:
        """Recursively convert a value to JSON-compatible types.

        Objects with ``to_dict`` are converted through it; dataclasses through
        their fields. Non-finite floats become None since JSON has no NaN.

        Args:
            value: Value to convert

        Returns:
            Structure of dict, list, str, int, float, bool and None
        """
        if hasattr(value, "to_dict") and callable(value.to_dict):
            return DataConverter.to_jsonable(value.to_dict())
        if dataclasses.is_dataclass(value) and not isinstance(value, type):
            return DataConverter.to_jsonable(
                {f.name: getattr(value, f.name) for f in dataclasses.fields(value)}
            )
        if isinstance(value, dict):
            return {str(k): DataConverter.to_jsonable(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [DataConverter.to_jsonable(v) for v in value]
        if isinstance(value, np.ndarray):
            return DataConverter.to_jsonable(value.tolist())
        if isinstance(value, (bool, np.bool_)):
            return bool(value)
        if isinstance(value, (int, np.integer)):
            return int(value)
        if isinstance(value, (float, np.floating)):
            number = float(value)
            return number if math.isfinite(number) else None
        return value

    @staticmethod
    def format_cell(value: Any) -> str:
        """CSV cell text: repr for floats so values round-trip, no locale formatting."""
        if isinstance(value, (bool, np.bool_)):
            return "true" if value else "false"
        if isinstance(value, (float, np.floating)):
            return repr(float(value))
        if isinstance(value, (int, np.integer)):
            return str(int(value))
        if value is None:
            return ""
        return str(value)

    @staticmethod
    def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
        """Write a comma-separated table with a header row.

        Returns:
            The path written
        """
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(list(header))
            for row in rows:
                writer.writerow([DataConverter.format_cell(v) for v in row])
        return path
