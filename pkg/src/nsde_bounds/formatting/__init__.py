"""
Formatter module for nsde-bounds.

This module provides the JSON output envelope and CSV table writing.
"""

from .data_converter import DataConverter
from .response_formatter import ResponseFormatter

__all__ = [
    "DataConverter",
    "ResponseFormatter",
]
