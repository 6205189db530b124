"""
Base classes and utilities for nsde-bounds commands.

This module provides the foundation for all subcommands, including:
- Base command class with common functionality
- Problem assembly from the run configuration
- Response formatting and CSV output
- Error handling and exit-code mapping
"""

import logging
import os
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..config.models import RunConfig
from ..core.exceptions import NumericalError
from ..dynamics.families import build_system
from ..dynamics.system import ControlAffineSystem
from ..formatting import DataConverter, ResponseFormatter
from ..montecarlo.simulate import NeuralSdeModel, Sampler, sampler_from_config
from ..validators import ValidationError, validate_box, validate_vector

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_NOT_CONVERGED = 4


class CommandResult:
    """Payload of a run plus the exit code it should end with."""

    def __init__(self, payload: Dict[str, Any], exit_code: int = EXIT_OK):
        self.payload = payload
        self.exit_code = exit_code


class Command:
    """Base class for nsde-bounds subcommands.

    This class provides common functionality used by all commands:
    - Standardized logging
    - System and model assembly from the config
    - Response formatting
    - Error handling
    """

    name = "command"

    def __init__(self, config: RunConfig, threads: int = 1, csv_dir: Optional[str] = None):
        """Initialize the command.

        Args:
            config: Resolved run configuration
            threads: Worker threads
            csv_dir: Directory for CSV tables, if requested
        """
        self.config = config
        self.threads = threads
        self.csv_dir = csv_dir
        self.csv_files: List[str] = []
        self.logger = logging.getLogger(f"nsde-bounds.{self.__class__.__name__.lower()}")
        self._system: Optional[ControlAffineSystem] = None

    def run(self) -> Tuple[Any, int]:
        """Compute the result; returns (result, exit code)."""
        raise NotImplementedError

    def execute(self) -> CommandResult:
        """Run the command and wrap its result or error."""
        try:
            result, exit_code = self.run()
        except Exception as e:
            return self._handle_error(f"run {self.name}", e)
        if self.csv_files:
            if isinstance(result, dict):
                result = {**result, "csv_files": self.csv_files}
        return CommandResult(self._format_response(result), exit_code)

    def _format_response(self, result: Any) -> Dict[str, Any]:
        """Format the result into the output envelope."""
        return ResponseFormatter.format_success_response(self.name, result, self.config)

    def _handle_error(self, operation: str, error: Exception) -> CommandResult:
        """Log an error and map it to an exit code.

        Args:
            operation: Description of the operation that failed
            error: The exception that occurred

        Returns:
            CommandResult with the error object
        """
        if isinstance(error, (ValidationError, ValueError)):
            exit_code = EXIT_CONFIG
        elif isinstance(error, NumericalError):
            exit_code = EXIT_NUMERIC
        else:
            exit_code = EXIT_FAILURE
        self.logger.error(f"Failed to {operation}: {error}")
        if exit_code == EXIT_FAILURE:
            self.logger.debug("Unexpected error", exc_info=error)
        return CommandResult(ResponseFormatter.format_error_response(error, operation, exit_code), exit_code)

    def _write_csv(self, name: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
        """Write a table into the CSV directory when one was given."""
        if not self.csv_dir:
            return
        path = DataConverter.write_csv(os.path.join(self.csv_dir, f"{name}.csv"), header, rows)
        self.csv_files.append(path)
        self.logger.info(f"Wrote {path}")

    # problem assembly

    def system(self) -> ControlAffineSystem:
        if self._system is None:
            if self.config.system is None:
                raise ValidationError(f"'{self.name}' needs a 'system' section in the config")
            self._system = build_system(self.config.system, self.config.box, self.config.seed)
            self.logger.debug(f"System: {self._system.describe()}")
        return self._system

    def point(self, field: str) -> np.ndarray:
        value = getattr(self.config, field)
        if value is None:
            raise ValidationError(f"'{self.name}' needs '{field}' in the config")
        return validate_vector(value, self.system().dimension, field)

    def box(self, default_half_width: float = 2.0,
            around: Optional[Sequence[np.ndarray]] = None) -> Tuple[np.ndarray, np.ndarray]:
        """Configured box, or a box of the given half-width around the given points (or the origin)."""
        d = self.system().dimension
        if self.config.box is not None:
            return validate_box(self.config.box.lo, self.config.box.hi, d)
        centres = np.array(around) if around else np.zeros((1, d))
        return centres.min(axis=0) - default_half_width, centres.max(axis=0) + default_half_width

    def model(self) -> NeuralSdeModel:
        system = self.system()
        if self.config.alpha is None:
            alpha = np.zeros(system.dimension)
            alpha[0] = 1.0
            self.logger.info("No alpha in config; reading out the first coordinate")
        else:
            alpha = np.asarray(self.config.alpha, dtype=float)
        return NeuralSdeModel(system=system, alpha=alpha, T=self.config.T, L=self.config.monte_carlo.L)

    def sampler(self) -> Sampler:
        return sampler_from_config(self.config.monte_carlo.sampler, self.system().dimension)
