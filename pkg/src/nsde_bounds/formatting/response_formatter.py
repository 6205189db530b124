"""
Response formatter for nsde-bounds.

Every subcommand returns the same envelope so runs can be compared byte for
byte: version, command, seed, config hash, resolved config and the result.
No timestamps are included.
"""

import json
from typing import Any, Dict, Optional

from .. import __version__
from ..config.loader import config_hash
from ..config.models import RunConfig
from .data_converter import DataConverter


class ResponseFormatter:
    """Formats command results into the JSON output envelope."""

    @staticmethod
    def format_json(data: Any) -> str:
        """Serialize with fixed indentation and key order from the data itself."""
        return json.dumps(DataConverter.to_jsonable(data), indent=2, allow_nan=False) + "\n"

    @staticmethod
    def format_success_response(command: str, result: Any, config: RunConfig,
                                seed: Optional[int] = None) -> Dict[str, Any]:
        """Envelope for a completed run.

        Args:
            command: Subcommand name
            result: Result object or dictionary
            config: Resolved configuration (defaults filled)
            seed: Seed actually used; defaults to ``config.seed``

        Returns:
            JSON-ready dictionary
        """
        return {
            "version": __version__,
            "command": command,
            "seed": config.seed if seed is None else seed,
            "config_hash": config_hash(config),
            "config": config.model_dump(mode="json"),
            "result": DataConverter.to_jsonable(result),
        }

    @staticmethod
    def format_error_response(error: Exception, operation: str, exit_code: int) -> Dict[str, Any]:
        """Error object in the shape the command layer reports failures."""
        return {
            "error": True,
            "version": __version__,
            "operation": operation,
            "message": str(error),
            "type": type(error).__name__,
            "exit_code": exit_code,
        }
