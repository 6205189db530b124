"""
Utility functions for nsde-bounds.
"""

from .system_check import cap_threads, get_system_info, resolve_threads

__all__ = [
    "cap_threads",
    "get_system_info",
    "resolve_threads",
]
