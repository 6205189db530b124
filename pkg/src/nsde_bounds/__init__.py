"""
nsde-bounds - minimum-action bounds and Monte Carlo checks for control-affine neural SDEs.

This package exposes symbols lazily to avoid import side-effects when
running `python -m nsde_bounds.cli`.
"""

from typing import TYPE_CHECKING

__version__ = "0.1.0"
__all__ = ["ControlAffineSystem", "solve_min_action", "__version__"]

if TYPE_CHECKING:
    # For type checkers only; avoids runtime import
    from .control.solver import solve_min_action as solve_min_action
    from .dynamics.system import ControlAffineSystem as ControlAffineSystem


def __getattr__(name):  # pragma: no cover - trivial lazy import
    if name == "ControlAffineSystem":
        from .dynamics.system import ControlAffineSystem as _ControlAffineSystem
        return _ControlAffineSystem
    if name == "solve_min_action":
        from .control.solver import solve_min_action as _solve_min_action
        return _solve_min_action
    raise AttributeError(f"module 'nsde_bounds' has no attribute {name!r}")
