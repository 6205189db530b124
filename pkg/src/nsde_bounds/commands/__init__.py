"""
Subcommands of the nsde-bounds command line, one class per operation.
"""

from .action import ActionCommand
from .base import (
    EXIT_CONFIG,
    EXIT_FAILURE,
    EXIT_NOT_CONVERGED,
    EXIT_NUMERIC,
    EXIT_OK,
    Command,
    CommandResult,
)
from .density import DensityCommand, SheuCheckCommand
from .dynamics import RnnBoundsCommand
from .flow import FlowCommand, StabilityCommand
from .linear import GramianCommand
from .montecarlo import MaureyCommand, SimulateCommand, VpiCommand
from .selftest import SelftestCommand

COMMANDS = {
    cls.name: cls
    for cls in (
        ActionCommand,
        GramianCommand,
        FlowCommand,
        StabilityCommand,
        SimulateCommand,
        MaureyCommand,
        VpiCommand,
        DensityCommand,
        SheuCheckCommand,
        RnnBoundsCommand,
        SelftestCommand,
    )
}

__all__ = [
    "COMMANDS",
    "EXIT_CONFIG",
    "EXIT_FAILURE",
    "EXIT_NOT_CONVERGED",
    "EXIT_NUMERIC",
    "EXIT_OK",
    "ActionCommand",
    "Command",
    "CommandResult",
    "DensityCommand",
    "FlowCommand",
    "GramianCommand",
    "MaureyCommand",
    "RnnBoundsCommand",
    "SelftestCommand",
    "SheuCheckCommand",
    "SimulateCommand",
    "StabilityCommand",
    "VpiCommand",
]
