"""
Command-line entry point for nsde-bounds.

This module wires the subcommands to a click group, providing:
- Configuration loading and validation
- Logging setup
- Seed and thread overrides
- JSON output to stdout or --out, CSV tables to --csv-dir
- Exit codes: 0 ok, 2 config, 3 numerical failure, 4 not converged
"""

import logging
import sys
from typing import Optional, Type

import click
from rich.console import Console
from rich.table import Table

from . import __version__
from .commands import COMMANDS, EXIT_CONFIG, Command
from .config.loader import load_config
from .core.logging import setup_logging
from .formatting import ResponseFormatter
from .utils.system_check import cap_threads, get_system_info, resolve_threads

logger = logging.getLogger("nsde-bounds.cli")


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as f:
            f.write(text)
    else:
        click.echo(text, nl=False)


def _print_selftest_table(payload: dict) -> None:
    checks = payload.get("result", {}).get("checks", [])
    table = Table(title="nsde-bounds selftest")
    table.add_column("check")
    table.add_column("value", justify="right")
    table.add_column("tolerance", justify="right")
    table.add_column("status")
    for check in checks:
        status = "[green]pass[/green]" if check["passed"] else "[red]FAIL[/red]"
        value = check["value"]
        table.add_row(check["name"], "n/a" if value is None else f"{value:.3g}",
                      f"{check['tolerance']:g}", status)
    Console(stderr=True).print(table)


def _run(command_cls: Type[Command], config_path: Optional[str], out: Optional[str],
         seed: Optional[int], threads: Optional[int], csv_dir: Optional[str]) -> None:
    try:
        config = load_config(config_path)
        resolved_threads = cap_threads(resolve_threads(threads, config.threads))
    except ValueError as e:
        logging.basicConfig(level=logging.ERROR, stream=sys.stderr)
        logger.error(f"Configuration error: {e}")
        _emit(ResponseFormatter.format_json(
            ResponseFormatter.format_error_response(e, "load configuration", EXIT_CONFIG)), out)
        sys.exit(EXIT_CONFIG)

    setup_logging(config.logging)
    updates = {"threads": resolved_threads}
    if seed is not None:
        updates["seed"] = seed
    config = config.model_copy(update=updates)

    info = get_system_info()
    logger.debug(f"Python {info['python_version']}, numpy {info['numpy_version']}, "
                 f"scipy {info['scipy_version']}, {info['cpu_count']} CPUs")
    logger.info(f"Running {command_cls.name} (seed={config.seed}, threads={resolved_threads})")

    outcome = command_cls(config, threads=resolved_threads, csv_dir=csv_dir).execute()
    _emit(ResponseFormatter.format_json(outcome.payload), out)
    if command_cls.name == "selftest" and "result" in outcome.payload:
        _print_selftest_table(outcome.payload)
    sys.exit(outcome.exit_code)


def _make_command(name: str, command_cls: Type[Command]) -> click.Command:
    @click.command(name=name, help=(command_cls.__doc__ or "").strip())
    @click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                  help="JSON run configuration (default: $NSDE_BOUNDS_CONFIG)")
    @click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None,
                  help="Write the JSON result here instead of stdout")
    @click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None,
                  help="Base seed (overrides the config)")
    @click.option("--threads", type=click.IntRange(1), default=None,
                  help="Worker threads (default: $NSDE_BOUNDS_THREADS, then the config)")
    @click.option("--csv-dir", type=click.Path(file_okay=False), default=None,
                  help="Directory for CSV tables")
    def command(config_path, out, seed, threads, csv_dir):
        _run(command_cls, config_path, out, seed, threads, csv_dir)

    return command


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="nsde-bounds")
def cli() -> None:
    """Minimum-action bounds, density checks and Monte Carlo rates for neural SDEs."""


for _name, _cls in COMMANDS.items():
    cli.add_command(_make_command(_name, _cls))


def main() -> None:
    """Main entry point for the command line."""
    cli(prog_name="nsde-bounds")


if __name__ == "__main__":
    main()
