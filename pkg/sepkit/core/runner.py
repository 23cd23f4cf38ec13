from __future__ import annotations

import argparse
import importlib
import logging
from pathlib import Path
from typing import TYPE_CHECKING, Any, Callable

from sepkit.core.utils.io import provenance
from sepkit.settings import resolve_threads, settings

if TYPE_CHECKING:
    from argparse import _SubParsersAction

log = logging.getLogger("sepkit.core.runner")


class RunConfig(argparse.Namespace):
    """
    Parsed arguments of a subcommand.

    Only the attributes shared by subcommands are listed, each command adds its own.
    """

    command: str
    action: str | None
    seed: int | None
    threads: int | None
    alphas: list[float] | None
    out_json: Path | None
    out_csv: Path | None
    callback: Callable[["RunConfig"], int]
    argv: list[str]

    def worker_threads(self) -> int:
        return resolve_threads(getattr(self, "threads", None))

    def resolved_seed(self) -> int:
        seed = getattr(self, "seed", None)
        return settings.seed if seed is None else seed

    def provenance(self, **extra: Any) -> dict[str, Any]:
        seed = self.resolved_seed() if hasattr(self, "seed") else None
        return provenance(["sepkit", *self.argv], seed, **extra)


def add_output_arguments(parser: argparse.ArgumentParser, csv: bool = True):
    parser.add_argument("--out-json", type=Path, help="Write the result as JSON to this file")
    if csv:
        parser.add_argument("--out-csv", type=Path, help="Write the result as CSV to this file")


def add_random_arguments(parser: argparse.ArgumentParser, seed: bool = True):
    if seed:
        parser.add_argument("--seed", type=int, help="Seed of every random stream")
    parser.add_argument(
        "--threads",
        type=int,
        help="Worker threads, defaults to SEPKIT_THREADS. Results do not depend on it",
    )


def add_input_arguments(parser: argparse.ArgumentParser, flag: str = "--input"):
    parser.add_argument(flag, type=Path, required=True, help="CSV file with a header row")
    parser.add_argument("--label-column", help="Column holding class labels")
    parser.add_argument("--delimiter", default=",", help="Field separator, comma by default")


class Command:
    """
    A group of subcommands provided by a package.

    Packages expose a ``setup(runner)`` function adding their commands to the runner.
    """

    name: str
    help: str = ""

    def __init__(self, runner: "Runner"):
        self.runner = runner

    def setup_parser(self, parser: argparse.ArgumentParser):
        raise NotImplementedError


class Runner:
    def __init__(self, parents: list[argparse.ArgumentParser] | None = None):
        self.parser = argparse.ArgumentParser(
            prog="sepkit",
            description="Fisher separability of high-dimensional point clouds",
            parents=parents or [],
            allow_abbrev=False,
        )
        self.subparsers: "_SubParsersAction" = self.parser.add_subparsers(
            dest="command", metavar="command", required=True
        )
        self.commands: dict[str, Command] = {}

    def add_command(self, command: Command):
        parser = self.subparsers.add_parser(
            command.name, help=command.help, description=command.help
        )
        command.setup_parser(parser)
        self.commands[command.name] = command

    def load_packages(self, packages: list[str]):
        loaded_packages = []
        for package in packages:
            package_name = package.replace("sepkit.packages.", "")

            try:
                module = importlib.import_module(package)
                module.setup(self)
            except Exception:
                log.error(f"Failed to load package {package_name}", exc_info=True)
            else:
                loaded_packages.append(package_name)
        if loaded_packages:
            log.debug(f"Packages loaded: {', '.join(loaded_packages)}")
        else:
            log.warning("No package loaded.")

    def run(self, arguments: list[str]) -> int:
        args = self.parser.parse_args(arguments, namespace=RunConfig())
        args.argv = list(arguments)
        return args.callback(args)
