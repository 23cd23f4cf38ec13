import argparse
import logging
import logging.handlers
import sys
from pathlib import Path

import sentry_sdk
from rich import print
from yaml import YAMLError

from sepkit import __version__ as sepkit_version
from sepkit.core.errors import SepkitError
from sepkit.core.metrics import write_metrics
from sepkit.core.runner import Runner
from sepkit.logging import init_logger
from sepkit.settings import read_settings, settings, write_default_settings

log = logging.getLogger("sepkit")


class CLIFlags(argparse.Namespace):
    version: bool
    config_file: Path
    reset_settings: bool
    disable_rich: bool
    debug: bool


def flags_parser() -> argparse.ArgumentParser:
    # no help here, the parser is reused as a parent of the subcommand parser
    parser = argparse.ArgumentParser(prog="sepkit", add_help=False, allow_abbrev=False)
    parser.add_argument("--version", "-V", action="store_true", help="Display sepkit's version")
    parser.add_argument(
        "--config-file", type=Path, help="Set the path to config.yml", default=Path("./config.yml")
    )
    parser.add_argument(
        "--reset-settings",
        action="store_true",
        help="Write the config file with the latest default configuration",
    )
    parser.add_argument("--disable-rich", action="store_true", help="Disable rich log format")
    parser.add_argument("--debug", action="store_true", help="Enable debug logs")
    return parser


def global_arguments(arguments: list[str]) -> list[str]:
    """
    The arguments before the subcommand, subcommand flags never reach the global parser.
    """
    for index, argument in enumerate(arguments):
        if not argument.startswith("-"):
            previous = arguments[index - 1] if index else ""
            if previous != "--config-file":
                return arguments[:index]
    return list(arguments)


def parse_cli_flags(arguments: list[str]) -> CLIFlags:
    args, _ = flags_parser().parse_known_args(global_arguments(arguments), namespace=CLIFlags())
    return args


def reset_settings(path: Path):
    write_default_settings(path)
    print(f"[green]A new settings file has been written at [blue]{path}[/blue].[/green]")
    sys.exit(0)


def init_sentry():
    if settings.sentry_dsn:
        sentry_sdk.init(
            dsn=settings.sentry_dsn,
            environment=settings.sentry_environment,
            release=sepkit_version,
        )
        log.info("Sentry initialized.")


def main(arguments: list[str] | None = None):
    if arguments is None:
        arguments = sys.argv[1:]
    cli_flags = parse_cli_flags(arguments)
    if cli_flags.version:
        print(f"sepkit - {sepkit_version}")
        sys.exit(0)
    if cli_flags.reset_settings:
        reset_settings(cli_flags.config_file)

    # a missing config file is fine, defaults apply
    if cli_flags.config_file.is_file():
        try:
            read_settings(cli_flags.config_file)
        except YAMLError:
            print("[red]Your YAML is invalid!\nError parsing config file, please check it.[/red]")
            sys.exit(2)
        except SepkitError as e:
            print(f"[red]{e.message}[/red]")
            sys.exit(e.exit_code)

    queue_listener: logging.handlers.QueueListener | None = None
    code = 1
    try:
        queue_listener = init_logger(cli_flags.disable_rich, cli_flags.debug, settings.log_file)
        init_sentry()

        runner = Runner(parents=[flags_parser()])
        runner.load_packages(settings.packages)
        code = runner.run(arguments)
    except SepkitError as e:
        print(f"[red]{e.message}[/red]", file=sys.stderr)
        code = e.exit_code
    except OSError as e:
        print(f"[red]{e}[/red]", file=sys.stderr)
        code = 1
    except SystemExit as e:
        # argparse errors and --help
        code = e.code if isinstance(e.code, int) else (0 if e.code is None else 2)
    except KeyboardInterrupt:
        log.warning("Interrupted.")
        code = 130
    except Exception:
        log.critical("Unhandled exception.", exc_info=True)
        code = 1
    finally:
        if settings.metrics_file:
            try:
                write_metrics(Path(settings.metrics_file))
            except OSError:
                log.error("Failed to write metrics.", exc_info=True)
        if queue_listener:
            queue_listener.stop()
    sys.exit(code)


if __name__ == "__main__":
    main()
