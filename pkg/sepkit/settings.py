import logging
import os
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import yaml

from sepkit.core.errors import ValidationError

if TYPE_CHECKING:
    from pathlib import Path

log = logging.getLogger("sepkit.settings")

DEFAULT_ALPHAS = [0.8, 0.9, 0.95, 0.98, 0.99]
DEFAULT_PACKAGES = [
    "sepkit.packages.preprocess",
    "sepkit.packages.separability",
    "sepkit.packages.baseline",
    "sepkit.packages.simulate",
    "sepkit.packages.corrector",
]
THREADS_ENV = "SEPKIT_THREADS"


@dataclass
class Settings:
    """
    Global sepkit settings

    Attributes
    ----------
    threads: int
        Default worker threads for pairwise products and Monte Carlo trials. The
        ``SEPKIT_THREADS`` environment variable and the ``--threads`` flag override it.
    block_size: int
        Rows of the pairwise product matrix computed at once by separability reports.
    default_alphas: list[float]
        Thresholds of a separability report when none are given.
    seed: int
        Seed of randomized commands when none is given.
    histogram_bins: int
        Bins of p_y histograms.
    log_file: str | None
        Path of the rotating log file, no file logging if empty.
    metrics_file: str | None
        Where to dump prometheus metrics after each command, in the textfile collector format.
    packages: list[str]
        List of packages providing the subcommands, loaded upon startup
    sentry_dsn: str
        Sentry DSN for crash reports, disabled if empty
    sentry_environment: str
        Environment reported to sentry
    """

    threads: int = 1
    block_size: int = 256
    default_alphas: list[float] = field(default_factory=lambda: list(DEFAULT_ALPHAS))
    seed: int = 0
    histogram_bins: int = 20

    log_file: str | None = None
    metrics_file: str | None = None

    packages: list[str] = field(default_factory=lambda: list(DEFAULT_PACKAGES))

    # sentry details
    sentry_dsn: str = ""
    sentry_environment: str = "production"


settings = Settings()


def _positive_int(content: dict, key: str, default: int) -> int:
    value = content.get(key, default)
    if value is None:
        return default
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise ValidationError(f"Setting {key!r} must be a positive integer, got {value!r}.")
    return value


def read_settings(path: "Path"):
    content = yaml.load(path.read_text(), yaml.Loader) or {}
    if not isinstance(content, dict):
        raise ValidationError(f"{path} must be a YAML mapping.")

    settings.threads = _positive_int(content, "threads", 1)
    settings.block_size = _positive_int(content, "block-size", 256)
    settings.histogram_bins = _positive_int(content, "histogram-bins", 20)
    settings.seed = int(content.get("seed") or 0)

    alphas = content.get("default-alphas") or list(DEFAULT_ALPHAS)
    try:
        settings.default_alphas = [float(x) for x in alphas]
    except (TypeError, ValueError):
        raise ValidationError("Setting 'default-alphas' must be a list of numbers.") from None

    settings.log_file = content.get("log-file") or None
    settings.metrics_file = content.get("metrics-file") or None
    settings.packages = content.get("packages") or list(DEFAULT_PACKAGES)

    if sentry := content.get("sentry"):
        settings.sentry_dsn = sentry.get("dsn") or ""
        settings.sentry_environment = sentry.get("environment") or "production"

    log.info("Settings loaded.")


def resolve_threads(flag: int | None) -> int:
    """
    Worker count: the ``--threads`` flag, then ``SEPKIT_THREADS``, then the settings.
    """
    if flag is not None:
        threads = flag
    elif env := os.environ.get(THREADS_ENV):
        try:
            threads = int(env)
        except ValueError:
            raise ValidationError(f"{THREADS_ENV}={env!r} is not an integer.") from None
    else:
        threads = settings.threads
    if threads < 1:
        raise ValidationError(f"The thread count must be positive, got {threads}.")
    return threads


def write_default_settings(path: "Path"):
    path.write_text(
        """# default worker threads, SEPKIT_THREADS and --threads take precedence
threads: 1

# rows of the pairwise product matrix computed at once
block-size: 256

# thresholds of a separability report when --alphas is not given
default-alphas:
  - 0.8
  - 0.9
  - 0.95
  - 0.98
  - 0.99

# seed of randomized commands when --seed is not given
seed: 0

# bins of p_y histograms
histogram-bins: 20

# rotating log file, leave empty to only log to the console
log-file:

# prometheus metrics dumped after each command (textfile collector format)
# leave empty if you don't know what this is
metrics-file:

# list of packages that will be loaded
packages:
  - sepkit.packages.preprocess
  - sepkit.packages.separability
  - sepkit.packages.baseline
  - sepkit.packages.simulate
  - sepkit.packages.corrector

# sentry details, leave empty if you don't know what this is
# https://sentry.io/ for error tracking
sentry:
    dsn: ""
    environment: "production"
"""
    )
