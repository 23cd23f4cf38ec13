import logging
from pathlib import Path

from prometheus_client import CollectorRegistry, Counter, Gauge, Histogram, write_to_textfile

log = logging.getLogger("sepkit.core.metrics")

registry = CollectorRegistry()

trials_run = Counter(
    "sepkit_trials", "Monte Carlo trials run", ["family", "experiment"], registry=registry
)
trial_duration = Histogram(
    "sepkit_trial_duration_seconds",
    "Wall time of a Monte Carlo trial",
    ["family"],
    registry=registry,
    buckets=(0.0001, 0.00025, 0.0005, 0.001, 0.0025, 0.005, 0.01, 0.025, 0.05, 0.1, 0.5, 1.0),
)
empirical_rate = Gauge(
    "sepkit_empirical_rate",
    "Success rate of the last Monte Carlo experiment",
    ["family", "experiment"],
    registry=registry,
)
separability_blocks = Counter(
    "sepkit_separability_blocks",
    "Row blocks of pairwise products evaluated by the separability kernel",
    registry=registry,
)


def write_metrics(path: Path):
    """
    Dump every metric in the text exposition format, for a node exporter textfile collector.
    """
    write_to_textfile(str(path), registry)
    log.debug(f"Metrics written to {path}")
