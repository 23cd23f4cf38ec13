from typing import TYPE_CHECKING

from sepkit.packages.baseline.command import Baseline

if TYPE_CHECKING:
    from sepkit.core.runner import Runner


def setup(runner: "Runner"):
    runner.add_command(Baseline(runner))
