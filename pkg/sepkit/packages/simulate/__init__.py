from typing import TYPE_CHECKING

from sepkit.packages.simulate.command import Simulate

if TYPE_CHECKING:
    from sepkit.core.runner import Runner


def setup(runner: "Runner"):
    runner.add_command(Simulate(runner))
