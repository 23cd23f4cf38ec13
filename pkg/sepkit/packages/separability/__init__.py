from typing import TYPE_CHECKING

from sepkit.packages.separability.command import Separability

if TYPE_CHECKING:
    from sepkit.core.runner import Runner


def setup(runner: "Runner"):
    runner.add_command(Separability(runner))
