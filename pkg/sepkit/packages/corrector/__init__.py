from typing import TYPE_CHECKING

from sepkit.packages.corrector.command import CorrectorCommand

if TYPE_CHECKING:
    from sepkit.core.runner import Runner


def setup(runner: "Runner"):
    runner.add_command(CorrectorCommand(runner))
