from typing import TYPE_CHECKING

from sepkit.packages.preprocess.command import Preprocess

if TYPE_CHECKING:
    from sepkit.core.runner import Runner


def setup(runner: "Runner"):
    runner.add_command(Preprocess(runner))
