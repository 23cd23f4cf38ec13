import argparse
import logging

from rich import print

from sepkit.core.dataset import ingest_csv
from sepkit.core.runner import (
    Command,
    RunConfig,
    add_input_arguments,
    add_output_arguments,
    add_random_arguments,
)
from sepkit.core.separability import critical_level_reached, separability_report
from sepkit.core.utils.formatting import report_table
from sepkit.core.utils.io import write_csv, write_json
from sepkit.core.utils.ranges import parse_reals
from sepkit.settings import settings

log = logging.getLogger("sepkit.packages.separability")


class Separability(Command):
    """
    Separability report of a (usually whitened) CSV file.
    """

    name = "separability"
    help = "Count the points that cannot be separated from the rest of a cloud"

    def setup_parser(self, parser: argparse.ArgumentParser):
        add_input_arguments(parser)
        parser.add_argument(
            "--alphas",
            type=parse_reals,
            help="Thresholds, as a list (0.8,0.9) or a range (0.8:0.99:0.01). "
            "Defaults to the default-alphas setting",
        )
        parser.add_argument(
            "--sphere", action="store_true", help="Project the points on the unit sphere first"
        )
        parser.add_argument(
            "--effective-dimension",
            action="store_true",
            help="Add the sphere dimension giving the same mean p_y",
        )
        parser.add_argument("--block-size", type=int, help="Rows of products computed at once")
        add_random_arguments(parser, seed=False)
        add_output_arguments(parser)
        parser.set_defaults(callback=self.run)

    def run(self, args: RunConfig) -> int:
        dataset = ingest_csv(args.input, args.label_column, args.delimiter)
        alphas = args.alphas if args.alphas is not None else settings.default_alphas
        report = separability_report(
            dataset,
            alphas,
            args.sphere,
            threads=args.worker_threads(),
            block_size=args.block_size or settings.block_size,
            with_effective_dimension=args.effective_dimension,
        )

        provenance = args.provenance(input=str(args.input))
        payload = report.to_dict()
        payload["critical_level_reached"] = critical_level_reached(report)
        if report.n_classes is not None:
            payload["critical_level_reached_star"] = critical_level_reached(report, starred=True)
        if args.out_json:
            write_json(args.out_json, payload, provenance)
        if args.out_csv:
            table = report.table()
            write_csv(args.out_csv, table[1:], table[0], provenance)

        print(report_table(report))
        return 0
