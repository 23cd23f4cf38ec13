import argparse
import logging
from pathlib import Path

from rich import print

from sepkit.core.dataset import export_csv, ingest_csv
from sepkit.core.models import LabeledDataset, PreprocessConfig, SelectionRule
from sepkit.core.preprocess import explained_variance, fit, transform
from sepkit.core.runner import Command, RunConfig, add_input_arguments
from sepkit.core.utils.formatting import mapping_table
from sepkit.core.utils.io import write_json

log = logging.getLogger("sepkit.packages.preprocess")


class Preprocess(Command):
    """
    Fit the centering, scaling and whitening pipeline on a CSV file and apply it.
    """

    name = "preprocess"
    help = "Fit a whitening model on a point cloud and transform it"

    def setup_parser(self, parser: argparse.ArgumentParser):
        add_input_arguments(parser)
        parser.add_argument(
            "--selection",
            choices=[x.value for x in SelectionRule],
            default=SelectionRule.condition.value,
            help="Component selection rule, the condition number rule by default",
        )
        parser.add_argument(
            "--ratio",
            type=float,
            default=0.1,
            help="Keep components with an eigenvalue above ratio * largest eigenvalue",
        )
        parser.add_argument("--components", type=int, help="Component count of --selection fixed")
        parser.add_argument("--no-whiten", action="store_true", help="Do not whiten")
        parser.add_argument(
            "--sphere", action="store_true", help="Project transformed points on the unit sphere"
        )
        parser.add_argument("--out-model", type=Path, help="Write the fitted model as JSON")
        parser.add_argument("--out-data", type=Path, help="Write the transformed points as CSV")
        parser.set_defaults(callback=self.run)

    def run(self, args: RunConfig) -> int:
        dataset = ingest_csv(args.input, args.label_column, args.delimiter)
        config = PreprocessConfig(
            selection=SelectionRule(args.selection),
            ratio=args.ratio,
            components=args.components,
            whiten=not args.no_whiten,
            sphere_project=args.sphere,
        )
        model = fit(dataset.data, config)
        explained = explained_variance(model, full=True)

        provenance = args.provenance(input=str(args.input))
        if args.out_model:
            write_json(args.out_model, model.to_dict(), provenance)
        if args.out_data:
            transformed = LabeledDataset(
                transform(model, dataset.data), dataset.labels, dataset.label_column
            )
            export_csv(transformed, args.out_data, args.delimiter, provenance)

        print(
            mapping_table(
                "Preprocessing",
                {
                    "points": dataset.data.n_points,
                    "dimension": model.dim,
                    "rule": model.rule,
                    "k_selected": model.k_selected,
                    "condition number": model.condition_number,
                    "explained variance": float(explained[model.k_selected - 1]),
                },
            )
        )
        return 0
