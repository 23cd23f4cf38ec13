import argparse
import logging
from pathlib import Path

from rich import print

from sepkit.core.corrector import cascade_stages, evaluate, flag_many, train_corrector
from sepkit.core.dataset import ingest_csv
from sepkit.core.errors import ValidationError
from sepkit.core.models import Cascade, Corrector, PreprocessConfig, SelectionRule
from sepkit.core.runner import Command, RunConfig, add_output_arguments
from sepkit.core.utils.formatting import mapping_table
from sepkit.core.utils.io import read_json, write_csv, write_json

log = logging.getLogger("sepkit.packages.corrector")


def load_corrector(path: Path) -> Corrector | Cascade:
    content = read_json(path)
    kind = content.get("kind")
    if kind == "corrector":
        return Corrector.from_dict(content)
    if kind == "cascade":
        return Cascade.from_dict(content)
    raise ValidationError(f"{path} holds neither a corrector nor a cascade (kind {kind!r}).")


def _csv_arguments(parser: argparse.ArgumentParser, *flags: str):
    for flag in flags:
        parser.add_argument(flag, type=Path, required=True, help="CSV file with a header row")
    parser.add_argument("--delimiter", default=",", help="Field separator, comma by default")


def _id_argument(parser: argparse.ArgumentParser, source: str):
    parser.add_argument(
        "--id-column", help=f"Column of the {source} file identifying each point, not a feature"
    )


class CorrectorCommand(Command):
    """
    Train, apply, evaluate and chain one-shot correctors.
    """

    name = "corrector"
    help = "Fisher discriminant correctors flagging the known errors of a legacy system"

    def setup_parser(self, parser: argparse.ArgumentParser):
        actions = parser.add_subparsers(dest="action", metavar="action", required=True)

        train = actions.add_parser("train", help="Train a corrector on one cluster of errors")
        _csv_arguments(train, "--correct", "--errors")
        _id_argument(train, "errors")
        train.add_argument("--alpha", type=float, default=0.8, help="Threshold, 0.8 by default")
        train.add_argument(
            "--selection",
            choices=[x.value for x in SelectionRule],
            default=SelectionRule.condition.value,
        )
        train.add_argument("--ratio", type=float, default=0.1)
        train.add_argument("--components", type=int)
        add_output_arguments(train, csv=False)
        train.set_defaults(callback=self.train)

        flag = actions.add_parser("flag", help="Flag the rows of a CSV file")
        flag.add_argument("--model", type=Path, required=True, help="Corrector or cascade JSON")
        _csv_arguments(flag, "--input")
        _id_argument(flag, "input")
        add_output_arguments(flag)
        flag.set_defaults(callback=self.flag)

        evaluation = actions.add_parser("eval", help="Detection and damage rates on holdout sets")
        evaluation.add_argument("--model", type=Path, required=True)
        _csv_arguments(evaluation, "--correct", "--errors")
        _id_argument(evaluation, "errors")
        add_output_arguments(evaluation, csv=False)
        evaluation.set_defaults(callback=self.evaluate)

        cascade = actions.add_parser("cascade", help="Chain correctors, the first flag wins")
        cascade.add_argument(
            "--models",
            type=Path,
            nargs="+",
            required=True,
            help="Corrector or cascade files, in order",
        )
        add_output_arguments(cascade, csv=False)
        cascade.set_defaults(callback=self.cascade)

    def train(self, args: RunConfig) -> int:
        correct = ingest_csv(args.correct, delimiter=args.delimiter)
        errors = ingest_csv(args.errors, args.id_column, args.delimiter)
        config = PreprocessConfig(
            selection=SelectionRule(args.selection),
            ratio=args.ratio,
            components=args.components,
        )
        corrector = train_corrector(
            correct.data, errors.data, args.alpha, config=config, error_ids=errors.labels
        )
        if args.out_json:
            write_json(args.out_json, corrector.to_dict(), args.provenance())
        print(
            mapping_table(
                "Corrector",
                {
                    "components": corrector.model.k_selected,
                    "threshold": corrector.threshold,
                    "errors": len(corrector.error_ids),
                    "cloud": correct.data.n_points,
                },
            )
        )
        return 0

    def flag(self, args: RunConfig) -> int:
        model = load_corrector(args.model)
        dataset = ingest_csv(args.input, args.id_column, args.delimiter)
        data = dataset.data
        if isinstance(model, Cascade):
            stages = cascade_stages(model, data)
            flagged = stages >= 0
        else:
            flagged = flag_many(model, data)
            stages = None

        provenance = args.provenance(model=str(args.model), input=str(args.input))
        rows: list[list[object]] = []
        for index, value in enumerate(flagged):
            row: list[object] = [index]
            if dataset.labels is not None:
                row.append(dataset.labels[index])
            row.append(bool(value))
            if stages is not None:
                row.append(int(stages[index]) if stages[index] >= 0 else "")
            rows.append(row)
        header = ["row"] + (["id"] if dataset.labels is not None else []) + ["flagged"]
        header += ["stage"] if stages is not None else []
        if args.out_json:
            write_json(args.out_json, {"header": header, "rows": rows}, provenance)
        if args.out_csv:
            write_csv(args.out_csv, rows, header, provenance)
        print(
            mapping_table(
                "Flagged inputs", {"rows": data.n_points, "flagged": int(flagged.sum())}
            )
        )
        return 0

    def evaluate(self, args: RunConfig) -> int:
        model = load_corrector(args.model)
        correct = ingest_csv(args.correct, delimiter=args.delimiter).data
        errors = ingest_csv(args.errors, args.id_column, args.delimiter).data
        result = evaluate(model, correct, errors)
        if args.out_json:
            write_json(args.out_json, result.to_dict(), args.provenance(model=str(args.model)))
        print(mapping_table("Corrector evaluation", result.to_dict()))
        return 0

    def cascade(self, args: RunConfig) -> int:
        cascade = Cascade()
        for path in args.models:
            model = load_corrector(path)
            correctors = model.correctors if isinstance(model, Cascade) else (model,)
            for corrector in correctors:
                if cascade.correctors and corrector.dim != cascade.correctors[0].dim:
                    raise ValidationError(
                        f"{path} expects dimension {corrector.dim}, "
                        f"the cascade {cascade.correctors[0].dim}."
                    )
                cascade = cascade.append(corrector)
        if args.out_json:
            write_json(args.out_json, cascade.to_dict(), args.provenance())
        print(mapping_table("Cascade", {"stages": len(cascade)}))
        return 0
