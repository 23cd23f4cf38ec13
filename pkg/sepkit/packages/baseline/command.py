import argparse
import csv
import logging
from pathlib import Path
from typing import Any

from rich import print

from sepkit.core.baselines import sphere_curves
from sepkit.core.errors import MissingFile, SepkitError, ValidationError
from sepkit.core.runner import Command, RunConfig, add_output_arguments
from sepkit.core.utils.formatting import mapping_table, rows_table
from sepkit.core.utils.io import write_csv, write_json
from sepkit.core.utils.ranges import parse_ints, parse_reals
from sepkit.packages.baseline.calculators import CALCULATORS, OPTIONAL, Calculator

log = logging.getLogger("sepkit.packages.baseline")

VACUOUS_EXIT_CODE = 3


def flatten(content: dict[str, Any], prefix: str = "") -> dict[str, Any]:
    flat = {}
    for key, value in content.items():
        if isinstance(value, dict):
            flat.update(flatten(value, f"{prefix}{key}."))
        else:
            flat[f"{prefix}{key}"] = value
    return flat


def read_batch(path: Path, calculator: Calculator) -> list[dict[str, Any]]:
    """
    Parameter rows of a batch CSV file, one column per parameter name.
    """
    if not path.is_file():
        raise MissingFile(path)
    lines = [x for x in path.read_text(encoding="utf-8").splitlines() if not x.startswith("#")]
    rows = []
    for number, row in enumerate(csv.DictReader(lines), start=1):
        values = {}
        for param in calculator.params:
            cell = (row.get(param.dest) or "").strip()
            try:
                values[param.dest] = param.type(cell) if cell else param.default
            except ValueError:
                raise ValidationError(
                    f"Batch row {number}: {param.dest}={cell!r} is not a valid value."
                ) from None
        rows.append(values)
    return rows


class Baseline(Command):
    """
    Closed-form probabilities and theorem bounds, one action per calculator.
    """

    name = "baseline"
    help = "Evaluate closed-form separability probabilities and theorem bounds"

    def setup_parser(self, parser: argparse.ArgumentParser):
        actions = parser.add_subparsers(dest="action", metavar="action", required=True)

        curve = actions.add_parser(
            "sphere-curve", help="log10 p_y of the uniform sphere against alpha, per dimension"
        )
        curve.add_argument(
            "--n", type=parse_ints, default=list(range(8, 26)), help="Dimensions, like 8..25"
        )
        curve.add_argument(
            "--alphas",
            type=parse_reals,
            default=parse_reals("0.8:0.99:0.01"),
            help="Thresholds, like 0.8:0.99:0.01",
        )
        curve.add_argument(
            "--exact", action="store_true", help="Integrate instead of the large n formula"
        )
        add_output_arguments(curve)
        curve.set_defaults(callback=self.sphere_curve)

        for calculator in CALCULATORS:
            action = actions.add_parser(
                calculator.name, help=calculator.help, description=calculator.help
            )
            for param in calculator.params:
                action.add_argument(
                    param.flag,
                    dest=param.dest,
                    type=param.type,
                    default=param.default,
                    choices=param.choices,
                    help=param.help,
                )
            action.add_argument(
                "--batch", type=Path, help="CSV file of parameter rows, one column per parameter"
            )
            add_output_arguments(action)
            action.set_defaults(callback=self.calculate, calculator=calculator)

    def sphere_curve(self, args: RunConfig) -> int:
        rows = sphere_curves(args.n, args.alphas, exact=args.exact)
        header = ["alpha"] + [f"n={n}" for n in args.n]
        provenance = args.provenance(exact=args.exact)
        if args.out_json:
            write_json(args.out_json, {"ns": args.n, "header": header, "rows": rows}, provenance)
        if args.out_csv:
            write_csv(args.out_csv, rows, header, provenance)
        if not (args.out_json or args.out_csv):
            print(rows_table("log10 p_y on the unit sphere", header, rows))
        return 0

    def _compute(self, calculator: Calculator, values: dict[str, Any]):
        for dest, value in values.items():
            if value is None and (calculator.name, dest) not in OPTIONAL:
                raise ValidationError(f"--{dest.replace('_', '-')} is required.")
        return calculator.compute(**values)

    def calculate(self, args: RunConfig) -> int:
        calculator: Calculator = args.calculator
        provenance = args.provenance(calculator=calculator.name)

        if args.batch is None:
            values = {p.dest: getattr(args, p.dest) for p in calculator.params}
            result, vacuous = self._compute(calculator, values)
            if args.out_json:
                write_json(
                    args.out_json,
                    {"params": values, "result": result, "vacuous": vacuous},
                    provenance,
                )
            if args.out_csv:
                flat = {**values, **flatten(result), "vacuous": vacuous}
                write_csv(args.out_csv, [list(flat.values())], list(flat), provenance)
            print(mapping_table(calculator.help, {**values, **result}))
            if vacuous:
                log.warning(f"The {calculator.name} bound is vacuous for these parameters.")
                return VACUOUS_EXIT_CODE
            return 0

        results = []
        for number, values in enumerate(read_batch(args.batch, calculator), start=1):
            try:
                result, vacuous = self._compute(calculator, values)
            except SepkitError as e:
                raise ValidationError(f"Batch row {number}: {e.message}") from None
            results.append({"params": values, "result": result, "vacuous": vacuous})

        flat_rows = [
            {**x["params"], **flatten(x["result"]), "vacuous": x["vacuous"]} for x in results
        ]
        header = list(dict.fromkeys(key for row in flat_rows for key in row))
        table = [[row.get(key) for key in header] for row in flat_rows]
        if args.out_json:
            write_json(args.out_json, {"rows": results}, provenance)
        if args.out_csv:
            write_csv(args.out_csv, table, header, provenance)
        if not (args.out_json or args.out_csv):
            print(rows_table(calculator.help, header, table))

        vacuous_rows = sum(x["vacuous"] for x in results)
        log.info(f"{len(results)} batch rows evaluated, {vacuous_rows} vacuous")
        return VACUOUS_EXIT_CODE if vacuous_rows else 0
