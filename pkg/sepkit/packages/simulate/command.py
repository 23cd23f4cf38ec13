import argparse
import logging
from typing import Any

from rich import print

from sepkit.core.errors import ValidationError
from sepkit.core.models import (
    BallParams,
    CubeParams,
    NoisyParams,
    SamplerFamily,
    SamplerSpec,
)
from sepkit.core.montecarlo import (
    PyMethod,
    Theorem,
    estimate_p_y_distribution,
    estimate_point_separability,
    estimate_set_separability,
    ks_uniform,
    verify_bound,
)
from sepkit.core.runner import Command, RunConfig, add_output_arguments, add_random_arguments
from sepkit.core.utils.formatting import mapping_table
from sepkit.core.utils.io import read_json, write_csv, write_json
from sepkit.settings import settings

log = logging.getLogger("sepkit.packages.simulate")

EXPERIMENTS = ("separability", "point", "p-y")


def _require(args: RunConfig, *names: str) -> dict[str, Any]:
    values = {}
    for name in names:
        value = getattr(args, name)
        if value is None:
            raise ValidationError(f"--{name.replace('_', '-')} is required here.")
        values[name] = value
    return values


def theorem_params(theorem: Theorem, args: RunConfig) -> BallParams | CubeParams | NoisyParams:
    if theorem in (Theorem.ball_single, Theorem.ball_pairs):
        return BallParams(theta=args.theta, **_require(args, "n", "M", "r"))
    if theorem is Theorem.cube_pairs:
        values = _require(args, "n", "M", "delta", "sigma0", "r0_sq")
        values["R0_sq"] = values.pop("r0_sq")
        return CubeParams(**values)
    return NoisyParams(**_require(args, "n", "M", "epsilon", "delta"))


class Simulate(Command):
    """
    Monte Carlo experiments: bound verification, separability rates and p_y distributions.
    """

    name = "simulate"
    help = "Run seeded Monte Carlo experiments"

    def setup_parser(self, parser: argparse.ArgumentParser):
        what = parser.add_mutually_exclusive_group(required=True)
        what.add_argument(
            "--theorem",
            choices=[x.value for x in Theorem],
            help="Check a theorem bound against its empirical success rate",
        )
        what.add_argument(
            "--experiment",
            choices=EXPERIMENTS,
            help="Separability rate of a whole set, of one point, or the p_y distribution",
        )

        sampler = parser.add_argument_group("sampler")
        sampler.add_argument("--spec", type=read_json, help="JSON file describing the sampler")
        sampler.add_argument("--family", choices=[x.value for x in SamplerFamily])
        sampler.add_argument("--density-bound", type=float, default=1.0)
        sampler.add_argument(
            "--cluster-origins",
            action="store_true",
            help="Center each discriminant on the cluster center of its point",
        )

        params = parser.add_argument_group("parameters")
        params.add_argument("--n", type=int, help="Dimension")
        params.add_argument("--M", type=int, help="Number of points per trial")
        params.add_argument("--r", type=float, help="Inner ball radius, ball theorems")
        params.add_argument("--theta", type=float, default=0.1)
        params.add_argument("--delta", type=float)
        params.add_argument("--sigma0", type=float)
        params.add_argument("--r0-sq", type=float)
        params.add_argument("--epsilon", type=float)
        params.add_argument("--alpha", type=float, default=1.0, help="Threshold, 1 by default")
        params.add_argument("--trials", type=int, default=1000)
        params.add_argument(
            "--subspace-dim",
            type=int,
            default=3,
            help="Dimension of the subspace holding the cluster centers of the noisy theorem",
        )
        params.add_argument("--method", choices=[x.value for x in PyMethod], default="empirical")
        params.add_argument("--bins", type=int, help="Histogram bins, from the settings")
        params.add_argument("--upper", type=float, help="Upper end of the histogram")

        add_random_arguments(parser)
        add_output_arguments(parser)
        parser.set_defaults(callback=self.run)

    def run(self, args: RunConfig) -> int:
        if args.theorem:
            return self.verify(args)
        return self.experiment(args)

    def verify(self, args: RunConfig) -> int:
        theorem = Theorem(args.theorem)
        params = theorem_params(theorem, args)
        result = verify_bound(
            theorem,
            params,
            args.trials,
            args.resolved_seed(),
            alpha=args.alpha,
            threads=args.worker_threads(),
            subspace_dim=args.subspace_dim,
        )
        payload = {"params": dict(params.__dict__), **result.to_dict()}
        provenance = args.provenance()
        if args.out_json:
            write_json(args.out_json, payload, provenance)
        if args.out_csv:
            experiment = result.result
            write_csv(
                args.out_csv,
                [
                    [
                        result.theorem,
                        experiment.trials,
                        experiment.successes,
                        experiment.empirical_rate,
                        experiment.theoretical_bound,
                        result.tolerance,
                        result.passed,
                    ]
                ],
                ["theorem", "trials", "successes", "rate", "bound", "tolerance", "pass"],
                provenance,
            )
        print(mapping_table(f"Verification of {result.theorem}", payload))
        if not result.passed:
            log.warning(f"The empirical rate of {result.theorem} is below its bound.")
        return 0

    def _sampler(self, args: RunConfig) -> SamplerSpec:
        if args.spec is not None:
            content = dict(args.spec)
            if args.seed is not None:
                content["seed"] = args.seed
            spec = SamplerSpec.from_dict(content)
        else:
            if args.family is None or args.n is None:
                raise ValidationError("Give either --spec or both --family and --n.")
            spec = SamplerSpec(
                SamplerFamily(args.family),
                args.n,
                args.resolved_seed(),
                density_bound=args.density_bound,
            )
        # provenance reports the seed actually used
        args.seed = spec.seed
        return spec

    def experiment(self, args: RunConfig) -> int:
        spec = self._sampler(args)
        M = _require(args, "M")["M"]
        threads = args.worker_threads()
        payload: dict[str, Any] = {"spec": spec.to_dict(), "M": M, "alpha": args.alpha}

        if args.experiment == "p-y":
            method = PyMethod(args.method)
            upper = args.upper
            if upper is None and method is PyMethod.analytic:
                upper = 2.0**-spec.n
            distribution = estimate_p_y_distribution(
                spec,
                M,
                args.alpha,
                args.trials,
                method=method,
                bins=args.bins or settings.histogram_bins,
                upper=upper,
                threads=threads,
            )
            payload["distribution"] = distribution.to_dict()
            if method is PyMethod.analytic:
                payload["ks_uniform"] = ks_uniform(distribution.samples, 2.0**-spec.n)
            edges = distribution.bin_edges
            rows = [
                [edges[i], edges[i + 1], int(count)] for i, count in enumerate(distribution.counts)
            ]
            header = ["bin_low", "bin_high", "count"]
            summary = {
                "count": distribution.samples.size,
                "mean": distribution.mean,
                "variance": distribution.variance,
                "standard error": distribution.standard_error,
            }
        else:
            estimate = (
                estimate_set_separability
                if args.experiment == "separability"
                else estimate_point_separability
            )
            result = estimate(
                spec,
                M,
                args.alpha,
                args.trials,
                threads=threads,
                cluster_origins=args.cluster_origins,
            )
            payload["result"] = result.to_dict()
            rows = [[result.trials, result.successes, result.empirical_rate]]
            header = ["trials", "successes", "rate"]
            summary = {**result.to_dict(), "standard error": result.standard_error}

        provenance = args.provenance()
        if args.out_json:
            write_json(args.out_json, payload, provenance)
        if args.out_csv:
            write_csv(args.out_csv, rows, header, provenance)
        print(mapping_table(f"{args.experiment} on {spec.family.value}, n={spec.n}", summary))
        return 0
