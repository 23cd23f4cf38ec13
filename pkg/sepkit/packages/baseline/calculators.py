"""
The analytic calculators behind ``sepkit baseline``.

Each calculator lists its parameters and turns them into a result mapping, along with whether
the result is vacuous (the bound guarantees nothing).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

from sepkit.core import baselines
from sepkit.core.errors import ValidationError
from sepkit.core.models import BallParams, CubeParams, NoisyParams, SmacParams


@dataclass(frozen=True)
class Param:
    dest: str
    type: Callable[[str], Any]
    help: str
    default: Any = None
    choices: tuple[str, ...] | None = None

    @property
    def flag(self) -> str:
        return "--" + self.dest.replace("_", "-")


@dataclass(frozen=True)
class Calculator:
    name: str
    help: str
    params: list[Param]
    compute: Callable[..., tuple[dict[str, Any], bool]]


def _ball(n: int, M: int, r: float, theta: float):
    params = BallParams(n=n, M=M, r=r, theta=theta)
    bounds = baselines.ball_theorem_bounds(params)
    return {"rho": params.rho, **bounds.to_dict()}, bounds.all_pairs.vacuous


def _corollary(n: int, r: float, theta: float):
    capacity = baselines.corollary_max_M(n, r, theta)
    return capacity.to_dict(), not capacity.single_bound > 0


def _cube(n: int, M: int, delta: float, sigma0: float, R0_sq: float):
    bounds = baselines.cube_theorem_bounds(
        CubeParams(n=n, M=M, delta=delta, sigma0=sigma0, R0_sq=R0_sq)
    )
    return bounds.to_dict(), bounds.all_pairs.vacuous


def _smac(A: float, B: float, C: float, delta: float, N_b: int, n: int | None):
    bound = baselines.smac_max_M(SmacParams(A=A, B=B, C=C, delta=delta, N_b=N_b))
    return bound.to_dict([n] if n is not None else []), False


def _noisy(n: int, M: int, epsilon: float, delta: float):
    bound = baselines.noisy_bound(NoisyParams(n=n, M=M, epsilon=epsilon, delta=delta))
    return bound.to_dict(), bound.vacuous


def _logconcave(n: int, alpha_class: float, a: float, b: float, delta: float):
    return {"max_M": baselines.logconcave_max_M(n, alpha_class, a, b, delta)}, False


def _exp_separability(n: int, a: float, b: float, delta: float):
    return {"max_M": baselines.exponential_separability_max_M(n, a, b, delta)}, False


def _bounded_density(n: int, alpha: float, r: float, C: float, theta: float):
    return {"max_M": baselines.bounded_density_max_M(n, alpha, r, C, theta)}, False


def _excluded_volume(n: int, alpha: float, size: int):
    return {"fraction": baselines.excluded_volume_fraction(n, alpha, size)}, False


def _effective_dim(mean_p_y: float, alpha: float | None, law: str):
    if law == "ball":
        return {"effective_dimension": baselines.effective_dimension_ball(mean_p_y)}, False
    if alpha is None:
        raise ValidationError("--alpha is required for the sphere law.")
    dimension = baselines.effective_dimension(mean_p_y, alpha)
    return {"effective_dimension": dimension.value, "nearest": dimension.nearest}, False


def _ball_alpha1(n: int, a: float | None):
    content: dict[str, Any] = {
        "mean_p_y": baselines.mean_p_y_ball(n),
        "upper": 2.0**-n,
    }
    if a is not None:
        content["cdf"] = baselines.p_y_ball_alpha1(n, a)
    return content, False


N = Param("n", int, "Dimension")
M = Param("M", int, "Number of points")

CALCULATORS = [
    Calculator(
        "ball",
        "Separation bounds for M points uniform in the unit ball",
        [
            N,
            M,
            Param("r", float, "Radius of the inner ball"),
            Param("theta", float, "Failure rate", 0.1),
        ],
        _ball,
    ),
    Calculator(
        "corollary",
        "Largest M separable with probability above 1 - theta in the unit ball",
        [N, Param("r", float, "Radius of the inner ball"), Param("theta", float, "Failure rate")],
        _corollary,
    ),
    Calculator(
        "cube",
        "Separation bounds for M points with independent coordinates in a cube",
        [
            N,
            M,
            Param("delta", float, "Slack, in (0, 2/3)"),
            Param("sigma0", float, "Lower bound of each coordinate variance"),
            Param("R0_sq", float, "Lower bound of the sum of variances"),
        ],
        _cube,
    ),
    Calculator(
        "smac",
        "Constants a, b such that a * b^n points of a SmAC distribution are separable",
        [
            Param("A", float, "Volume decay rate"),
            Param("B", float, "Probability decay base, in (0, 1)"),
            Param("C", float, "Probability constant"),
            Param("delta", float, "Failure rate"),
            Param("N_b", int, "Dimension from which the volume estimate holds", 0),
            Param("n", int, "Also evaluate a * b^n at this dimension"),
        ],
        _smac,
    ),
    Calculator(
        "noisy",
        "Separation bound for points perturbed around arbitrary centers",
        [
            N,
            M,
            Param("epsilon", float, "Perturbation radius"),
            Param("delta", float, "Cap parameter, in (1/sqrt(n), 1)"),
        ],
        _noisy,
    ),
    Calculator(
        "logconcave",
        "Separable set size for isotropic log-concave distributions",
        [
            N,
            Param("alpha_class", float, "Tail class, in [1, 2]"),
            Param("a", float, "Distribution constant a"),
            Param("b", float, "Distribution constant b"),
            Param("delta", float, "Failure rate"),
        ],
        _logconcave,
    ),
    Calculator(
        "exp-separability",
        "Separable set size for distributions with exponential separability",
        [
            N,
            Param("a", float, "Constant a"),
            Param("b", float, "Base b, in (0, 1)"),
            Param("delta", float, "Failure rate"),
        ],
        _exp_separability,
    ),
    Calculator(
        "bounded-density",
        "Set size below which a point of a bounded density is separable from it",
        [
            N,
            Param("alpha", float, "Threshold, in (1/2, 1]"),
            Param("r", float, "Radius, in (1/(2 alpha), 1]"),
            Param("C", float, "Density bound relative to the ball of radius r"),
            Param("theta", float, "Failure rate"),
        ],
        _bounded_density,
    ),
    Calculator(
        "excluded-volume",
        "Upper bound of the fraction of the unit ball excluded by a set of points",
        [N, Param("alpha", float, "Threshold"), Param("size", int, "Number of points")],
        _excluded_volume,
    ),
    Calculator(
        "effective-dim",
        "Dimension of the uniform sphere (or ball) with a given mean p_y",
        [
            Param("mean_p_y", float, "Observed mean p_y"),
            Param("alpha", float, "Threshold, sphere law only"),
            Param("law", str, "Reference law", "sphere", ("sphere", "ball")),
        ],
        _effective_dim,
    ),
    Calculator(
        "ball-alpha1",
        "Law of p_y for the uniform ball at alpha = 1",
        [N, Param("a", float, "Also evaluate the distribution function at a")],
        _ball_alpha1,
    ),
]

# parameters that may be left out
OPTIONAL = {("smac", "n"), ("effective-dim", "alpha"), ("ball-alpha1", "a")}
