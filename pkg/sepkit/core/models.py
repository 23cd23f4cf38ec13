from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np

from sepkit.core.errors import (
    DeltaOutOfRange,
    DimensionMismatch,
    InvalidSpec,
    ParamOutOfRange,
    ValidationError,
)


def _frozen_array(values: Any, ndim: int) -> np.ndarray:
    array = np.array(values, dtype=np.float64, copy=True, ndmin=ndim)
    array.flags.writeable = False
    return array


# ---------------------------------------------------------------------------
# datasets


@dataclass(frozen=True, eq=False)
class DataMatrix:
    """
    An immutable M×n cloud of finite real points.

    Attributes
    ----------
    points: np.ndarray
        Read-only float64 array of shape ``(M, n)``.
    columns: tuple[str, ...] | None
        Feature names, when the matrix was read from a file with a header.
    """

    points: np.ndarray
    columns: tuple[str, ...] | None = None

    def __post_init__(self):
        points = _frozen_array(self.points, 2)
        if points.ndim != 2:
            raise ValidationError(f"A point cloud must be a 2-D matrix, got {points.ndim}-D.")
        if points.shape[0] < 1 or points.shape[1] < 1:
            raise ValidationError(f"A point cloud needs M >= 1 and n >= 1, got {points.shape}.")
        if not np.isfinite(points).all():
            row, col = np.argwhere(~np.isfinite(points))[0]
            raise ValidationError(f"Non-finite value at row {row}, column {col}.")
        if self.columns is not None and len(self.columns) != points.shape[1]:
            raise DimensionMismatch(points.shape[1], len(self.columns))
        object.__setattr__(self, "points", points)
        if self.columns is not None:
            object.__setattr__(self, "columns", tuple(self.columns))

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n_points


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    data: DataMatrix
    labels: tuple[str, ...] | None = None
    label_column: str | None = None

    def __post_init__(self):
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != self.data.n_points:
                raise ValidationError(
                    f"{len(labels)} labels given for {self.data.n_points} points."
                )
            object.__setattr__(self, "labels", labels)

    @property
    def has_labels(self) -> bool:
        return self.labels is not None


# ---------------------------------------------------------------------------
# preprocessing


class SelectionRule(enum.Enum):
    condition = "condition"
    fixed = "fixed"
    all = "all"


@dataclass(frozen=True)
class PreprocessConfig:
    """
    How a `PreprocessModel` is fitted.

    Attributes
    ----------
    selection: SelectionRule
        ``condition`` keeps components with ``λ >= ratio * λ_max``, ``fixed`` keeps the first
        ``components`` ones, ``all`` keeps every component with a nonzero eigenvalue.
    ratio: float
        Threshold of the condition rule, 0.1 keeps the condition number below 10.
    components: int | None
        Component count of the fixed rule.
    whiten: bool
        Divide the projections by the square root of their eigenvalue.
    sphere_project: bool
        Normalize every transformed point to unit length.
    """

    selection: SelectionRule = SelectionRule.condition
    ratio: float = 0.1
    components: int | None = None
    whiten: bool = True
    sphere_project: bool = False

    def __post_init__(self):
        if not 0 < self.ratio <= 1:
            raise ParamOutOfRange("0 < ratio <= 1", ratio=self.ratio)
        if self.selection is SelectionRule.fixed and (
            self.components is None or self.components < 1
        ):
            raise ValidationError("The fixed selection rule needs a positive component count.")

    def describe(self) -> str:
        if self.selection is SelectionRule.condition:
            return f"λ >= {self.ratio:g}·λ_max"
        if self.selection is SelectionRule.fixed:
            return f"first {self.components} components"
        return "all nonzero components"


@dataclass(frozen=True, eq=False)
class PreprocessModel:
    mean: np.ndarray
    scale: np.ndarray
    eigenvalues: np.ndarray
    basis: np.ndarray
    whiten: bool = True
    sphere_project: bool = False
    spectrum: np.ndarray | None = None
    rule: str = ""

    def __post_init__(self):
        for name, ndim in (("mean", 1), ("scale", 1), ("eigenvalues", 1), ("basis", 2)):
            object.__setattr__(self, name, _frozen_array(getattr(self, name), ndim))
        if self.spectrum is not None:
            object.__setattr__(self, "spectrum", _frozen_array(self.spectrum, 1))
        else:
            object.__setattr__(self, "spectrum", self.eigenvalues)
        n, k = self.basis.shape
        if self.mean.shape != (n,) or self.scale.shape != (n,):
            raise DimensionMismatch(n, self.mean.shape[0])
        if self.eigenvalues.shape != (k,):
            raise DimensionMismatch(k, self.eigenvalues.shape[0])

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def k_selected(self) -> int:
        return self.basis.shape[1]

    @property
    def condition_number(self) -> float:
        return float(self.eigenvalues[0] / self.eigenvalues[-1])

    def to_dict(self) -> dict[str, Any]:
        return {
            "mean": self.mean.tolist(),
            "scale": self.scale.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "spectrum": self.spectrum.tolist(),  # type: ignore
            "basis": self.basis.tolist(),
            "k_selected": self.k_selected,
            "whiten": self.whiten,
            "sphere_project": self.sphere_project,
            "rule": self.rule,
        }

    @classmethod
    def from_dict(cls, content: dict[str, Any]) -> "PreprocessModel":
        try:
            model = cls(
                mean=content["mean"],
                scale=content["scale"],
                eigenvalues=content["eigenvalues"],
                basis=content["basis"],
                whiten=bool(content.get("whiten", True)),
                sphere_project=bool(content.get("sphere_project", False)),
                spectrum=content.get("spectrum"),
                rule=content.get("rule", ""),
            )
        except KeyError as missing:
            raise ValidationError(f"Preprocess model is missing the key {missing}.") from None
        if "k_selected" in content and content["k_selected"] != model.k_selected:
            raise DimensionMismatch(content["k_selected"], model.k_selected)
        return model


# ---------------------------------------------------------------------------
# separability reports


@dataclass(frozen=True)
class SeparabilityRow:
    alpha: float
    N_alpha: int
    nu_alpha: float
    mean_p_y: float
    var_p_y: float
    N_alpha_star: int | None = None
    nu_alpha_star: float | None = None
    mean_p_y_star: float | None = None
    var_p_y_star: float | None = None
    generalization_ratio: float | None = None
    effective_dimension: float | None = None
    effective_dimension_star: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {k: v for k, v in self.__dict__.items() if v is not None}


@dataclass(frozen=True)
class SeparabilityReport:
    """
    Fisher separability of a point cloud for a list of thresholds.

    Starred fields hold the same statistics restricted to pairs of points from different
    classes; they are None when the dataset has no labels.
    """

    rows: tuple[SeparabilityRow, ...]
    n_points: int
    dim: int
    n_classes: int | None = None
    sphere: bool = False

    @property
    def critical_levels(self) -> dict[str, float]:
        levels = {"one_over_M": 1 / self.n_points}
        if self.n_classes:
            levels["one_over_classes"] = 1 / self.n_classes
        return levels

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_points": self.n_points,
            "dim": self.dim,
            "n_classes": self.n_classes,
            "sphere": self.sphere,
            "critical_levels": self.critical_levels,
            "rows": [row.to_dict() for row in self.rows],
        }

    def table(self) -> list[list[str]]:
        """
        The report laid out with one column per alpha and one line per statistic.
        """
        fields = ["N_alpha", "nu_alpha", "mean_p_y", "var_p_y"]
        if self.n_classes is not None:
            fields += ["N_alpha_star", "nu_alpha_star", "mean_p_y_star", "var_p_y_star"]
            fields.append("generalization_ratio")
        if any(row.effective_dimension is not None for row in self.rows):
            fields.append("effective_dimension")
            if self.n_classes is not None:
                fields.append("effective_dimension_star")
        lines = [["alpha"] + [repr(row.alpha) for row in self.rows]]
        for name in fields:
            values = [getattr(row, name) for row in self.rows]
            lines.append([name] + ["" if v is None else repr(v) for v in values])
        return lines


# ---------------------------------------------------------------------------
# analytic bounds


@dataclass(frozen=True)
class Bound:
    """
    A probability bound as evaluated from its formula.

    Attributes
    ----------
    raw: float
        The formula value, possibly negative.
    value: float
        ``raw`` clamped to ``[0, 1]``.
    vacuous: bool
        True when the formula gives nothing (raw <= 0).
    """

    raw: float

    @property
    def value(self) -> float:
        return min(1.0, max(0.0, self.raw))

    @property
    def vacuous(self) -> bool:
        return self.raw <= 0

    def to_dict(self) -> dict[str, Any]:
        return {"raw": self.raw, "value": self.value, "vacuous": self.vacuous}


def _check_open_unit(name: str, value: float):
    if not 0 < value < 1:
        raise ParamOutOfRange(f"0 < {name} < 1", **{name: value})


def _check_positive_int(name: str, value: int):
    if int(value) != value or value < 1:
        raise ParamOutOfRange(f"{name} >= 1 (integer)", **{name: value})


@dataclass(frozen=True)
class BallParams:
    n: int
    M: int
    r: float
    theta: float = 0.1

    def __post_init__(self):
        _check_positive_int("n", self.n)
        _check_positive_int("M", self.M)
        _check_open_unit("r", self.r)
        _check_open_unit("theta", self.theta)

    @property
    def rho(self) -> float:
        return math.sqrt(1 - self.r**2)


@dataclass(frozen=True)
class CubeParams:
    n: int
    M: int
    delta: float
    sigma0: float
    R0_sq: float

    def __post_init__(self):
        _check_positive_int("n", self.n)
        _check_positive_int("M", self.M)
        if not 0 < self.delta < 2 / 3:
            raise ParamOutOfRange("0 < delta < 2/3", delta=self.delta)
        if self.sigma0 <= 0:
            raise ParamOutOfRange("sigma0 > 0", sigma0=self.sigma0)
        if self.R0_sq < self.n * self.sigma0**2:
            raise ParamOutOfRange(
                "R0_sq >= n*sigma0^2", R0_sq=self.R0_sq, n=self.n, sigma0=self.sigma0
            )


@dataclass(frozen=True)
class SmacParams:
    A: float
    B: float
    C: float
    delta: float
    N_b: int = 0

    def __post_init__(self):
        if self.A <= 0:
            raise ParamOutOfRange("A > 0", A=self.A)
        _check_open_unit("B", self.B)
        if self.C <= 0:
            raise ParamOutOfRange("C > 0", C=self.C)
        _check_open_unit("delta", self.delta)
        if int(self.N_b) != self.N_b or self.N_b < 0:
            raise ParamOutOfRange("N_b >= 0 (integer)", N_b=self.N_b)


@dataclass(frozen=True)
class NoisyParams:
    n: int
    M: int
    epsilon: float
    delta: float

    def __post_init__(self):
        _check_positive_int("n", self.n)
        _check_positive_int("M", self.M)
        _check_open_unit("epsilon", self.epsilon)
        if not 1 / math.sqrt(self.n) < self.delta < 1:
            raise DeltaOutOfRange("1/sqrt(n) < delta < 1", n=self.n, delta=self.delta)


@dataclass(frozen=True)
class BallBounds:
    single: Bound
    all_pairs: Bound
    angle: Bound
    quasi_orthogonal: Bound

    def to_dict(self) -> dict[str, Any]:
        return {k: v.to_dict() for k, v in self.__dict__.items()}


@dataclass(frozen=True)
class CubeBounds:
    single: Bound
    all_pairs: Bound

    def to_dict(self) -> dict[str, Any]:
        return {k: v.to_dict() for k, v in self.__dict__.items()}


@dataclass(frozen=True)
class CapacityBounds:
    """
    Largest set sizes guaranteed separable with probability above ``1 - theta``.

    A set of ``M`` points is covered when ``M < bound``; a nonpositive bound guarantees no M.
    """

    single_bound: float
    pairwise_bound: float

    @staticmethod
    def largest(bound: float) -> int | None:
        if not bound > 1:
            return None
        if math.isinf(bound):
            return None
        return math.ceil(bound) - 1

    @property
    def max_M_single(self) -> int | None:
        return self.largest(self.single_bound)

    @property
    def max_M_pairwise(self) -> int | None:
        return self.largest(self.pairwise_bound)

    def to_dict(self) -> dict[str, Any]:
        return {
            "single_bound": self.single_bound,
            "pairwise_bound": self.pairwise_bound,
            "single_guaranteed": self.single_bound > 0,
            "pairwise_guaranteed": self.pairwise_bound > 0,
            "max_M_single": self.max_M_single,
            "max_M_pairwise": self.max_M_pairwise,
        }


@dataclass(frozen=True)
class SmacBound:
    a: float
    b: float

    def max_M(self, n: float) -> float:
        """
        ``a * b**n``, infinite when it overflows a float.
        """
        if self.a <= 0:
            return 0.0
        log_value = math.log(self.a) + n * math.log(self.b)
        return math.exp(log_value) if log_value < 709 else math.inf

    def to_dict(self, ns: Iterable[int] = ()) -> dict[str, Any]:
        return {"a": self.a, "b": self.b, "max_M": {str(n): self.max_M(n) for n in ns}}


@dataclass(frozen=True)
class EffectiveDimension:
    value: float
    alpha: float

    @property
    def nearest(self) -> int:
        return int(round(self.value))


# ---------------------------------------------------------------------------
# Monte Carlo


class SamplerFamily(enum.Enum):
    uniform_ball = "uniform_ball"
    uniform_sphere = "uniform_sphere"
    cube_product = "cube_product"
    gaussian = "gaussian"
    perturbed_clusters = "perturbed_clusters"


@dataclass(frozen=True, eq=False)
class SamplerSpec:
    """
    A distribution to draw point clouds from.

    Attributes
    ----------
    family: SamplerFamily
        Which distribution.
    n: int
        Dimension.
    seed: int
        64-bit seed; every stream of the experiment derives from it.
    density_bound: float
        ``cube_product`` only: each coordinate is uniform on an interval of length
        ``1 / density_bound``, so its density is bounded by this value. At least 1.
    scale_to_ball: bool
        ``cube_product`` only: center the cube and scale it by ``sqrt(4 / n)`` so it sits in
        the unit ball. Separability does not depend on this scaling.
    centers: np.ndarray | None
        ``perturbed_clusters`` only: cluster centers, each of norm at most ``1 - epsilon``.
    epsilon: float
        ``perturbed_clusters`` only: radius of the ball drawn around each center.
    """

    family: SamplerFamily
    n: int
    seed: int = 0
    density_bound: float = 1.0
    scale_to_ball: bool = True
    centers: np.ndarray | None = None
    epsilon: float = 0.0

    def __post_init__(self):
        if isinstance(self.family, str):
            try:
                object.__setattr__(self, "family", SamplerFamily(self.family))
            except ValueError:
                raise InvalidSpec(f"Unknown sampler family {self.family!r}.") from None
        if int(self.n) != self.n or self.n < 1:
            raise InvalidSpec(f"Dimension must be a positive integer, got {self.n!r}.")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise InvalidSpec(f"Seed must be a 64-bit unsigned integer, got {self.seed!r}.")
        if self.family is SamplerFamily.cube_product and not self.density_bound >= 1:
            raise InvalidSpec(
                f"The cube density bound must be at least 1, got {self.density_bound!r}."
            )
        if self.family is SamplerFamily.perturbed_clusters:
            self._check_clusters()

    def _check_clusters(self):
        if not 0 <= self.epsilon < 1:
            raise InvalidSpec(f"epsilon must be in [0, 1), got {self.epsilon!r}.")
        if self.centers is None:
            raise InvalidSpec("The perturbed_clusters family needs a list of centers.")
        centers = _frozen_array(self.centers, 2)
        if centers.shape[0] < 1 or centers.shape[1] != self.n:
            raise InvalidSpec(
                f"Centers must be a nonempty list of {self.n}-vectors, got shape {centers.shape}."
            )
        norms = np.linalg.norm(centers, axis=1)
        if (norms > 1 - self.epsilon + 1e-12).any():
            index = int(np.argmax(norms))
            raise InvalidSpec(
                f"Center {index} has norm {norms[index]:.6g}, above 1 - epsilon = "
                f"{1 - self.epsilon:.6g}."
            )
        object.__setattr__(self, "centers", centers)

    def to_dict(self) -> dict[str, Any]:
        content: dict[str, Any] = {"family": self.family.value, "n": self.n, "seed": self.seed}
        if self.family is SamplerFamily.cube_product:
            content["density_bound"] = self.density_bound
            content["scale_to_ball"] = self.scale_to_ball
        if self.family is SamplerFamily.perturbed_clusters:
            content["centers"] = self.centers.tolist()  # type: ignore
            content["epsilon"] = self.epsilon
        return content

    @classmethod
    def from_dict(cls, content: dict[str, Any]) -> "SamplerSpec":
        try:
            return cls(
                family=content["family"],
                n=content["n"],
                seed=content.get("seed", 0),
                density_bound=content.get("density_bound", 1.0),
                scale_to_ball=content.get("scale_to_ball", True),
                centers=content.get("centers"),
                epsilon=content.get("epsilon", 0.0),
            )
        except KeyError as missing:
            raise InvalidSpec(f"Sampler spec is missing the key {missing}.") from None


@dataclass(frozen=True)
class ExperimentResult:
    trials: int
    successes: int
    theoretical_bound: float | None
    seed: int
    wall_time: float = field(default=0.0, compare=False)

    @property
    def empirical_rate(self) -> float:
        return self.successes / self.trials

    @property
    def standard_error(self) -> float:
        p = self.empirical_rate
        return math.sqrt(p * (1 - p) / self.trials)

    def to_dict(self) -> dict[str, Any]:
        # wall time is provenance, results must compare equal across runs
        return {
            "trials": self.trials,
            "successes": self.successes,
            "empirical_rate": self.empirical_rate,
            "theoretical_bound": self.theoretical_bound,
            "seed": self.seed,
        }


@dataclass(frozen=True, eq=False)
class PyDistribution:
    """
    Pooled p_y values of a Monte Carlo run.
    """

    samples: np.ndarray
    bin_edges: np.ndarray
    counts: np.ndarray
    method: str

    @property
    def mean(self) -> float:
        return float(self.samples.mean())

    @property
    def variance(self) -> float:
        return float(self.samples.var(ddof=1)) if self.samples.size > 1 else 0.0

    @property
    def standard_error(self) -> float:
        return math.sqrt(self.variance / self.samples.size)

    def to_dict(self) -> dict[str, Any]:
        return {
            "method": self.method,
            "count": int(self.samples.size),
            "mean": self.mean,
            "variance": self.variance,
            "standard_error": self.standard_error,
            "bin_edges": self.bin_edges.tolist(),
            "counts": self.counts.tolist(),
        }


@dataclass(frozen=True)
class VerifyResult:
    theorem: str
    passed: bool
    tolerance: float
    result: ExperimentResult

    def to_dict(self) -> dict[str, Any]:
        return {
            "theorem": self.theorem,
            "pass": self.passed,
            "tolerance": self.tolerance,
            "result": self.result.to_dict(),
        }


# ---------------------------------------------------------------------------
# correctors


@dataclass(frozen=True, eq=False)
class Corrector:
    """
    A one-shot Fisher discriminant flagging inputs that resemble known errors.

    Attributes
    ----------
    model: PreprocessModel
        Fitted on the cloud of correctly handled inputs.
    direction: np.ndarray
        Mean of the transformed error points.
    threshold: float
        The alpha of the discriminant, in ``(0, 1]``.
    error_ids: tuple[str, ...]
        Identifiers of the error points the corrector was trained on.
    """

    model: PreprocessModel
    direction: np.ndarray
    threshold: float
    error_ids: tuple[str, ...] = ()
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        direction = _frozen_array(self.direction, 1)
        if direction.shape != (self.model.k_selected,):
            raise DimensionMismatch(self.model.k_selected, direction.shape[0])
        if not np.linalg.norm(direction) > 0:
            raise ValidationError("A corrector direction must be nonzero.")
        if not 0 < self.threshold <= 1:
            raise ParamOutOfRange("0 < threshold <= 1", threshold=self.threshold)
        object.__setattr__(self, "direction", direction)
        object.__setattr__(self, "error_ids", tuple(str(x) for x in self.error_ids))

    @property
    def dim(self) -> int:
        return self.model.dim

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": "corrector",
            "model": self.model.to_dict(),
            "direction": self.direction.tolist(),
            "threshold": self.threshold,
            "error_ids": list(self.error_ids),
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, content: dict[str, Any]) -> "Corrector":
        try:
            return cls(
                model=PreprocessModel.from_dict(content["model"]),
                direction=content["direction"],
                threshold=content["threshold"],
                error_ids=tuple(content.get("error_ids", ())),
                metadata=content.get("metadata", {}),
            )
        except KeyError as missing:
            raise ValidationError(f"Corrector is missing the key {missing}.") from None


@dataclass(frozen=True)
class Cascade:
    correctors: tuple[Corrector, ...] = ()

    def append(self, corrector: Corrector) -> "Cascade":
        return Cascade(self.correctors + (corrector,))

    def __len__(self) -> int:
        return len(self.correctors)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "cascade", "correctors": [c.to_dict() for c in self.correctors]}

    @classmethod
    def from_dict(cls, content: dict[str, Any]) -> "Cascade":
        return cls(tuple(Corrector.from_dict(x) for x in content.get("correctors", ())))


@dataclass(frozen=True)
class CascadeDecision:
    flagged: bool
    stage: int | None = None


@dataclass(frozen=True)
class CorrectorEval:
    detection_rate: float
    damage_rate: float
    detected: int
    damaged: int
    error_count: int
    correct_count: int

    def to_dict(self) -> dict[str, Any]:
        return dict(self.__dict__)
