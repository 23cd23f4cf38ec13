"""
Samplers for the distribution families of the separation theorems, and Monte Carlo
experiments checking the theorem bounds.

Randomness comes from counter-based Philox generators. ``sample`` uses the stream
``(seed, 0)`` and trial ``i`` of an experiment the stream ``(seed, i + 1)``, so results only
depend on the seed, never on how trials are spread over threads.
"""

from __future__ import annotations

import enum
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Union

import numpy as np
from scipy import stats

from sepkit.core import metrics
from sepkit.core.baselines import ball_theorem_bounds, cube_theorem_bounds, noisy_bound
from sepkit.core.errors import InvalidAlpha, InvalidSpec, VacuousBound, ValidationError
from sepkit.core.models import (
    BallParams,
    Bound,
    CubeParams,
    DataMatrix,
    ExperimentResult,
    NoisyParams,
    PyDistribution,
    SamplerFamily,
    SamplerSpec,
    VerifyResult,
)

log = logging.getLogger("sepkit.core.montecarlo")

TRIALS_PER_TASK = 64

TheoremParams = Union[BallParams, CubeParams, NoisyParams]


class Theorem(enum.Enum):
    ball_single = "ball_single"
    ball_pairs = "ball_pairs"
    cube_pairs = "cube_pairs"
    noisy = "noisy"


def stream(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))


# ---------------------------------------------------------------------------
# samplers


def _ball(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    directions = rng.standard_normal((count, n))
    directions /= np.linalg.norm(directions, axis=1)[:, None]
    radii = rng.random(count) ** (1 / n)
    return directions * radii[:, None]


def _draw(
    spec: SamplerSpec, count: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray | None]:
    """
    Draw ``count`` points, and for perturbed clusters the center each point was drawn around.
    """
    n = spec.n
    if spec.family is SamplerFamily.uniform_ball:
        return _ball(rng, count, n), None
    if spec.family is SamplerFamily.uniform_sphere:
        points = rng.standard_normal((count, n))
        return points / np.linalg.norm(points, axis=1)[:, None], None
    if spec.family is SamplerFamily.gaussian:
        return rng.standard_normal((count, n)), None
    if spec.family is SamplerFamily.cube_product:
        side = 1 / spec.density_bound
        points = rng.random((count, n)) * side
        if spec.scale_to_ball:
            points = (points - side / 2) * math.sqrt(4 / n)
        return points, None
    if spec.family is SamplerFamily.perturbed_clusters:
        assert spec.centers is not None
        centers = spec.centers[np.arange(count) % spec.centers.shape[0]]
        if spec.epsilon == 0:
            return centers.copy(), centers
        return centers + spec.epsilon * _ball(rng, count, n), centers
    raise InvalidSpec(f"Unknown sampler family {spec.family!r}.")


def sample(spec: SamplerSpec, count: int) -> DataMatrix:
    """
    Draw ``count`` i.i.d. points from ``spec``.

    Perturbed clusters draw point i uniformly in the ball of radius epsilon around center
    ``i mod len(centers)``.
    """
    if count < 1:
        raise InvalidSpec(f"Cannot draw {count} points.")
    points, _ = _draw(spec, count, stream(spec.seed, 0))
    return DataMatrix(points)


def clustered_centers(
    n: int, count: int, subspace_dim: int, radius: float, seed: int
) -> np.ndarray:
    """
    ``count`` centers drawn uniformly in the ball of radius ``radius`` of a random
    ``subspace_dim``-dimensional subspace.

    The stream is the first child spawned from ``seed``, distinct from every trial stream.
    """
    if not 1 <= subspace_dim <= n:
        raise InvalidSpec(f"Subspace dimension must be in [1, {n}], got {subspace_dim}.")
    if not 0 <= radius <= 1:
        raise InvalidSpec(f"Centers radius must be in [0, 1], got {radius}.")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed).spawn(1)[0]))
    basis, _ = np.linalg.qr(rng.standard_normal((n, subspace_dim)))
    return radius * _ball(rng, count, subspace_dim) @ basis.T


# ---------------------------------------------------------------------------
# separability checks on a drawn set


def _inseparable_mask(
    points: np.ndarray, alpha: float, origins: np.ndarray | None, rows: slice = slice(None)
) -> np.ndarray:
    """
    ``mask[i, j]`` is True when point i cannot be separated from point j, j != i.

    With ``origins``, the discriminant of point i is centered on ``origins[i]``.
    """
    subset = points[rows]
    if origins is None:
        products = subset @ points.T
        norms_sq = np.einsum("ij,ij->i", subset, subset)
    else:
        shifted = subset - origins[rows]
        products = shifted @ points.T - np.einsum("ij,ij->i", shifted, origins[rows])[:, None]
        norms_sq = np.einsum("ij,ij->i", shifted, shifted)
    mask = products > alpha * norms_sq[:, None]
    index = np.arange(points.shape[0])[rows]
    mask[np.arange(len(index)), index] = False
    return mask


def _set_separable(points: np.ndarray, alpha: float, origins: np.ndarray | None) -> bool:
    return not _inseparable_mask(points, alpha, origins).any()


def _last_point_separable(points: np.ndarray, alpha: float, origins: np.ndarray | None) -> bool:
    return not _inseparable_mask(points, alpha, origins, slice(-1, None)).any()


def _check_run(M: int, alpha: float, trials: int):
    if trials < 1:
        raise InvalidSpec(f"At least one trial is needed, got {trials}.")
    if M < 1:
        raise InvalidSpec(f"Set size must be positive, got {M}.")
    if not 0 <= alpha <= 1:
        raise InvalidAlpha(alpha, "[0, 1]")


def _run_trials(
    spec: SamplerSpec,
    trials: int,
    trial: Callable[[np.random.Generator], object],
    experiment: str,
    threads: int,
) -> tuple[list, float]:
    family = spec.family.value
    duration = metrics.trial_duration.labels(family)

    def run_chunk(chunk: range) -> list:
        results = []
        for index in chunk:
            start = time.perf_counter()
            results.append(trial(stream(spec.seed, index + 1)))
            duration.observe(time.perf_counter() - start)
        return results

    chunks = [
        range(i, min(i + TRIALS_PER_TASK, trials)) for i in range(0, trials, TRIALS_PER_TASK)
    ]
    start = time.perf_counter()
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            outcomes = [x for chunk in executor.map(run_chunk, chunks) for x in chunk]
    else:
        outcomes = [x for chunk in map(run_chunk, chunks) for x in chunk]
    wall_time = time.perf_counter() - start

    metrics.trials_run.labels(family, experiment).inc(trials)
    log.info(f"Ran {trials} {experiment} trials on {family} (n={spec.n}) in {wall_time:.2f}s")
    return outcomes, wall_time


def _estimate(
    spec: SamplerSpec,
    M: int,
    alpha: float,
    trials: int,
    check: Callable[[np.ndarray, float, np.ndarray | None], bool],
    experiment: str,
    threads: int,
    cluster_origins: bool,
    bound: float | None = None,
) -> ExperimentResult:
    _check_run(M, alpha, trials)

    def trial(rng: np.random.Generator) -> bool:
        points, centers = _draw(spec, M, rng)
        return check(points, alpha, centers if cluster_origins else None)

    outcomes, wall_time = _run_trials(spec, trials, trial, experiment, threads)
    result = ExperimentResult(
        trials=trials,
        successes=sum(outcomes),
        theoretical_bound=bound,
        seed=spec.seed,
        wall_time=wall_time,
    )
    metrics.empirical_rate.labels(spec.family.value, experiment).set(result.empirical_rate)
    return result


def estimate_set_separability(
    spec: SamplerSpec,
    M: int,
    alpha: float,
    trials: int,
    *,
    threads: int = 1,
    cluster_origins: bool = False,
) -> ExperimentResult:
    """
    Fraction of trials in which a drawn set of M points is Fisher-separable, every point from
    all the others.

    Parameters
    ----------
    spec: SamplerSpec
        Distribution and seed.
    M: int
        Set size.
    alpha: float
        Threshold of the discriminant.
    trials: int
        Number of independent sets.
    threads: int
        Worker threads. The result does not depend on it.
    cluster_origins: bool
        For perturbed clusters, center the discriminant of each point on its cluster center.
    """
    return _estimate(
        spec, M, alpha, trials, _set_separable, "set", threads, cluster_origins
    )


def estimate_point_separability(
    spec: SamplerSpec,
    M: int,
    alpha: float,
    trials: int,
    *,
    threads: int = 1,
    cluster_origins: bool = False,
) -> ExperimentResult:
    """
    Fraction of trials in which the last of M drawn points is separable from the M - 1 others.
    """
    return _estimate(
        spec, M, alpha, trials, _last_point_separable, "point", threads, cluster_origins
    )


# ---------------------------------------------------------------------------
# p_y distribution


class PyMethod(enum.Enum):
    empirical = "empirical"
    analytic = "analytic"


def estimate_p_y_distribution(
    spec: SamplerSpec,
    M: int,
    alpha: float,
    trials: int,
    *,
    method: PyMethod = PyMethod.empirical,
    bins: int = 20,
    upper: float | None = None,
    threads: int = 1,
) -> PyDistribution:
    """
    Pool the p_y values of M drawn points over many trials.

    With the empirical method, p_y of a point y is the fraction of the M - 1 other drawn
    points that cannot be separated from y. The analytic method is available for the uniform
    ball at alpha = 1, where the excluded ball of y lies inside the unit ball and p_y is exactly
    ``(|y| / 2)^n``.

    The histogram has ``bins`` equal bins on ``[0, upper]``, ``upper`` defaulting to the
    largest pooled value.
    """
    method = PyMethod(method)
    _check_run(M, alpha, trials)
    if bins < 1:
        raise ValidationError("At least one histogram bin is needed.")
    if method is PyMethod.empirical and M < 2:
        raise InvalidSpec("Empirical p_y needs at least 2 points per trial.")
    if method is PyMethod.analytic and (
        spec.family is not SamplerFamily.uniform_ball or alpha != 1
    ):
        raise ValidationError("Analytic p_y is only known for the uniform ball at alpha = 1.")

    def trial(rng: np.random.Generator) -> np.ndarray:
        points, _ = _draw(spec, M, rng)
        if method is PyMethod.analytic:
            return np.exp(spec.n * np.log(np.linalg.norm(points, axis=1) / 2))
        # rows are the x, columns the y they are compared with
        return _inseparable_mask(points, alpha, None).sum(axis=0) / (M - 1)

    outcomes, _ = _run_trials(spec, trials, trial, f"p_y {method.value}", threads)
    samples = np.concatenate(outcomes)
    top = upper if upper is not None else float(samples.max())
    if not top > 0:
        top = 1.0
    edges = np.linspace(0.0, top, bins + 1)
    counts, _ = np.histogram(samples, edges)
    samples.flags.writeable = False
    return PyDistribution(samples=samples, bin_edges=edges, counts=counts, method=method.value)


def ks_uniform(samples: np.ndarray, upper: float) -> float:
    """
    Kolmogorov-Smirnov distance between the samples and the uniform law on ``[0, upper]``.
    """
    return float(stats.kstest(samples, "uniform", args=(0.0, upper)).statistic)


# ---------------------------------------------------------------------------
# bound verification


def _cube_spec(p: CubeParams, seed: int) -> SamplerSpec:
    # coordinates uniform on an interval of length w have variance w^2 / 12, w is chosen so
    # that the variances add up to R0_sq exactly
    width = math.sqrt(12 * p.R0_sq / p.n)
    if width > 1:
        raise InvalidSpec(
            f"R0_sq={p.R0_sq} needs coordinates of range {width:.4g}, above the unit cube."
        )
    return SamplerSpec(SamplerFamily.cube_product, p.n, seed, density_bound=1 / width)


def theorem_bound(theorem: Theorem, params: TheoremParams) -> Bound:
    theorem = Theorem(theorem)
    if theorem is Theorem.ball_single:
        assert isinstance(params, BallParams)
        return ball_theorem_bounds(params).single
    if theorem is Theorem.ball_pairs:
        assert isinstance(params, BallParams)
        return ball_theorem_bounds(params).all_pairs
    if theorem is Theorem.cube_pairs:
        assert isinstance(params, CubeParams)
        return cube_theorem_bounds(params).all_pairs
    assert isinstance(params, NoisyParams)
    return noisy_bound(params)


def verify_bound(
    theorem_id: Theorem | str,
    params: TheoremParams,
    trials: int,
    seed: int,
    *,
    alpha: float = 1.0,
    threads: int = 1,
    centers: np.ndarray | None = None,
    subspace_dim: int = 3,
) -> VerifyResult:
    """
    Check a theorem bound against the empirical success rate of its experiment.

    The check passes when the rate is at least ``bound - 3 * sqrt(bound * (1 - bound) / trials)``.
    The events bounded by the theorems imply separability at alpha = 1, the default.

    For the perturbed clusters theorem, ``centers`` default to M points drawn in a random
    ``subspace_dim``-dimensional subspace, inside the ball of radius ``1 - epsilon``; each
    point's discriminant is centered on its own cluster center.

    Raises
    ------
    VacuousBound
        The bound is not positive.
    """
    try:
        theorem = Theorem(theorem_id)
    except ValueError:
        raise InvalidSpec(f"Unknown theorem {theorem_id!r}.") from None
    expected = {
        Theorem.ball_single: BallParams,
        Theorem.ball_pairs: BallParams,
        Theorem.cube_pairs: CubeParams,
        Theorem.noisy: NoisyParams,
    }[theorem]
    if not isinstance(params, expected):
        raise InvalidSpec(f"Theorem {theorem.value} needs {expected.__name__}.")

    bound = theorem_bound(theorem, params)
    if bound.vacuous:
        raise VacuousBound(theorem.value, bound.raw)

    cluster_origins = False
    if isinstance(params, BallParams):
        spec = SamplerSpec(SamplerFamily.uniform_ball, params.n, seed)
    elif isinstance(params, CubeParams):
        spec = _cube_spec(params, seed)
    else:
        if centers is None:
            centers = clustered_centers(
                params.n, params.M, min(subspace_dim, params.n), 1 - params.epsilon, seed
            )
        spec = SamplerSpec(
            SamplerFamily.perturbed_clusters,
            params.n,
            seed,
            centers=centers,
            epsilon=params.epsilon,
        )
        cluster_origins = True

    check = _last_point_separable if theorem is Theorem.ball_single else _set_separable
    result = _estimate(
        spec,
        params.M,
        alpha,
        trials,
        check,
        f"verify {theorem.value}",
        threads,
        cluster_origins,
        bound=bound.value,
    )
    b = bound.value
    tolerance = 3 * math.sqrt(b * (1 - b) / trials)
    passed = result.empirical_rate >= b - tolerance
    log.info(
        f"{theorem.value}: empirical rate {result.empirical_rate:.4f}, bound {b:.4f}, "
        f"{'pass' if passed else 'FAIL'}"
    )
    return VerifyResult(theorem=theorem.value, passed=passed, tolerance=tolerance, result=result)
