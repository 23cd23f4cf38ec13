"""
Fisher separability of points in a cloud.

A point x is separable from y at threshold alpha when ``(x, y) <= alpha * (x, x)``. The set of
points y that x cannot be separated from is the inside of the excluded ball of center
``y / (2 alpha)`` and radius ``|y| / (2 alpha)``.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from sepkit.core import metrics
from sepkit.core.baselines import effective_dimension, p_y_sphere_asymptotic
from sepkit.core.errors import (
    DimensionMismatch,
    EmptyAlphas,
    EmptyEligibleSet,
    InvalidAlpha,
    OutOfRange,
    ValidationError,
    ZeroAlpha,
    ZeroVectorOnSphere,
)
from sepkit.core.models import DataMatrix, LabeledDataset, SeparabilityReport, SeparabilityRow

log = logging.getLogger("sepkit.core.separability")

DEFAULT_BLOCK_SIZE = 256


def _vector(x, name: str) -> np.ndarray:
    array = np.asarray(x, dtype=np.float64)
    if array.ndim != 1:
        raise ValidationError(f"{name} must be a vector.")
    return array


def fisher_inseparable(x, y, alpha: float) -> bool:
    """
    Whether x cannot be separated from y, that is ``(x, y) > alpha * (x, x)``.

    Equality counts as separable. ``alpha = 0`` is accepted here only.
    """
    x, y = _vector(x, "x"), _vector(y, "y")
    if x.shape != y.shape:
        raise DimensionMismatch(x.shape[0], y.shape[0])
    if not 0 <= alpha <= 1:
        raise InvalidAlpha(alpha, "[0, 1]")
    return bool(np.dot(x, y) > alpha * np.dot(x, x))


def excluded_ball(y, alpha: float) -> tuple[np.ndarray, float]:
    """
    Center and radius of the open ball holding every point inseparable from y.
    """
    y = _vector(y, "y")
    if not alpha > 0:
        raise ZeroAlpha()
    return y / (2 * alpha), float(np.linalg.norm(y)) / (2 * alpha)


def empirical_p_y(
    ds: DataMatrix,
    y_index: int,
    alpha: float,
    class_filter: Sequence[str] | None = None,
) -> float:
    """
    Fraction of the other points of ``ds`` that cannot be separated from point ``y_index``.

    Parameters
    ----------
    ds: DataMatrix
        The cloud, at least two points.
    y_index: int
        Index of y in the cloud.
    alpha: float
        Threshold.
    class_filter: Sequence[str] | None
        Class labels of the points. When given, only points of another class than y are
        eligible, and the fraction is taken over them.

        `separability_report` divides its starred counts by M - 1 instead, so its
        ``mean_p_y_star`` is not the mean of these class-filtered fractions.

    Raises
    ------
    EmptyEligibleSet
        No point is eligible, all of them share the class of y.
    """
    if ds.n_points < 2:
        raise ValidationError("At least 2 points are needed to compute p_y.")
    if not -ds.n_points <= y_index < ds.n_points:
        raise IndexError(y_index)
    y_index %= ds.n_points
    points = ds.points
    eligible = np.ones(ds.n_points, dtype=bool)
    eligible[y_index] = False
    if class_filter is not None:
        if len(class_filter) != ds.n_points:
            raise DimensionMismatch(ds.n_points, len(class_filter))
        labels = np.asarray(class_filter, dtype=object)
        eligible &= labels != labels[y_index]
    count = int(eligible.sum())
    if count == 0:
        raise EmptyEligibleSet(y_index)
    products = points @ points[y_index]
    norms_sq = np.einsum("ij,ij->i", points, points)
    inseparable = (products > alpha * norms_sq) & eligible
    return int(inseparable.sum()) / count


@dataclass
class _BlockCounts:
    inseparable: np.ndarray  # (alphas, block) any y inseparable from x
    inseparable_cross: np.ndarray | None
    p_counts: np.ndarray  # (alphas, M) x inseparable from each y
    p_counts_cross: np.ndarray | None


def _count_block(
    points: np.ndarray,
    norms_sq: np.ndarray,
    alphas: np.ndarray,
    codes: np.ndarray | None,
    start: int,
    stop: int,
) -> _BlockCounts:
    products = points[start:stop] @ points.T
    rows = np.arange(stop - start)
    products[rows, rows + start] = -np.inf  # a point is never compared with itself
    different = codes[start:stop, None] != codes[None, :] if codes is not None else None

    size = len(alphas), stop - start
    result = _BlockCounts(
        inseparable=np.zeros(size, dtype=bool),
        inseparable_cross=np.zeros(size, dtype=bool) if codes is not None else None,
        p_counts=np.zeros((len(alphas), points.shape[0]), dtype=np.int64),
        p_counts_cross=(
            np.zeros((len(alphas), points.shape[0]), dtype=np.int64) if codes is not None else None
        ),
    )
    for i, alpha in enumerate(alphas):
        mask = products > alpha * norms_sq[start:stop, None]
        result.inseparable[i] = mask.any(axis=1)
        result.p_counts[i] = mask.sum(axis=0)
        if different is not None:
            cross = mask & different
            result.inseparable_cross[i] = cross.any(axis=1)  # type: ignore
            result.p_counts_cross[i] = cross.sum(axis=0)  # type: ignore
    metrics.separability_blocks.inc()
    return result


def _check_alphas(alphas: Sequence[float]) -> np.ndarray:
    if len(alphas) == 0:
        raise EmptyAlphas()
    for alpha in alphas:
        if not 0 < alpha <= 1:
            raise InvalidAlpha(alpha)
    return np.asarray(alphas, dtype=np.float64)


def project_to_sphere(ds: DataMatrix) -> DataMatrix:
    norms = np.linalg.norm(ds.points, axis=1)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise ZeroVectorOnSphere(int(zero[0]))
    return DataMatrix(ds.points / norms[:, None], ds.columns)


def _effective_dimension(mean_p_y: float | None, alpha: float) -> float | None:
    if mean_p_y is None or not 0 < mean_p_y < 1 or not 0 < alpha < 1:
        return None
    if mean_p_y > p_y_sphere_asymptotic(3, alpha):
        return None
    try:
        return effective_dimension(mean_p_y, alpha).value
    except OutOfRange:
        return None


def separability_report(
    ds: LabeledDataset,
    alphas: Sequence[float],
    sphere: bool = False,
    *,
    threads: int = 1,
    block_size: int = DEFAULT_BLOCK_SIZE,
    with_effective_dimension: bool = False,
) -> SeparabilityReport:
    """
    Count the points that cannot be separated from the rest of the cloud, for each alpha.

    For every alpha, ``N_alpha`` counts the points x with at least one y they cannot be
    separated from, and ``mean_p_y`` averages `empirical_p_y` over every point y. When the
    dataset has labels, the starred statistics only count pairs of points of different
    classes: ``N_alpha_star`` counts points inseparable from a point of another class, and
    ``mean_p_y_star`` averages the fraction of the other points that are both of another class
    and inseparable from y. Both are therefore bounded by their unstarred counterparts.

    Parameters
    ----------
    ds: LabeledDataset
        The cloud, usually whitened.
    alphas: Sequence[float]
        Thresholds in ``(0, 1]``.
    sphere: bool
        Project every point onto the unit sphere first.
    threads: int
        Worker threads for the pairwise products. Results do not depend on it.
    block_size: int
        Rows of the pairwise product matrix computed at once.
    with_effective_dimension: bool
        Add the sphere dimension reproducing each ``mean_p_y``, when there is one.
    """
    alpha_array = _check_alphas(alphas)
    data = ds.data
    if data.n_points < 2:
        raise ValidationError("At least 2 points are needed for a separability report.")
    if block_size < 1:
        raise ValidationError("The block size must be positive.")
    if sphere:
        data = project_to_sphere(data)

    points = data.points
    M = data.n_points
    norms_sq = np.einsum("ij,ij->i", points, points)
    if (norms_sq == 0).any():
        log.warning(
            f"{int((norms_sq == 0).sum())} points are the zero vector, they are inseparable "
            "from every point with a positive projection on them."
        )

    codes: np.ndarray | None = None
    n_classes: int | None = None
    if ds.labels is not None:
        uniques, codes = np.unique(np.asarray(ds.labels, dtype=object), return_inverse=True)
        n_classes = len(uniques)

    blocks = [(start, min(start + block_size, M)) for start in range(0, M, block_size)]

    def run(block: tuple[int, int]) -> _BlockCounts:
        return _count_block(points, norms_sq, alpha_array, codes, *block)

    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            results = list(executor.map(run, blocks))
    else:
        results = [run(block) for block in blocks]

    inseparable = np.concatenate([r.inseparable for r in results], axis=1)
    p_counts = np.sum([r.p_counts for r in results], axis=0)
    p_values = p_counts / (M - 1)
    if codes is not None:
        inseparable_cross = np.concatenate([r.inseparable_cross for r in results], axis=1)
        p_values_cross = np.sum([r.p_counts_cross for r in results], axis=0) / (M - 1)

    rows = []
    for i, alpha in enumerate(alphas):
        N = int(inseparable[i].sum())
        row = dict(
            alpha=float(alpha),
            N_alpha=N,
            nu_alpha=N / M,
            mean_p_y=float(p_values[i].mean()),
            var_p_y=float(p_values[i].var()),
        )
        if codes is not None:
            N_star = int(inseparable_cross[i].sum())
            row.update(
                N_alpha_star=N_star,
                nu_alpha_star=N_star / M,
                mean_p_y_star=float(p_values_cross[i].mean()),
                var_p_y_star=float(p_values_cross[i].var()),
                generalization_ratio=(N - N_star) / N_star if N_star > 0 else None,
            )
        if with_effective_dimension:
            row["effective_dimension"] = _effective_dimension(row["mean_p_y"], alpha)
            if codes is not None:
                row["effective_dimension_star"] = _effective_dimension(
                    row["mean_p_y_star"], alpha
                )
        rows.append(SeparabilityRow(**row))

    log.debug(f"Separability of {M} points computed for {len(alphas)} thresholds")
    return SeparabilityReport(tuple(rows), M, data.dim, n_classes, sphere)


def critical_level_reached(report: SeparabilityReport, starred: bool = False) -> list[bool]:
    """
    For each row, whether the mean p_y is below its reference level.

    The reference is one over the number of classes for the mean over all points, and one over
    the number of points for the starred mean.
    """
    levels = report.critical_levels
    if starred:
        if report.n_classes is None:
            raise ValidationError("The report has no starred statistics.")
        return [row.mean_p_y_star <= levels["one_over_M"] for row in report.rows]  # type: ignore
    level = levels.get("one_over_classes", math.inf)
    return [row.mean_p_y <= level for row in report.rows]
