"""
One-shot correctors: Fisher discriminants that flag inputs resembling known errors of a
legacy classifier, and cascades of them.

A corrector whitens inputs with a model fitted on the cloud of correctly handled situations
and flags x when ``(w, T(x)) > alpha * (w, w)``, w being the whitened error centroid. It does
not decide what to do with flagged inputs.
"""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from sepkit.core.errors import (
    DegenerateErrorCentroid,
    DimensionMismatch,
    EmptyCascade,
    EmptyHoldout,
    InsufficientCloud,
    InvalidAlpha,
    ValidationError,
)
from sepkit.core.models import (
    Cascade,
    CascadeDecision,
    Corrector,
    CorrectorEval,
    DataMatrix,
    PreprocessConfig,
)
from sepkit.core.preprocess import fit, transform

log = logging.getLogger("sepkit.core.corrector")

CENTROID_TOLERANCE = 1e-10


def train_corrector(
    correct_cloud: DataMatrix,
    error_points: DataMatrix,
    alpha: float,
    *,
    config: PreprocessConfig | None = None,
    error_ids: Sequence[str] | None = None,
) -> Corrector:
    """
    Build a corrector for one cluster of errors.

    Parameters
    ----------
    correct_cloud: DataMatrix
        Inputs the legacy system handles correctly. The whitening model is fitted on them.
    error_points: DataMatrix
        One cluster of inputs the legacy system gets wrong.
    alpha: float
        Threshold in ``(0, 1]``.
    config: PreprocessConfig | None
        Preprocessing of the cloud. Defaults to the condition number rule, with whitening and
        without projection on the sphere.
    error_ids: Sequence[str] | None
        Identifiers of the error points, kept as metadata. Defaults to their indices.

    Raises
    ------
    InsufficientCloud
        The cloud has no more points than selected components.
    DegenerateErrorCentroid
        The whitened error centroid is (numerically) the origin.
    """
    if not 0 < alpha <= 1:
        raise InvalidAlpha(alpha)
    if error_points.n_points < 1:
        raise ValidationError("At least one error point is needed.")
    if error_points.dim != correct_cloud.dim:
        raise DimensionMismatch(correct_cloud.dim, error_points.dim)
    if correct_cloud.n_points < 2:
        raise InsufficientCloud(correct_cloud.n_points, 1)

    model = fit(correct_cloud, config or PreprocessConfig())
    if correct_cloud.n_points < model.k_selected + 1:
        raise InsufficientCloud(correct_cloud.n_points, model.k_selected)

    direction = transform(model, error_points.points).mean(axis=0)
    norm = float(np.linalg.norm(direction))
    if norm < CENTROID_TOLERANCE:
        raise DegenerateErrorCentroid(norm)

    ids = tuple(error_ids) if error_ids is not None else tuple(
        str(i) for i in range(error_points.n_points)
    )
    if len(ids) != error_points.n_points:
        raise DimensionMismatch(error_points.n_points, len(ids))
    log.debug(
        f"Corrector trained on {correct_cloud.n_points} correct and {error_points.n_points} "
        f"error points, {model.k_selected} components, direction norm {norm:.4g}"
    )
    return Corrector(
        model=model,
        direction=direction,
        threshold=alpha,
        error_ids=ids,
        metadata={"cloud_size": correct_cloud.n_points, "errors": error_points.n_points},
    )


def _rows(data: DataMatrix | np.ndarray) -> np.ndarray:
    if isinstance(data, DataMatrix):
        return data.points
    return np.asarray(data, dtype=np.float64).reshape(-1, np.shape(data)[-1])


def flag_many(c: Corrector, points: np.ndarray | DataMatrix) -> np.ndarray:
    """
    Vectorised `flag` over the rows of a matrix.
    """
    matrix = _rows(points)
    if matrix.ndim != 2 or matrix.shape[1] != c.dim:
        raise DimensionMismatch(c.dim, matrix.shape[-1])
    projections = transform(c.model, matrix) @ c.direction
    return projections > c.threshold * float(c.direction @ c.direction)


def flag(c: Corrector, x) -> bool:
    vector = np.asarray(x, dtype=np.float64)
    if vector.shape != (c.dim,):
        raise DimensionMismatch(c.dim, vector.shape[-1] if vector.ndim else 1)
    return bool(flag_many(c, vector[None, :])[0])


def cascade_apply(c: Cascade, x) -> CascadeDecision:
    """
    Run the correctors in order; the first one flagging x decides.
    """
    if not c.correctors:
        raise EmptyCascade()
    for stage, corrector in enumerate(c.correctors):
        if flag(corrector, x):
            return CascadeDecision(flagged=True, stage=stage)
    return CascadeDecision(flagged=False)


def cascade_stages(c: Cascade, points: np.ndarray | DataMatrix) -> np.ndarray:
    """
    Stage flagging each row, -1 for rows flagged by no stage.
    """
    if not c.correctors:
        raise EmptyCascade()
    matrix = _rows(points)
    stages = np.full(matrix.shape[0], -1, dtype=np.int64)
    for stage, corrector in enumerate(c.correctors):
        pending = stages == -1
        if not pending.any():
            break
        flagged = flag_many(corrector, matrix[pending])
        stages[np.flatnonzero(pending)[flagged]] = stage
    return stages


def _flags(c: Corrector | Cascade, data: np.ndarray) -> np.ndarray:
    if isinstance(c, Cascade):
        return cascade_stages(c, data) >= 0
    return flag_many(c, data)


def evaluate(
    c: Corrector | Cascade,
    correct_holdout: DataMatrix | np.ndarray,
    error_holdout: DataMatrix | np.ndarray,
) -> CorrectorEval:
    """
    Detection rate on held-out errors and damage rate on held-out correct inputs.
    """
    correct, errors = _rows(correct_holdout), _rows(error_holdout)
    if correct.shape[0] == 0:
        raise EmptyHoldout("correct")
    if errors.shape[0] == 0:
        raise EmptyHoldout("error")
    detected = int(_flags(c, errors).sum())
    damaged = int(_flags(c, correct).sum())
    return CorrectorEval(
        detection_rate=detected / errors.shape[0],
        damage_rate=damaged / correct.shape[0],
        detected=detected,
        damaged=damaged,
        error_count=errors.shape[0],
        correct_count=correct.shape[0],
    )
