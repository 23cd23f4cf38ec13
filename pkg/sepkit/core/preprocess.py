"""
Centering, scaling, principal components and whitening of point clouds.

A model is fitted once on a reference cloud and then applied to any other cloud of the same
dimension. Principal components are those of the correlation matrix, that is the covariance
of the centered data scaled to unit standard deviation.
"""

from __future__ import annotations

import logging
from typing import overload

import numpy as np

from sepkit.core.errors import (
    DegenerateCovariance,
    DimensionMismatch,
    ValidationError,
    ZeroVarianceFeature,
    ZeroVectorOnSphere,
)
from sepkit.core.models import DataMatrix, PreprocessConfig, PreprocessModel, SelectionRule

log = logging.getLogger("sepkit.core.preprocess")

# eigenvalues below this fraction of the largest one are numerically zero
EIGEN_TOLERANCE = 1e-12


def _select(eigenvalues: np.ndarray, config: PreprocessConfig) -> int:
    nonzero = int(np.count_nonzero(eigenvalues > EIGEN_TOLERANCE * eigenvalues[0]))
    if config.selection is SelectionRule.condition:
        return int(np.count_nonzero(eigenvalues >= config.ratio * eigenvalues[0]))
    if config.selection is SelectionRule.fixed:
        assert config.components is not None
        if config.components > nonzero:
            raise ValidationError(
                f"Asked for {config.components} components, only {nonzero} have a nonzero "
                "eigenvalue."
            )
        return config.components
    return nonzero


def fit(ds: DataMatrix, config: PreprocessConfig | None = None) -> PreprocessModel:
    """
    Fit the preprocessing pipeline on a point cloud.

    Parameters
    ----------
    ds: DataMatrix
        The reference cloud, at least two points.
    config: PreprocessConfig | None
        Component selection and output flags. Defaults keep ``λ >= 0.1·λ_max`` and whiten.

    Returns
    -------
    PreprocessModel
        The fitted model. Transforming ``ds`` with it gives zero mean data, with identity
        covariance when whitening.

    Raises
    ------
    ZeroVarianceFeature
        A feature is constant over the cloud.
    DegenerateCovariance
        No component survives the selection rule.
    """
    config = config or PreprocessConfig()
    points = ds.points
    if ds.n_points < 2:
        raise ValidationError("At least 2 points are needed to fit a preprocessing model.")

    mean = points.mean(axis=0)
    scale = points.std(axis=0, ddof=1)
    for index, (std, center) in enumerate(zip(scale, mean)):
        if not std > 1e-12 * max(1.0, abs(center)):
            name = ds.columns[index] if ds.columns else None
            raise ZeroVarianceFeature(index, name)

    scaled = (points - mean) / scale
    correlation = np.atleast_2d(np.cov(scaled, rowvar=False))
    eigenvalues, eigenvectors = np.linalg.eigh(correlation)
    # eigh sorts ascending
    eigenvalues = eigenvalues[::-1].copy()
    eigenvectors = eigenvectors[:, ::-1].copy()
    if not eigenvalues[0] > 0:
        raise DegenerateCovariance()
    eigenvalues[eigenvalues < EIGEN_TOLERANCE * eigenvalues[0]] = 0.0

    # fix the sign of each component so refits give identical models
    pivots = np.argmax(np.abs(eigenvectors), axis=0)
    signs = np.sign(eigenvectors[pivots, np.arange(eigenvectors.shape[1])])
    signs[signs == 0] = 1
    eigenvectors *= signs

    k = _select(eigenvalues, config)
    if k < 1 or not eigenvalues[k - 1] > 0:
        raise DegenerateCovariance()

    model = PreprocessModel(
        mean=mean,
        scale=scale,
        eigenvalues=eigenvalues[:k],
        basis=eigenvectors[:, :k],
        whiten=config.whiten,
        sphere_project=config.sphere_project,
        spectrum=eigenvalues,
        rule=config.describe(),
    )
    log.info(
        f"Selected {k} of {ds.dim} components with rule {model.rule}, "
        f"condition number {model.condition_number:.3f}"
    )
    return model


def _project(model: PreprocessModel, points: np.ndarray) -> np.ndarray:
    projected = ((points - model.mean) / model.scale) @ model.basis
    if model.whiten:
        projected = projected / np.sqrt(model.eigenvalues)
    if model.sphere_project:
        norms = np.linalg.norm(projected, axis=1)
        zero = np.flatnonzero(norms == 0)
        if zero.size:
            raise ZeroVectorOnSphere(int(zero[0]) if points.shape[0] > 1 else None)
        projected = projected / norms[:, None]
    return projected


@overload
def transform(model: PreprocessModel, x: DataMatrix) -> DataMatrix: ...


@overload
def transform(model: PreprocessModel, x: np.ndarray) -> np.ndarray: ...


def transform(model: PreprocessModel, x: DataMatrix | np.ndarray) -> DataMatrix | np.ndarray:
    """
    Apply a fitted model to a single n-vector or to a whole cloud.

    A vector gives a k-vector, a `DataMatrix` gives a M×k `DataMatrix`.
    """
    if isinstance(x, DataMatrix):
        if x.dim != model.dim:
            raise DimensionMismatch(model.dim, x.dim)
        return DataMatrix(_project(model, x.points))

    vector = np.asarray(x, dtype=np.float64)
    if vector.ndim == 2:
        if vector.shape[1] != model.dim:
            raise DimensionMismatch(model.dim, vector.shape[1])
        return _project(model, vector)
    if vector.shape != (model.dim,):
        raise DimensionMismatch(model.dim, vector.shape[-1] if vector.ndim else 1)
    return _project(model, vector[None, :])[0]


def explained_variance(model: PreprocessModel, full: bool = False) -> np.ndarray:
    """
    Cumulative fraction of variance explained by the first 1, 2, ... components.

    By default the fractions are relative to the retained components, so the last value is 1.
    With ``full``, they run over the whole correlation spectrum instead.
    """
    eigenvalues = model.spectrum if full else model.eigenvalues
    assert eigenvalues is not None
    cumulative = np.cumsum(eigenvalues) / eigenvalues.sum()
    cumulative[-1] = 1.0
    return cumulative
