import numpy as np
import pytest

from sepkit.core.errors import DimensionMismatch, ValidationError, ZeroVarianceFeature
from sepkit.core.models import DataMatrix, PreprocessConfig, PreprocessModel, SelectionRule
from sepkit.core.preprocess import explained_variance, fit, transform


def test_whitened_covariance_is_identity(gaussian_cloud: DataMatrix):
    model = fit(gaussian_cloud, PreprocessConfig(selection=SelectionRule.all))
    assert model.k_selected == 20

    whitened = transform(model, gaussian_cloud).points
    np.testing.assert_allclose(whitened.mean(axis=0), 0, atol=1e-10)
    np.testing.assert_allclose(np.cov(whitened, rowvar=False), np.eye(20), atol=1e-8)
    np.testing.assert_allclose(model.basis.T @ model.basis, np.eye(20), atol=1e-10)


def test_whitening_ignores_the_input_scale(gaussian_cloud: DataMatrix):
    whitened = transform(fit(gaussian_cloud), gaussian_cloud).points
    for c in (3.7, 1e3):
        scaled = DataMatrix(gaussian_cloud.points * c)
        np.testing.assert_allclose(transform(fit(scaled), scaled).points, whitened, atol=1e-8)


def test_centered_data_stays_centered(gaussian_cloud: DataMatrix):
    points = gaussian_cloud.points - gaussian_cloud.points.mean(axis=0)
    centered = DataMatrix(points)
    output = transform(fit(centered), centered).points
    np.testing.assert_allclose(output.mean(axis=0), 0, atol=1e-12)


def test_condition_rule_bounds_the_condition_number(rng: np.random.Generator):
    # 3 strong latent factors and 7 noisy copies
    latent = rng.standard_normal((400, 3))
    mixing = rng.standard_normal((3, 10))
    points = latent @ mixing + 0.05 * rng.standard_normal((400, 10))
    model = fit(DataMatrix(points))

    assert 1 <= model.k_selected < 10
    assert model.condition_number <= 10
    assert (model.eigenvalues >= 0.1 * model.spectrum[0]).all()
    assert not model.spectrum[model.k_selected] >= 0.1 * model.spectrum[0]


def test_fixed_rule(gaussian_cloud: DataMatrix):
    model = fit(gaussian_cloud, PreprocessConfig(selection=SelectionRule.fixed, components=5))
    assert model.k_selected == 5
    assert transform(model, gaussian_cloud).dim == 5
    np.testing.assert_array_equal(model.eigenvalues, model.spectrum[:5])


def test_fixed_rule_needs_enough_components(gaussian_cloud: DataMatrix):
    with pytest.raises(ValidationError):
        fit(gaussian_cloud, PreprocessConfig(selection=SelectionRule.fixed, components=21))
    with pytest.raises(ValidationError):
        PreprocessConfig(selection=SelectionRule.fixed)


def test_constant_feature_is_named(rng: np.random.Generator):
    points = rng.standard_normal((30, 3))
    points[:, 1] = 4.2
    with pytest.raises(ZeroVarianceFeature) as error:
        fit(DataMatrix(points, ("a", "b", "c")))
    assert error.value.index == 1
    assert "'b'" in error.value.message
    assert error.value.exit_code == 2


def test_eigenvalues_are_descending_with_fixed_signs(gaussian_cloud: DataMatrix):
    model = fit(gaussian_cloud, PreprocessConfig(selection=SelectionRule.all))
    assert (np.diff(model.spectrum) <= 0).all()
    pivots = np.argmax(np.abs(model.basis), axis=0)
    assert (model.basis[pivots, np.arange(model.k_selected)] > 0).all()

    again = fit(gaussian_cloud, PreprocessConfig(selection=SelectionRule.all))
    np.testing.assert_array_equal(again.basis, model.basis)


def test_sphere_projection(gaussian_cloud: DataMatrix):
    model = fit(gaussian_cloud, PreprocessConfig(sphere_project=True))
    norms = np.linalg.norm(transform(model, gaussian_cloud).points, axis=1)
    np.testing.assert_allclose(norms, 1.0, atol=1e-12)


def test_transform_vector_matches_matrix(gaussian_cloud: DataMatrix):
    model = fit(gaussian_cloud)
    matrix = transform(model, gaussian_cloud.points[:3])
    np.testing.assert_allclose(transform(model, gaussian_cloud.points[1]), matrix[1])
    with pytest.raises(DimensionMismatch):
        transform(model, np.zeros(19))
    with pytest.raises(DimensionMismatch):
        transform(model, DataMatrix(np.zeros((2, 3))))


def test_no_whitening_keeps_component_variances(gaussian_cloud: DataMatrix):
    model = fit(gaussian_cloud, PreprocessConfig(selection=SelectionRule.all, whiten=False))
    projected = transform(model, gaussian_cloud).points
    np.testing.assert_allclose(projected.var(axis=0, ddof=1), model.eigenvalues, rtol=1e-8)


def test_explained_variance(gaussian_cloud: DataMatrix):
    model = fit(gaussian_cloud, PreprocessConfig(selection=SelectionRule.fixed, components=4))
    selected = explained_variance(model)
    full = explained_variance(model, full=True)
    assert selected.shape == (4,)
    assert full.shape == (20,)
    assert selected[-1] == full[-1] == 1.0
    assert (np.diff(full) >= 0).all()
    assert full[3] < 1


def test_saved_model_transforms_identically(gaussian_cloud: DataMatrix):
    model = fit(gaussian_cloud, PreprocessConfig(sphere_project=True))
    restored = PreprocessModel.from_dict(model.to_dict())
    np.testing.assert_array_equal(
        transform(restored, gaussian_cloud).points, transform(model, gaussian_cloud).points
    )
    with pytest.raises(ValidationError):
        PreprocessModel.from_dict({"mean": [0.0]})
