import math

import numpy as np
import pytest

from sepkit.core.baselines import (
    ball_theorem_bounds,
    bounded_density_max_M,
    corollary_max_M,
    cube_theorem_bounds,
    effective_dimension,
    effective_dimension_ball,
    excluded_volume_fraction,
    exponential_separability_max_M,
    logconcave_max_M,
    mean_p_y_ball,
    noisy_bound,
    p_y_ball_alpha1,
    p_y_sphere_asymptotic,
    p_y_sphere_exact,
    smac_max_M,
    sphere_curves,
)
from sepkit.core.errors import (
    DeltaOutOfRange,
    InvalidAlpha,
    OutOfRange,
    ParamOutOfRange,
    UnsupportedDimension,
)
from sepkit.core.models import BallParams, CubeParams, NoisyParams, SmacParams


def test_ball_alpha1_law():
    assert mean_p_y_ball(10) == 2.0**-11
    assert p_y_ball_alpha1(10, 0.0) == 0.0
    assert p_y_ball_alpha1(10, 2.0**-11) == pytest.approx(0.5)
    assert p_y_ball_alpha1(10, 2.0**-10) == 1.0
    assert p_y_ball_alpha1(10, 1.0) == 1.0
    assert effective_dimension_ball(2.0**-11) == pytest.approx(10.0)
    with pytest.raises(OutOfRange):
        effective_dimension_ball(0.5)


@pytest.mark.parametrize("alpha", np.linspace(0.05, 0.95, 10))
def test_sphere_in_dimension_3_is_linear(alpha: float):
    assert p_y_sphere_exact(3, alpha) == pytest.approx((1 - alpha) / 2, abs=1e-9)


@pytest.mark.parametrize(
    "n, alpha, tolerance",
    [
        # the large n formula converges slowest for small alpha
        (50, 0.6, 0.08),
        (50, 0.8, 0.05),
        (50, 0.9, 0.05),
        (100, 0.6, 0.05),
        (100, 0.8, 0.05),
        (100, 0.9, 0.05),
    ],
)
def test_sphere_asymptotic_formula(n: int, alpha: float, tolerance: float):
    exact = p_y_sphere_exact(n, alpha)
    assert exact > 0
    assert abs(p_y_sphere_asymptotic(n, alpha) - exact) / exact <= tolerance


def test_sphere_exact_for_large_dimension():
    value = p_y_sphere_exact(2000, 0.5)
    assert 0 < value < 1e-100
    assert p_y_sphere_exact(20, 1.0) == 0.0
    with pytest.raises(UnsupportedDimension):
        p_y_sphere_exact(2, 0.5)
    with pytest.raises(InvalidAlpha):
        p_y_sphere_asymptotic(10, 1.0)


def test_sphere_curves_decrease_with_dimension():
    rows = sphere_curves(list(range(8, 26)), [0.8, 0.9, 0.99])
    assert len(rows) == 3
    for row in rows:
        assert len(row) == 19
        values = row[1:]
        assert all(a > b for a, b in zip(values, values[1:]))
    exact = sphere_curves([10], [0.8], exact=True)
    assert exact[0][1] == pytest.approx(math.log10(p_y_sphere_exact(10, 0.8)))


@pytest.mark.parametrize("alpha", [0.6, 0.8, 0.9])
def test_effective_dimension_inverts_the_sphere_formula(alpha: float):
    for n in range(3, 101):
        estimate = effective_dimension(p_y_sphere_asymptotic(n, alpha), alpha)
        assert abs(estimate.value - n) <= 1e-6
        assert estimate.nearest == n


def test_effective_dimension_out_of_range():
    with pytest.raises(OutOfRange):
        effective_dimension(0.99, 0.8)
    with pytest.raises(OutOfRange):
        effective_dimension(0.0, 0.8)


def test_ball_bounds():
    bounds = ball_theorem_bounds(BallParams(n=50, M=10, r=0.9))
    assert bounds.all_pairs.value == pytest.approx(0.9485, abs=1e-4)
    assert bounds.single.value > bounds.all_pairs.value
    assert bounds.angle.raw <= bounds.all_pairs.raw
    assert bounds.quasi_orthogonal.raw < bounds.angle.raw
    assert not bounds.all_pairs.vacuous


def test_ball_bound_can_be_vacuous():
    bounds = ball_theorem_bounds(BallParams(n=5, M=100, r=0.9))
    assert bounds.all_pairs.vacuous
    assert bounds.all_pairs.raw < 0
    assert bounds.all_pairs.value == 0.0


@pytest.mark.parametrize("n, r, theta", [(50, 0.9, 0.1), (20, 0.9, 0.2), (200, 0.95, 0.05)])
def test_corollary_sizes_satisfy_the_ball_bounds(n: int, r: float, theta: float):
    capacity = corollary_max_M(n, r, theta)
    if capacity.max_M_pairwise is not None:
        bounds = ball_theorem_bounds(BallParams(n=n, M=capacity.max_M_pairwise, r=r))
        assert bounds.all_pairs.raw > 1 - theta
    # beyond 1e12 points the margin is below float resolution
    if capacity.max_M_single is not None and capacity.max_M_single < 1e12:
        bounds = ball_theorem_bounds(BallParams(n=n, M=capacity.max_M_single, r=r))
        assert bounds.single.raw > 1 - theta


def test_corollary_values():
    capacity = corollary_max_M(50, 0.9, 0.1)
    assert capacity.pairwise_bound == pytest.approx(0.1 / 0.9**50, rel=1e-6)
    assert capacity.max_M_pairwise == 19
    assert corollary_max_M(5, 0.9, 0.1).single_bound < 0


def test_corollary_large_dimension_does_not_overflow():
    capacity = corollary_max_M(5000, 0.5, 0.1)
    assert math.isfinite(capacity.pairwise_bound)
    assert math.isfinite(capacity.single_bound)
    # sqrt(2 theta) / rho^(n/2) once the square root dominates
    expected = 0.5 * math.log(0.2) - 1250 * math.log(0.75)
    assert math.log(capacity.pairwise_bound) == pytest.approx(expected, rel=1e-9)


def test_cube_bounds():
    params = CubeParams(n=2000, M=10, delta=0.5, sigma0=0.1, R0_sq=2000 / 12)
    bounds = cube_theorem_bounds(params)
    R0_4 = (2000 / 12) ** 2
    first = 20 * math.exp(-2 * 0.25 * R0_4 / 2000)
    second = math.exp(-2 * R0_4 * 0.25 / 2000)
    assert bounds.all_pairs.raw == pytest.approx(1 - first - 90 * second)
    assert bounds.single.raw == pytest.approx(1 - first - 9 * second)
    with pytest.raises(ParamOutOfRange):
        CubeParams(n=10, M=10, delta=0.7, sigma0=0.1, R0_sq=1)
    with pytest.raises(ParamOutOfRange):
        CubeParams(n=100, M=10, delta=0.5, sigma0=1.0, R0_sq=1)


def test_smac():
    bound = smac_max_M(SmacParams(A=1.0, B=0.5, C=2.0, delta=0.1, N_b=10))
    assert bound.b == 1.05
    assert bound.a == pytest.approx(min(0.1 / 4, 1.05**-10))
    assert bound.max_M(100) == pytest.approx(bound.a * 1.05**100)
    small = smac_max_M(SmacParams(A=0.3, B=0.99, C=1.0, delta=0.5))
    assert small.b == pytest.approx(min(1 / 0.99, math.exp(0.01)))

    large = smac_max_M(SmacParams(A=3.0, B=0.5, C=1.0, delta=0.1))
    assert large.max_M(20000) == math.inf
    assert large.max_M(1000) == pytest.approx(math.exp(math.log(0.05) + 1000 * math.log(1.05)))


def test_noisy_bound():
    assert noisy_bound(NoisyParams(n=100, M=50, epsilon=0.5, delta=0.15)).vacuous
    bound = noisy_bound(NoisyParams(n=2000, M=50, epsilon=0.5, delta=0.15))
    assert 1 - 1e-6 < bound.value < 1
    with pytest.raises(DeltaOutOfRange):
        NoisyParams(n=100, M=50, epsilon=0.5, delta=0.05)


def test_capacity_formulas():
    assert exponential_separability_max_M(10, 1.0, 0.25, 0.5) == pytest.approx(1024)
    assert logconcave_max_M(4, 2.0, 2.0, 1.0, 1.0) == pytest.approx(math.exp(2.0))
    assert bounded_density_max_M(10, 1.0, 1.0, 1.0, 0.1) == pytest.approx(102.4)
    assert excluded_volume_fraction(10, 1.0, 10) == pytest.approx(10 / 1024)
    assert excluded_volume_fraction(2, 0.5, 10) == 1.0
    with pytest.raises(ParamOutOfRange):
        bounded_density_max_M(10, 1.0, 0.5, 1.0, 0.1)
    with pytest.raises(ParamOutOfRange):
        logconcave_max_M(4, 3.0, 1.0, 1.0, 1.0)
