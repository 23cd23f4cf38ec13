"""
Closed-form separability probabilities and separation theorem bounds.

Every bound calculator returns the formula value itself along with its clamped value, so a
vacuous bound (nonpositive probability) is reported rather than hidden. Powers of large
dimension are evaluated in log-space.
"""

from __future__ import annotations

import logging
import math

from cachetools import LRUCache, cached
from scipy import integrate, optimize, special

from sepkit.core.errors import InvalidAlpha, OutOfRange, ParamOutOfRange, UnsupportedDimension
from sepkit.core.models import (
    BallBounds,
    BallParams,
    Bound,
    CapacityBounds,
    CubeBounds,
    CubeParams,
    EffectiveDimension,
    NoisyParams,
    SmacBound,
    SmacParams,
)

log = logging.getLogger("sepkit.core.baselines")

QUAD_TOLERANCE = 1e-12
QUAD_LIMIT = 500


def _power(base: float, exponent: float) -> float:
    """``base ** exponent`` for a positive base, zero on underflow and inf on overflow."""
    if base == 0:
        return 0.0
    log_value = exponent * math.log(base)
    if log_value > 709:
        return math.inf
    return math.exp(log_value)


def _bound(name: str, raw: float) -> Bound:
    bound = Bound(raw)
    if bound.vacuous:
        log.info(f"The {name} bound is vacuous (raw value {raw:.6g})")
    return bound


# ---------------------------------------------------------------------------
# uniform ball, alpha = 1


def p_y_ball_alpha1(n: int, a: float) -> float:
    """
    Distribution function of p_y for the uniform ball at alpha = 1, uniform on ``[0, 2^-n]``.
    """
    if n < 1:
        raise UnsupportedDimension(n, 1)
    if a < 0:
        raise ParamOutOfRange("a >= 0", a=a)
    if a == 0:
        return 0.0
    log2_value = n + math.log2(a)
    return 1.0 if log2_value >= 0 else 2.0**log2_value


def mean_p_y_ball(n: int) -> float:
    if n < 1:
        raise UnsupportedDimension(n, 1)
    return math.ldexp(1.0, -(n + 1))


def effective_dimension_ball(mean_p_y: float) -> float:
    """
    The dimension of the uniform ball whose mean p_y at alpha = 1 is ``mean_p_y``.
    """
    if not 0 < mean_p_y <= 0.25:
        raise OutOfRange(f"mean p_y {mean_p_y!r} is outside (0, 1/4], the range of the ball law.")
    return -math.log2(mean_p_y) - 1


# ---------------------------------------------------------------------------
# uniform sphere


def _check_sphere(n: float, alpha: float, closed: bool):
    if n < 3:
        raise UnsupportedDimension(n, 3)
    if closed and not 0 < alpha <= 1:
        raise InvalidAlpha(alpha, "(0, 1]")
    if not closed and not 0 < alpha < 1:
        raise InvalidAlpha(alpha, "(0, 1)")


@cached(LRUCache(maxsize=1024))
def log_sphere_area_ratio(n: float) -> float:
    """
    ``log(A_{n-2} / A_{n-1})`` where ``A_{m-1} = 2 π^{m/2} / Γ(m/2)`` is the area of the unit
    sphere in dimension m.
    """
    return float(special.gammaln(n / 2) - special.gammaln((n - 1) / 2) - 0.5 * math.log(math.pi))


@cached(LRUCache(maxsize=4096))
def p_y_sphere_exact(n: int, alpha: float) -> float:
    """
    p_y for the uniform distribution on the unit sphere, which does not depend on y.

    This is the area fraction of the spherical cap of angle ``arccos(alpha)``. The integral of
    ``sin^(n-2)`` is computed relative to its value at the cap angle to stay in range for large n.
    """
    _check_sphere(n, alpha, closed=True)
    if alpha == 1:
        return 0.0
    angle = math.acos(alpha)
    power = n - 2
    log_sin_angle = math.log(math.sin(angle))

    def integrand(phi: float) -> float:
        return math.exp(power * (math.log(math.sin(phi)) - log_sin_angle))

    if power == 1:
        scaled = (1 - alpha) / math.sin(angle)
    else:
        scaled, _ = integrate.quad(
            integrand,
            0.0,
            angle,
            epsabs=QUAD_TOLERANCE,
            epsrel=QUAD_TOLERANCE,
            limit=QUAD_LIMIT,
        )
    return math.exp(log_sphere_area_ratio(n) + power * log_sin_angle) * scaled


def log_p_y_sphere_asymptotic(n: float, alpha: float) -> float:
    _check_sphere(n, alpha, closed=False)
    return (n - 1) / 2 * math.log(1 - alpha**2) - math.log(
        alpha * math.sqrt(2 * math.pi * (n - 2))
    )


def p_y_sphere_asymptotic(n: float, alpha: float) -> float:
    """
    Large-n approximation of `p_y_sphere_exact`, ``(1-α²)^((n-1)/2) / (α sqrt(2π(n-2)))``.
    """
    return math.exp(log_p_y_sphere_asymptotic(n, alpha))


def sphere_curves(
    ns: list[int], alphas: list[float], exact: bool = False
) -> list[list[float]]:
    """
    Rows of ``alpha, log10 p_y(n_1), log10 p_y(n_2), ...`` for the uniform sphere.
    """
    rows = []
    for alpha in alphas:
        row = [alpha]
        for n in ns:
            if exact:
                value = p_y_sphere_exact(n, alpha)
                row.append(math.log10(value) if value > 0 else -math.inf)
            else:
                row.append(log_p_y_sphere_asymptotic(n, alpha) / math.log(10))
        rows.append(row)
    return rows


def effective_dimension(mean_p_y: float, alpha: float) -> EffectiveDimension:
    """
    The sphere dimension whose asymptotic p_y equals ``mean_p_y`` at threshold ``alpha``.

    The asymptotic formula strictly decreases in n on ``[3, ∞)``, so the root is unique; it is
    bracketed by doubling the upper end and refined with Brent's method.

    Raises
    ------
    OutOfRange
        ``mean_p_y`` is not in ``(0, 1)`` or is above the value for n = 3.
    """
    if not 0 < alpha < 1:
        raise InvalidAlpha(alpha, "(0, 1)")
    if not 0 < mean_p_y < 1:
        raise OutOfRange(f"mean p_y must be in (0, 1), got {mean_p_y!r}.")
    target = math.log(mean_p_y)

    def gap(n: float) -> float:
        return log_p_y_sphere_asymptotic(n, alpha) - target

    low = 3.0
    start = gap(low)
    if start <= 0:
        # a few ulps below the n=3 value still maps to n=3
        if start > -1e-12:
            return EffectiveDimension(low, alpha)
        raise OutOfRange(
            f"mean p_y {mean_p_y:.6g} is above the n=3 value "
            f"{p_y_sphere_asymptotic(3, alpha):.6g} at alpha={alpha}."
        )
    high = 6.0
    while gap(high) > 0:
        low, high = high, high * 2
    value = optimize.brentq(gap, low, high, xtol=1e-10, maxiter=500)
    return EffectiveDimension(float(value), alpha)


# ---------------------------------------------------------------------------
# theorem bounds


def ball_theorem_bounds(p: BallParams) -> BallBounds:
    """
    Bounds for M points drawn uniformly in the unit ball.

    ``single``: one point is Fisher-separable from the M - 1 others,
    ``all_pairs``: the whole set is Fisher-separable,
    ``angle``: the whole set is Fisher-separable and its vectors are pairwise at an angle
    whose cosine is below ``r``,
    ``quasi_orthogonal``: the normalized vectors are pairwise almost orthogonal.
    """
    r_n = _power(p.r, p.n)
    rho_n = _power(p.rho, p.n)
    M = p.M
    return BallBounds(
        single=_bound("ball single point", 1 - r_n - 0.5 * (M - 1) * rho_n),
        all_pairs=_bound("ball all pairs", 1 - M * r_n - 0.5 * M * (M - 1) * rho_n),
        angle=_bound("ball angle", 1 - M * r_n - M * (M - 1) * rho_n),
        quasi_orthogonal=_bound(
            "ball quasi-orthogonal", 1 - 2 * M * r_n - 2 * M * (M - 1) * rho_n
        ),
    )


def corollary_max_M(n: int, r: float, theta: float) -> CapacityBounds:
    """
    Set sizes below which the ball bounds exceed ``1 - theta``.

    Parameters
    ----------
    n: int
        Dimension.
    r: float
        Radius of the inner ball, in ``(0, 1)``.
    theta: float
        Acceptable failure probability, in ``(0, 1)``.
    """
    params = BallParams(n=n, M=1, r=r, theta=theta)
    log_r, log_rho = math.log(r), math.log(params.rho)
    r_n = _power(r, n)

    # 2 (theta - r^n) / rho^n
    if theta == r_n:
        single = 0.0
    else:
        magnitude = math.log(2 * abs(theta - r_n)) - n * log_rho
        single = math.copysign(math.exp(min(magnitude, 709.0)), theta - r_n)

    # (r/rho)^n (sqrt(1 + t) - 1) with t = 2 theta rho^n / r^2n, written as
    # (2 theta / r^n) / (sqrt(1 + t) + 1) so that large n neither overflows nor cancels
    log_t = math.log(2 * theta) + n * log_rho - 2 * n * log_r
    if log_t > 700:
        pairwise = math.exp(math.log(2 * theta) - n * log_r - 0.5 * log_t)
    else:
        pairwise = math.exp(math.log(2 * theta) - n * log_r) / (math.sqrt(1 + math.exp(log_t)) + 1)
    return CapacityBounds(single_bound=single, pairwise_bound=pairwise)


def cube_theorem_bounds(p: CubeParams) -> CubeBounds:
    """
    Bounds for M i.i.d. centered points with independent coordinates in a cube.

    ``R0_sq`` bounds the sum of coordinate variances from below and ``sigma0`` each of them.
    """
    R0_4 = p.R0_sq**2
    first = 2 * p.M * math.exp(-2 * p.delta**2 * R0_4 / p.n)
    second = math.exp(-2 * R0_4 * (2 - 3 * p.delta) ** 2 / p.n)
    return CubeBounds(
        single=_bound("cube single point", 1 - first - (p.M - 1) * second),
        all_pairs=_bound("cube all pairs", 1 - first - p.M * (p.M - 1) * second),
    )


def smac_max_M(p: SmacParams) -> SmacBound:
    """
    Constants a and b such that ``a * b**n`` points of a SmAC distribution are separable with
    probability above ``1 - delta``.

    ``N_b`` is the dimension above which the volume estimate for level b holds, it is not
    known in closed form and has to be supplied.
    """
    b = min(1.05, 1 / p.B, math.exp((p.A / 3) ** 2))
    a = min(1.0, p.delta / (2 * p.C), _power(b, -p.N_b))
    return SmacBound(a=a, b=b)


def noisy_bound(p: NoisyParams) -> Bound:
    """
    Probability that M points drawn in balls of radius epsilon around arbitrary centers are
    each separable from the others, Fisher discriminants being centered on the cluster centers.
    """
    n = p.n
    log_first = (
        math.log(2 * p.M**2 / (p.delta * math.sqrt(n)))
        + (n + 1) / 2 * math.log(1 - p.delta**2)
    )
    first = math.exp(log_first) if log_first < 709 else math.inf
    second = p.M * _power(2 * p.delta / p.epsilon, n)
    return _bound("perturbed clusters", 1 - first - second)


def logconcave_max_M(
    n: int, alpha_class: float, a_const: float, b_const: float, delta: float
) -> float:
    """
    ``sqrt(2 delta / a) * exp(b/2 * n^(alpha/2))`` for isotropic log-concave families with
    tails of class alpha. The constants a and b are not constructive and must be supplied.
    """
    if not 1 <= alpha_class <= 2:
        raise ParamOutOfRange("1 <= alpha_class <= 2", alpha_class=alpha_class)
    if a_const <= 0:
        raise ParamOutOfRange("a_const > 0", a_const=a_const)
    if b_const <= 0:
        raise ParamOutOfRange("b_const > 0", b_const=b_const)
    if delta <= 0:
        raise ParamOutOfRange("delta > 0", delta=delta)
    exponent = b_const / 2 * n ** (alpha_class / 2)
    log_value = 0.5 * math.log(2 * delta / a_const) + exponent
    return math.exp(log_value) if log_value < 709 else math.inf


def exponential_separability_max_M(n: int, a_const: float, b_const: float, delta: float) -> float:
    """
    ``sqrt(2 delta / a) * (1 / sqrt(b))^n``, for families where the probability of any point
    being inseparable from y is at most ``a * b^n`` with ``0 < b < 1``.
    """
    if a_const <= 0:
        raise ParamOutOfRange("a_const > 0", a_const=a_const)
    if not 0 < b_const < 1:
        raise ParamOutOfRange("0 < b_const < 1", b_const=b_const)
    if delta <= 0:
        raise ParamOutOfRange("delta > 0", delta=delta)
    log_value = 0.5 * math.log(2 * delta / a_const) - n / 2 * math.log(b_const)
    return math.exp(log_value) if log_value < 709 else math.inf


def bounded_density_max_M(n: int, alpha: float, r: float, C: float, theta: float) -> float:
    """
    Size of a set Y below which a random point of a distribution with density bounded by
    ``C / V(ball of radius r)`` is separable from Y with probability above ``1 - theta``.
    """
    if not 0.5 < alpha <= 1:
        raise ParamOutOfRange("1/2 < alpha <= 1", alpha=alpha)
    if not 1 / (2 * alpha) < r <= 1:
        raise ParamOutOfRange("1/(2*alpha) < r <= 1", r=r, alpha=alpha)
    if not 0 < theta < 1:
        raise ParamOutOfRange("0 < theta < 1", theta=theta)
    if C <= 0:
        raise ParamOutOfRange("C > 0", C=C)
    log_value = math.log(theta) + n * math.log(2 * r * alpha) - math.log(C)
    return math.exp(log_value) if log_value < 709 else math.inf


def excluded_volume_fraction(n: int, alpha: float, size: int) -> float:
    """
    Upper bound on the fraction of the unit ball excluded by ``size`` points of the ball.
    """
    if not 0 < alpha <= 1:
        raise InvalidAlpha(alpha)
    if size < 0:
        raise ParamOutOfRange("size >= 0", size=size)
    if size == 0:
        return 0.0
    log_value = math.log(size) - n * math.log(2 * alpha)
    return min(1.0, math.exp(log_value)) if log_value < 709 else 1.0
