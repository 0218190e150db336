"""Numerical kernel for logistic acceptance and optimal offer pricing.

The acceptance probability of a driver for an offer is logistic in the
linear score ``alpha + B.X + D.Y + gamma*C``.  Maximising the expected
savings ``P(C) * (Cbar - C)`` over the compensation ``C`` has a closed form
in terms of the principal Lambert W function evaluated at an exponential,
``W(exp(z))`` with ``z = alpha + B.X + D.Y + gamma*Cbar - 1``.  For the
bundle sizes and costs of interest ``z`` easily exceeds the range of
``exp``, so :func:`lambert_w_of_exp` solves ``w + ln(w) = z`` directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "BehaviorCoefficients",
    "PredictorVector",
    "lambert_w0",
    "lambert_w_of_exp",
    "acceptance_probability",
    "optimal_compensation",
    "expected_savings",
    "reduced_cost",
    "max_expected_savings",
    "OfferValue",
    "price_offer",
]

_MAX_ITER = 100


@dataclass(frozen=True, slots=True)
class BehaviorCoefficients:
    """Logistic acceptance coefficients of one driver."""

    intercept: float
    detour_coeff: float
    size_coeff: float
    compensation_coeff: float
    extra_bundle_coeffs: tuple[float, ...] = ()
    driver_coeffs: tuple[float, ...] = ()
    driver_values: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if not self.compensation_coeff > 0:
            raise ValueError("compensation_coeff must be > 0")
        if self.detour_coeff > 0:
            raise ValueError("detour_coeff must be <= 0")
        if self.size_coeff > 0:
            raise ValueError("size_coeff must be <= 0")
        if len(self.driver_coeffs) != len(self.driver_values):
            raise ValueError("driver_coeffs and driver_values differ in length")

    @property
    def driver_term(self) -> float:
        """``D.Y``, the part of the score that does not depend on the bundle."""
        return math.fsum(d * y for d, y in zip(self.driver_coeffs, self.driver_values))

    def bundle_term(self, x: PredictorVector) -> float:
        """``B.X`` for the predictor vector ``x``."""
        if len(x.extras) != len(self.extra_bundle_coeffs):
            raise ValueError("extra predictor count does not match coefficients")
        s = self.detour_coeff * x.detour + self.size_coeff * x.bundle_size
        for b, v in zip(self.extra_bundle_coeffs, x.extras):
            s += b * v
        return s

    def base_score(self, x: PredictorVector) -> float:
        """Score without the compensation term: ``alpha + B.X + D.Y``."""
        return self.intercept + self.bundle_term(x) + self.driver_term


@dataclass(frozen=True, slots=True)
class PredictorVector:
    detour: float
    bundle_size: float
    extras: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.detour < 0 or self.bundle_size < 0 or any(v < 0 for v in self.extras):
            raise ValueError("predictor values must be non-negative")


def lambert_w0(x: float) -> float:
    """Principal branch of the Lambert W function for ``x >= 0``.

    Halley iteration seeded with ``ln(1+x)`` below ``e`` and with
    ``ln x - ln ln x`` above.
    """
    if x < 0 or math.isnan(x):
        raise ValueError(f"lambert_w0 is only defined here for x >= 0, got {x!r}")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return math.inf
    if x < math.e:
        w = math.log1p(x)
    else:
        lx = math.log(x)
        w = lx - math.log(lx)
    for _ in range(_MAX_ITER):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= dw
        if abs(dw) <= 4e-16 * (1.0 + abs(w)):
            break
    return w


def lambert_w_of_exp(z: float) -> float:
    """Evaluate ``W(exp(z))`` without forming ``exp(z)`` for large ``z``.

    For ``z >= 1`` the result solves ``w + ln w = z`` (Newton iteration);
    below that ``exp(z) <= e`` is safe to evaluate.
    """
    if math.isnan(z):
        raise ValueError("z must be a number")
    if z < 1.0:
        return lambert_w0(math.exp(z))
    if math.isinf(z):
        return math.inf
    w = max(z - math.log(max(z, 1.0)), 1e-9)
    for _ in range(_MAX_ITER):
        f = w + math.log(w) - z
        dw = f / (1.0 + 1.0 / w)
        nw = w - dw
        if nw <= 0.0:
            nw = w / 2.0
        if abs(nw - w) <= 4e-16 * (1.0 + nw):
            w = nw
            break
        w = nw
    return w


def _logistic(u: float) -> float:
    if u >= 0:
        return 1.0 / (1.0 + math.exp(-u))
    e = math.exp(u)
    return e / (1.0 + e)


def acceptance_probability(
    coeffs: BehaviorCoefficients, x: PredictorVector, compensation: float
) -> float:
    """Logistic probability that the driver accepts the offer."""
    if compensation < 0:
        raise ValueError("compensation must be >= 0")
    return _logistic(coeffs.base_score(x) + coeffs.compensation_coeff * compensation)


def _w_term(coeffs: BehaviorCoefficients, x: PredictorVector, outsource_total: float) -> float:
    z = coeffs.base_score(x) + coeffs.compensation_coeff * outsource_total - 1.0
    return lambert_w_of_exp(z)


def optimal_compensation(
    coeffs: BehaviorCoefficients, x: PredictorVector, outsource_total: float
) -> float:
    """Unconstrained maximiser of ``P(C) * (Cbar - C)``.

    The value may be negative for very cheap bundles; callers decide how to
    treat such offers (see :func:`price_offer`).
    """
    if not outsource_total > 0:
        raise ValueError("outsource_total must be > 0")
    g = coeffs.compensation_coeff
    w = _w_term(coeffs, x, outsource_total)
    return outsource_total - (w + 1.0) / g


def expected_savings(probability: float, outsource_total: float, compensation: float) -> float:
    if not 0.0 <= probability <= 1.0:
        raise ValueError("probability must lie in [0, 1]")
    return probability * (outsource_total - compensation)


def max_expected_savings(
    coeffs: BehaviorCoefficients, x: PredictorVector, outsource_total: float
) -> float:
    """``W(exp(z)) / gamma``: expected savings at the optimal compensation."""
    return _w_term(coeffs, x, outsource_total) / coeffs.compensation_coeff


def reduced_cost(
    coeffs: BehaviorCoefficients,
    x: PredictorVector,
    outsource_total: float,
    dual_task_sum: float,
    dual_driver: float,
) -> float:
    return max_expected_savings(coeffs, x, outsource_total) - dual_task_sum - dual_driver


@dataclass(frozen=True, slots=True)
class OfferValue:
    compensation: float
    acceptance_probability: float
    expected_savings: float

    @property
    def worthwhile(self) -> bool:
        return self.compensation > 0.0


_WORTHLESS = OfferValue(0.0, 0.0, 0.0)


def price_offer(coeffs: BehaviorCoefficients, x: PredictorVector, outsource_total: float) -> OfferValue:
    """Optimal compensation, acceptance probability and expected savings.

    A non-positive optimal compensation means no offer is worth making: a
    driver never accepts an offer without compensation, so such offers are
    valued at zero.
    """
    if outsource_total <= 0:
        return _WORTHLESS
    c = optimal_compensation(coeffs, x, outsource_total)
    if c <= 0.0:
        return _WORTHLESS
    p = acceptance_probability(coeffs, x, c)
    return OfferValue(c, p, expected_savings(p, outsource_total, c))
