"""Learning-rate schedules and their step-size-series classification."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .core import ConfigurationError


class ScheduleKind(str, Enum):
    FIXED = "fixed"
    INVERSE_K = "inverse_k"
    LINEAR_TO_ZERO = "linear_to_zero"


class SeriesClass(str, Enum):
    """Classification against the diminishing-step-size conditions
    (sum of rates diverges, sum of squared rates converges)."""

    SATISFIES = "satisfies"
    VIOLATES_SUM_INF = "violates_sum_inf"
    VIOLATES_SUM_SQ = "violates_sum_sq"
    NOT_APPLICABLE = "not_applicable"


# LINEAR_TO_ZERO never returns a rate below eta0 * RATE_FLOOR_FRACTION, so the
# schedule contract (strictly positive rates) holds at the final step.
RATE_FLOOR_FRACTION = 1e-6


@dataclass(frozen=True)
class Schedule:
    """A learning-rate sequence rate(k) > 0.

    fixed:          rate(k) = eta0
    inverse_k:      rate(k) = eta0 / (k + offset)
    linear_to_zero: rate(k) = max(eta0 * (1 - k/horizon), eta0 * 1e-6), k < horizon
    """

    kind: ScheduleKind
    eta0: float
    horizon: int | None = None
    offset: int = 1

    def __post_init__(self):
        if not self.eta0 > 0:
            raise ConfigurationError(f"eta0 must be positive, got {self.eta0}")
        if self.kind is ScheduleKind.LINEAR_TO_ZERO:
            if self.horizon is None or self.horizon < 1:
                raise ConfigurationError("linear_to_zero requires a positive horizon")
        if self.kind is ScheduleKind.INVERSE_K and self.offset < 1:
            raise ConfigurationError(f"offset must be >= 1, got {self.offset}")

    @classmethod
    def fixed(cls, eta0: float) -> "Schedule":
        return cls(ScheduleKind.FIXED, eta0)

    @classmethod
    def inverse_k(cls, eta0: float, offset: int = 1) -> "Schedule":
        return cls(ScheduleKind.INVERSE_K, eta0, offset=offset)

    @classmethod
    def linear_to_zero(cls, eta0: float, horizon: int) -> "Schedule":
        return cls(ScheduleKind.LINEAR_TO_ZERO, eta0, horizon=horizon)

    def rate(self, k: int) -> float:
        if k < 0:
            raise ConfigurationError(f"step index must be nonnegative, got {k}")
        if self.kind is ScheduleKind.FIXED:
            return self.eta0
        if self.kind is ScheduleKind.INVERSE_K:
            return self.eta0 / (k + self.offset)
        if k >= self.horizon:
            raise ConfigurationError(
                f"step {k} is past the schedule horizon {self.horizon}"
            )
        return max(self.eta0 * (1.0 - k / self.horizon), self.eta0 * RATE_FLOOR_FRACTION)


def robbins_monro_class(s: Schedule) -> SeriesClass:
    """Classify a schedule family symbolically (numeric series tests cannot
    decide convergence; the family determines it exactly).

    inverse_k rates are a harmonic tail: the rate sum diverges while the
    squared sum converges.  A constant rate has a divergent squared sum.
    A finite-horizon schedule is not an infinite sequence at all.
    """
    if s.kind is ScheduleKind.INVERSE_K:
        return SeriesClass.SATISFIES
    if s.kind is ScheduleKind.FIXED:
        return SeriesClass.VIOLATES_SUM_SQ
    return SeriesClass.NOT_APPLICABLE
