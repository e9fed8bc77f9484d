"""Closed-form predictors and bound evaluators for proportional-update descent.

Covers the 1-D fixed-rate dynamics of the quadratic f(w) = (w-a)^2/2
(absorbing interval, hitting time, oscillation cap, origin trap), the
geometry of the set where a proportional step increases the distance to the
optimum, alignment-cosine lower bounds, and the objective-gap bounds for
fixed and decaying rate schedules.  Everything here is a pure function of its
inputs; simulations live in `certify` and the tests.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import ConfigurationError, NumericsError, TrajectoryRecord, norm
from .objectives import Objective

# ---------------------------------------------------------------------------
# machine-checkable certificates


class Comparator(str, Enum):
    LE = "le"
    GE = "ge"
    IN_INTERVAL = "in_interval"
    EQ_WITHIN = "eq_within"


def _relation_holds(observed: float, bound: float, comparator: Comparator,
                    tolerance: float) -> bool:
    if comparator is Comparator.IN_INTERVAL:
        # bound is the interval center, tolerance the absolute half-width
        return abs(observed - bound) <= tolerance
    slack = tolerance * (abs(bound) if bound != 0.0 else 1.0)
    if comparator is Comparator.LE:
        return observed <= bound + slack
    if comparator is Comparator.GE:
        return observed >= bound - slack
    return abs(observed - bound) <= slack


@dataclass(frozen=True)
class Certificate:
    """One machine-checkable inequality evaluated on concrete numbers.

    `tolerance` is relative to |bound_value| for LE/GE/EQ_WITHIN (absolute
    when bound_value is 0) and is the absolute interval half-width for
    IN_INTERVAL, where bound_value is the interval center.  `passed` is
    always recomputable from the stored fields.
    """

    name: str
    inputs: dict[str, float]
    bound_value: float
    observed_value: float
    comparator: Comparator
    tolerance: float
    passed: bool

    @classmethod
    def evaluate(cls, name, inputs, bound_value, observed_value, comparator,
                 tolerance=0.0) -> "Certificate":
        passed = _relation_holds(float(observed_value), float(bound_value),
                                 comparator, float(tolerance))
        return cls(name, {k: float(v) for k, v in inputs.items()},
                   float(bound_value), float(observed_value), comparator,
                   float(tolerance), passed)

    def recheck(self) -> bool:
        """Recompute the pass flag from the stored fields."""
        return _relation_holds(self.observed_value, self.bound_value,
                               self.comparator, self.tolerance)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "inputs": self.inputs,
            "bound_value": self.bound_value,
            "observed_value": self.observed_value,
            "comparator": self.comparator.value,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


# ---------------------------------------------------------------------------
# 1-D fixed-rate dynamics of f(w) = (w - a)^2 / 2


def absorbing_interval(a: float, eta: float) -> tuple[float, float]:
    """[a(1-eta), a(1+eta)]: once entered, the iterates never leave."""
    _require(a > 0, f"a must be positive, got {a}")
    _require(0 < eta < 1, f"eta must be in (0, 1), got {eta}")
    return (a * (1.0 - eta), a * (1.0 + eta))


def hitting_time(a: float, w0: float, eta: float) -> int:
    """First step count guaranteed to put a same-sign iterate inside the
    absorbing interval.

    Below the interval the iterate grows by (1+eta) per step, above it decays
    by (1-eta); solving (1+eta)^k w0 >= a(1-eta) resp. (1-eta)^k w0 <= a(1+eta)
    gives the step counts.  Returns 0 when w0 already lies inside.
    """
    _require(a > 0 and w0 > 0, f"a and w0 must be positive, got a={a}, w0={w0}")
    _require(0 < eta < 1, f"eta must be in (0, 1), got {eta}")
    lo, hi = absorbing_interval(a, eta)
    if lo <= w0 <= hi:
        return 0
    if w0 < lo:
        return math.ceil(math.log(lo / w0) / math.log1p(eta))
    return math.ceil(math.log(hi / w0) / math.log1p(-eta))


def max_rate_for_tolerance(a: float, eps_target: float) -> float:
    """Largest fixed rate whose limiting oscillation |w - a| <= eta*a stays
    within eps_target: eta < eps_target / a."""
    _require(a > 0 and eps_target > 0,
             f"a and eps_target must be positive, got a={a}, eps={eps_target}")
    return eps_target / a


def origin_trap_iterate(w0: float, eta: float, k: int) -> float:
    """Exact iterate (1-eta)^k * w0 when the start and the optimum have
    opposite signs: every step is a pure contraction toward 0, the sign
    never flips, and the origin is the attractive fixed point."""
    _require(w0 < 0, f"w0 must be negative (optimum positive implied), got {w0}")
    _require(0 < eta < 1, f"eta must be in (0, 1), got {eta}")
    _require(k >= 0, f"k must be nonnegative, got {k}")
    return (1.0 - eta) ** k * w0


# ---------------------------------------------------------------------------
# distance-expansion set and gradient alignment


def step_increases_distance(w, obj: Objective, eta: float) -> bool:
    """Whether a proportional step of rate eta from w lands strictly farther
    from the optimum than w is.  The set of such points is bounded for
    strongly convex objectives when eta is small enough."""
    info = _require_opt(obj)
    w = np.asarray(w, dtype=np.float64)
    g = np.asarray(obj.gradient(w))
    gnorm = norm(g, "l2")
    dist = norm(w - info.w_star, "l2")
    if gnorm == 0.0 or dist == 0.0:
        raise NumericsError(
            "membership is undefined at the optimum / at zero gradient"
        )
    w_next = w - eta * (norm(w, "l2") / gnorm) * g
    return norm(w_next - info.w_star, "l2") > dist


def alignment_cosine(w, obj: Objective) -> float:
    """Cosine of the angle between w - w_star and the gradient at w."""
    info = _require_opt(obj)
    w = np.asarray(w, dtype=np.float64)
    g = np.asarray(obj.gradient(w))
    d = w - info.w_star
    dn = norm(d, "l2")
    gn = norm(g, "l2")
    if dn == 0.0 or gn == 0.0:
        raise NumericsError("alignment cosine undefined at the optimum / zero gradient")
    return float(d @ g) / (dn * gn)


def safe_rate_threshold(m: float, L: float) -> float:
    """m / L: fixed rates at or below this keep the distance-expansion set
    bounded (the alignment cosine is at least m/L for strongly convex
    objectives with L-Lipschitz gradients)."""
    if m <= 0:
        raise ConfigurationError(
            "strong convexity (m > 0) is required; for merely convex objectives "
            "the alignment floor is only probed empirically"
        )
    _require(L > 0 and m <= L, f"need 0 < m <= L, got m={m}, L={L}")
    return m / L


@dataclass(frozen=True)
class AlignmentProbe:
    """Empirical minimum of the alignment cosine over sampled points.
    Evidence only, never a proof."""

    min_cosine: float
    argmin_w: np.ndarray
    n_samples: int


def alignment_floor_probe(obj: Objective, n_samples: int, radius: float,
                          seed: int) -> AlignmentProbe:
    """Sample points uniformly in a ball around the optimum and return the
    smallest alignment cosine seen (and where).  Points with degenerate
    denominators (the optimum itself, zero gradient) are skipped."""
    info = _require_opt(obj)
    _require(n_samples > 0 and radius > 0,
             f"n_samples and radius must be positive, got {n_samples}, {radius}")
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(7,)))
    dim = obj.dim
    best_cos = math.inf
    best_w = None
    remaining = int(n_samples)
    while remaining > 0:  # chunked so memory stays flat for large counts
        m = min(remaining, 200_000)
        remaining -= m
        directions = rng.normal(size=(m, dim))
        lengths = np.linalg.norm(directions, axis=1, keepdims=True)
        radii = radius * rng.uniform(0.0, 1.0, size=(m, 1)) ** (1.0 / dim)
        W = info.w_star[None, :] + directions / lengths * radii
        D = W - info.w_star[None, :]
        grads = obj.gradients_at(W)
        num = np.einsum("ij,ij->i", D, grads)
        den = np.linalg.norm(D, axis=1) * np.linalg.norm(grads, axis=1)
        ok = den > 0
        cosines = num[ok] / den[ok]
        if cosines.size:
            i = int(np.argmin(cosines))
            if cosines[i] < best_cos:
                best_cos = float(cosines[i])
                best_w = W[ok][i].copy()
    if best_w is None:
        raise NumericsError("all sampled points had degenerate gradients")
    return AlignmentProbe(best_cos, best_w, int(n_samples))


# ---------------------------------------------------------------------------
# objective-gap bounds


@dataclass(frozen=True)
class RunBounds:
    """Constants a gap bound needs, measured from a realized trajectory.

    dist_bound:   upper bound on ||w_k - w_star|| over the run
    norm_floor:   lower bound on ||w_k|| over the run
    grad_lipschitz / strong_convexity: the objective's L and m
    opt_norm:     ||w_star||
    init_dist:    ||w_0 - w_star||
    """

    dist_bound: float
    norm_floor: float
    grad_lipschitz: float
    opt_norm: float
    init_dist: float
    strong_convexity: float | None = None

    def __post_init__(self):
        _require(self.dist_bound > 0, "dist_bound must be positive")
        _require(self.norm_floor > 0, "norm_floor must be positive")
        _require(self.grad_lipschitz > 0, "grad_lipschitz must be positive")

    @property
    def iterate_norm_bound(self) -> float:
        """||w_star|| + dist_bound, exactly."""
        return self.opt_norm + self.dist_bound


def measure_run_bounds(records: list[TrajectoryRecord], obj: Objective) -> RunBounds:
    """Tightest checkable constants from a realized run: the distance bound
    is the supremum of recorded distances, the norm floor their minimum."""
    info = _require_opt(obj)
    if info.L is None:
        raise ConfigurationError("objective metadata must include L")
    dists = [r.dist_to_opt for r in records]
    if any(d is None for d in dists):
        raise ConfigurationError("records carry no distance to the optimum")
    return RunBounds(
        dist_bound=max(dists),
        norm_floor=min(r.w_norm_l2 for r in records),
        grad_lipschitz=info.L,
        opt_norm=norm(info.w_star, "l2"),
        init_dist=dists[0],
        strong_convexity=info.m,
    )


def fixed_rate_constants(c: RunBounds) -> tuple[float, float]:
    """(C1, C2) of the fixed-rate gap bound:

    C1 = L * dist_bound / (2 * norm_floor) * init_dist^2
    C2 = L * (opt_norm + dist_bound)^2 / 2
    """
    c1 = c.grad_lipschitz * c.dist_bound / (2.0 * c.norm_floor) * c.init_dist**2
    c2 = c.grad_lipschitz * c.iterate_norm_bound**2 / 2.0
    return c1, c2


def fixed_rate_gap_bound(k: int, eta: float, c: RunBounds) -> float:
    """Bound on the running-minimum objective gap after k fixed-rate steps:
    C1/(k*eta) + eta^2*C2.  The first term vanishes in k; the residual
    eta^2*C2 is the floor set by the oscillation region."""
    _require(k >= 1, f"k must be >= 1, got {k}")
    _require(eta > 0, f"eta must be positive, got {eta}")
    c1, c2 = fixed_rate_constants(c)
    return c1 / (k * eta) + eta**2 * c2


@dataclass(frozen=True)
class RateChoice:
    """A fixed rate tuned for a target accuracy, with its step-count bound."""

    eta: float
    k_bound: float | None
    admissible: bool | None  # None when no rate cap was supplied


def rate_for_accuracy(eps: float, c2: float, c1: float | None = None,
                      rate_cap: float | None = None) -> RateChoice:
    """eta = sqrt(eps / (3*C2)) balances the two bound terms; with C1 given,
    the gap drops below eps within 3*sqrt(3*C2)*C1 / (2*eps^1.5) steps.

    The returned eta always satisfies eta^2*C2 = eps/3 < eps.  When a cap
    (e.g. m/L) is supplied and exceeded, a warning is emitted.
    """
    _require(eps > 0 and c2 > 0, f"eps and C2 must be positive, got {eps}, {c2}")
    eta = math.sqrt(eps / (3.0 * c2))
    k_bound = None
    if c1 is not None:
        k_bound = 3.0 * math.sqrt(3.0 * c2) * c1 / (2.0 * eps**1.5)
    admissible = None
    if rate_cap is not None:
        admissible = eta <= rate_cap
        if not admissible:
            warnings.warn(
                f"accuracy-optimal rate {eta:.6g} exceeds the admissible cap "
                f"{rate_cap:.6g}; the gap bound does not apply at this rate",
                stacklevel=2,
            )
    return RateChoice(eta, k_bound, admissible)


def decay_gap_bound(etas, c: RunBounds) -> float:
    """Bound on the running-minimum objective gap under a decaying schedule:

        (dist_bound^2 + iterate_norm_bound^2 * sum(eta_i^2))
        / (2 * (norm_floor / (dist_bound * L)) * sum(eta_i))

    The numerator stays finite and the denominator diverges for any schedule
    whose rate sum diverges while the squared sum converges, which forces the
    gap to zero.
    """
    etas = np.asarray(etas, dtype=np.float64)
    _require(etas.size > 0, "need at least one rate")
    _require(bool(np.all(etas > 0)), "all rates must be positive")
    num = c.dist_bound**2 + c.iterate_norm_bound**2 * float(np.sum(etas**2))
    den = 2.0 * (c.norm_floor / (c.dist_bound * c.grad_lipschitz)) * float(np.sum(etas))
    return num / den


# ---------------------------------------------------------------------------


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigurationError(message)


def _require_opt(obj: Objective):
    if obj.info is None or obj.info.w_star is None:
        raise ConfigurationError("objective metadata with w_star is required")
    return obj.info
