"""Proportional-update optimizers (LARS, PercentDelta) with per-block trust
ratios, plus GD / momentum / Adam baselines under one stepping interface.

A proportional update scales the gradient so the step length is a fixed
fraction of the current block norm:

    w_b <- w_b - lr * (||w_b|| / (||g_b|| + eps)) * g_b

with L2 norms for LARS and L1 norms for PercentDelta, applied independently
per block.  When a block norm falls below the fallback threshold beta the
block takes a plain SGD step instead, which avoids the attractive fixed point
at the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .core import (
    ConfigurationError,
    NumericsError,
    ParamBlock,
    TrajectoryRecord,
    as_param_vector,
    ensure_finite,
    l1_norm,
    l2_norm,
    single_block,
    validate_blocks,
)
from .objectives import Objective
from .schedules import Schedule


class Method(str, Enum):
    LARS = "lars"
    PERCENT_DELTA = "percent_delta"
    GD = "gd"
    MOMENTUM = "momentum"
    ADAM = "adam"


PROPORTIONAL_METHODS = (Method.LARS, Method.PERCENT_DELTA)


@dataclass(frozen=True)
class OptimizerConfig:
    """Method choice plus stabilizers.

    momentum_coeff=None resolves per method: 0.9 for MOMENTUM/ADAM, 0.0 for
    the proportional methods (momentum-LARS is available but off by default).
    eps_stabilizer sits in the trust-ratio denominator; fallback_threshold is
    the block-norm level below which a plain SGD step is taken.
    """

    method: Method
    momentum_coeff: float | None = None
    eps_stabilizer: float = 1e-8
    fallback_threshold: float = 0.01
    adam_beta2: float = 0.999

    def __post_init__(self):
        if self.eps_stabilizer < 0:
            raise ConfigurationError("eps_stabilizer must be >= 0")
        if self.fallback_threshold < 0:
            raise ConfigurationError("fallback_threshold must be >= 0")
        mu = self.momentum_coeff
        if mu is not None and not (0.0 <= mu < 1.0):
            raise ConfigurationError(f"momentum_coeff must be in [0, 1), got {mu}")
        if not (0.0 <= self.adam_beta2 < 1.0):
            raise ConfigurationError(f"adam_beta2 must be in [0, 1), got {self.adam_beta2}")

    @property
    def effective_momentum(self) -> float:
        if self.momentum_coeff is not None:
            return self.momentum_coeff
        return 0.9 if self.method in (Method.MOMENTUM, Method.ADAM) else 0.0


@dataclass
class OptimizerState:
    """Mutable per-run buffers; confined to a single run.

    Buffers are full-length arrays; per-block views of them act as the
    per-block momentum / second-moment buffers.
    """

    step_count: int = 0
    velocity: np.ndarray | None = None
    second_moment: np.ndarray | None = None

    def _velocity(self, dim: int) -> np.ndarray:
        if self.velocity is None:
            self.velocity = np.zeros(dim)
        return self.velocity

    def _second_moment(self, dim: int) -> np.ndarray:
        if self.second_moment is None:
            self.second_moment = np.zeros(dim)
        return self.second_moment


@dataclass(frozen=True)
class BlockStep:
    trust_ratio: float
    fallback_used: bool
    step_norm_l2: float


@dataclass(frozen=True)
class StepReport:
    """What each block did in one step: trust ratio, fallback flag, step norm."""

    blocks: tuple[BlockStep, ...]
    lr_used: float

    @property
    def fallback_flags(self) -> tuple[bool, ...]:
        return tuple(b.fallback_used for b in self.blocks)


def _scaled_direction(w, g, blocks, cfg, block_norm):
    eps = cfg.eps_stabilizer
    beta = cfg.fallback_threshold
    direction = np.empty_like(w)
    infos = []
    for b in blocks:
        wb = w[b.start : b.stop]
        gb = g[b.start : b.stop]
        if l2_norm(wb) < beta:
            # near the origin the proportional step would trap the iterate:
            # take a plain gradient step for this block
            direction[b.start : b.stop] = gb
            infos.append((1.0, True))
            continue
        gnorm = block_norm(gb)
        if gnorm == 0.0 and eps == 0.0:
            raise NumericsError(
                f"block {b.name!r}: zero gradient with eps_stabilizer=0 makes the "
                "trust ratio undefined; set eps_stabilizer > 0"
            )
        ratio = block_norm(wb) / (gnorm + eps)
        direction[b.start : b.stop] = ratio * gb
        infos.append((ratio, False))
    return direction, infos


def proportional_direction(w, g, blocks, cfg: OptimizerConfig) -> np.ndarray:
    """The trust-ratio-scaled gradient (with per-block SGD fallback applied):
    the update direction before momentum and the learning rate.  This vector
    is what makes the step independent of the gradient magnitude."""
    if cfg.method not in PROPORTIONAL_METHODS:
        raise ConfigurationError(f"{cfg.method} is not a proportional-update method")
    block_norm = l2_norm if cfg.method is Method.LARS else l1_norm
    direction, _ = _scaled_direction(w, g, blocks, cfg, block_norm)
    return direction


def _proportional_step(w, g, blocks, lr, cfg, state, block_norm):
    direction, infos = _scaled_direction(w, g, blocks, cfg, block_norm)
    mu = cfg.effective_momentum
    if mu > 0.0:
        v = state._velocity(w.shape[0])
        v *= mu
        v += direction
        direction = v
    w_next = w - lr * direction
    block_steps = tuple(
        BlockStep(ratio, fb, lr * l2_norm(direction[b.start : b.stop]))
        for (ratio, fb), b in zip(infos, blocks)
    )
    return w_next, StepReport(block_steps, lr)


def _baseline_report(w_next, w, blocks, lr):
    steps = tuple(
        BlockStep(1.0, False, l2_norm(w_next[b.start : b.stop] - w[b.start : b.stop]))
        for b in blocks
    )
    return StepReport(steps, lr)


def lars_step(w, g, blocks, lr, cfg, state):
    """One proportional-update step with L2 trust ratios (per block)."""
    return _proportional_step(w, g, blocks, lr, cfg, state, l2_norm)


def percent_delta_step(w, g, blocks, lr, cfg, state):
    """One proportional-update step with L1 trust ratios (per block)."""
    return _proportional_step(w, g, blocks, lr, cfg, state, l1_norm)


def gd_step(w, g, blocks, lr, cfg, state):
    w_next = w - lr * g
    return w_next, _baseline_report(w_next, w, blocks, lr)


def momentum_step(w, g, blocks, lr, cfg, state):
    """Classical heavy ball: v <- mu*v + g, w <- w - lr*v."""
    v = state._velocity(w.shape[0])
    v *= cfg.effective_momentum
    v += g
    w_next = w - lr * v
    return w_next, _baseline_report(w_next, w, blocks, lr)


def adam_step(w, g, blocks, lr, cfg, state):
    """Adam with bias correction; eps_stabilizer doubles as the Adam epsilon."""
    beta1 = cfg.effective_momentum
    beta2 = cfg.adam_beta2
    m = state._velocity(w.shape[0])
    v = state._second_moment(w.shape[0])
    m *= beta1
    m += (1.0 - beta1) * g
    v *= beta2
    v += (1.0 - beta2) * g * g
    t = state.step_count + 1
    m_hat = m / (1.0 - beta1**t)
    v_hat = v / (1.0 - beta2**t)
    w_next = w - lr * m_hat / (np.sqrt(v_hat) + cfg.eps_stabilizer)
    return w_next, _baseline_report(w_next, w, blocks, lr)


_STEP_FUNCTIONS = {
    Method.LARS: lars_step,
    Method.PERCENT_DELTA: percent_delta_step,
    Method.GD: gd_step,
    Method.MOMENTUM: momentum_step,
    Method.ADAM: adam_step,
}


def apply_step(
    w: np.ndarray,
    g: np.ndarray,
    blocks: list[ParamBlock],
    lr: float,
    cfg: OptimizerConfig,
    state: OptimizerState,
) -> tuple[np.ndarray, StepReport]:
    """Dispatch one step of cfg.method and advance the step counter."""
    if w.shape != g.shape:
        raise ConfigurationError(
            f"gradient shape {g.shape} does not match parameter shape {w.shape}"
        )
    if not lr > 0:
        raise ConfigurationError(f"learning rate must be positive, got {lr}")
    w_next, report = _STEP_FUNCTIONS[cfg.method](w, g, blocks, lr, cfg, state)
    state.step_count += 1
    return w_next, report


@dataclass(frozen=True)
class StoppingRule:
    """Optional early stop on the objective gap f - f_star (needs f_star)."""

    f_gap_tol: float | None = None

    def fires(self, f_value: float, f_star: float | None) -> bool:
        return (
            self.f_gap_tol is not None
            and f_star is not None
            and f_value - f_star < self.f_gap_tol
        )


def run(
    obj: Objective,
    w0,
    cfg: OptimizerConfig,
    schedule: Schedule,
    max_steps: int,
    stop: StoppingRule | None = None,
    blocks: list[ParamBlock] | None = None,
    grad_fn: Callable[[int, np.ndarray], np.ndarray] | None = None,
) -> list[TrajectoryRecord]:
    """Drive the optimizer and log one record per step (at most max_steps).

    Each record holds f, norms and distance at the pre-update iterate w_k and
    the norm of the transition to w_{k+1}.  `grad_fn(k, w)` overrides the
    gradient source (mini-batching); f is always the full objective.  Any
    NaN/Inf aborts with the step index.
    """
    if max_steps < 1:
        raise ConfigurationError(f"max_steps must be >= 1, got {max_steps}")
    w = as_param_vector(w0, "w0").copy()
    if w.shape[0] != obj.dim:
        raise ConfigurationError(f"w0 has dimension {w.shape[0]}, objective wants {obj.dim}")
    if blocks is None:
        blocks = list(obj.default_blocks) if obj.default_blocks else single_block(obj.dim)
    validate_blocks(blocks, obj.dim)
    info = obj.info
    w_star = info.w_star if info is not None else None
    f_star = info.f_star if info is not None else None
    state = OptimizerState()
    step_fn = _STEP_FUNCTIONS[cfg.method]
    records: list[TrajectoryRecord] = []
    for k in range(max_steps):
        f = float(obj.value(w))
        g = grad_fn(k, w) if grad_fn is not None else obj.gradient(w)
        if not (math.isfinite(f) and np.isfinite(g).all()):
            raise NumericsError(f"non-finite objective or gradient at step {k}")
        lr = schedule.rate(k)
        grad_norm = l2_norm(g)
        w_norm = l2_norm(w)
        dist = None if w_star is None else l2_norm(w - w_star)
        if stop is not None and stop.fires(f, f_star):
            records.append(
                TrajectoryRecord(k, f, grad_norm, w_norm, dist, lr, 0.0,
                                 (False,) * len(blocks))
            )
            break
        w_next, report = step_fn(w, g, blocks, lr, cfg, state)
        state.step_count += 1
        if not np.isfinite(w_next).all():
            raise NumericsError(f"non-finite iterate after step {k}")
        records.append(
            TrajectoryRecord(
                step=k,
                f_value=f,
                grad_norm_l2=grad_norm,
                w_norm_l2=w_norm,
                dist_to_opt=dist,
                lr=lr,
                step_norm_l2=l2_norm(w_next - w),
                fallback_active=report.fallback_flags,
            )
        )
        w = w_next
    return records


def iterate_values(
    obj: Objective,
    w0,
    cfg: OptimizerConfig,
    schedule: Schedule,
    max_steps: int,
    blocks: list[ParamBlock] | None = None,
) -> np.ndarray:
    """The raw iterate sequence w_0 .. w_{max_steps} as a (max_steps+1, dim)
    array; lighter than run() when only the path matters."""
    w = as_param_vector(w0, "w0").copy()
    if blocks is None:
        blocks = list(obj.default_blocks) if obj.default_blocks else single_block(obj.dim)
    validate_blocks(blocks, obj.dim)
    state = OptimizerState()
    step_fn = _STEP_FUNCTIONS[cfg.method]
    out = np.empty((max_steps + 1, w.shape[0]))
    out[0] = w
    for k in range(max_steps):
        g = obj.gradient(w)
        w, _ = step_fn(w, g, blocks, schedule.rate(k), cfg, state)
        state.step_count += 1
        out[k + 1] = w
    ensure_finite(out, "iterate sequence")
    return out
