"""Shared numeric types: parameter vectors, named blocks, norms, trajectory records.

All arithmetic is 64-bit floating point.  Any NaN/Inf aborts the surrounding
run instead of propagating silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NORM_KINDS = ("l1", "l2")


class ConfigurationError(ValueError):
    """Invalid configuration: bad blocks, bad schedule parameters, non-SPD matrix, ..."""


class DataError(ValueError):
    """Invalid dataset contents (labels out of range, shape mismatch, ...)."""


class NumericsError(ArithmeticError):
    """Non-finite value encountered, or a division-by-zero guard tripped."""


def as_param_vector(values, name: str = "vector") -> np.ndarray:
    """Coerce to a 1-D float64 array and reject non-finite entries."""
    w = np.asarray(values, dtype=np.float64)
    if w.ndim == 0:
        w = w.reshape(1)
    if w.ndim != 1:
        raise ConfigurationError(f"{name} must be 1-D, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise NumericsError(f"{name} contains NaN/Inf")
    return w


def ensure_finite(value, context: str):
    """Return `value` unchanged, raising NumericsError if any entry is NaN/Inf."""
    arr = np.asarray(value)
    if not np.all(np.isfinite(arr)):
        raise NumericsError(f"non-finite value in {context}")
    return value


def l1_norm(v) -> float:
    return float(np.abs(v).sum()) if len(v) else 0.0


def l2_norm(v) -> float:
    return math.sqrt(float(v @ v)) if len(v) else 0.0


def norm(v: np.ndarray, p: str) -> float:
    """L1 or L2 norm of a vector; the empty vector has norm 0."""
    if p not in NORM_KINDS:
        raise ConfigurationError(f"unknown norm kind {p!r}, expected one of {NORM_KINDS}")
    v = np.asarray(v, dtype=np.float64)
    return l1_norm(v) if p == "l1" else l2_norm(v)


@dataclass(frozen=True)
class ParamBlock:
    """A named contiguous slice [start, stop) of the parameter vector.

    Each block receives its own trust-ratio scaling in the proportional-update
    optimizers.
    """

    name: str
    start: int
    stop: int

    def __post_init__(self):
        if not (0 <= self.start < self.stop):
            raise ConfigurationError(
                f"block {self.name!r}: need 0 <= start < stop, got [{self.start}, {self.stop})"
            )

    @property
    def size(self) -> int:
        return self.stop - self.start


def single_block(dim: int, name: str = "all") -> list[ParamBlock]:
    """One block covering the whole vector."""
    return [ParamBlock(name, 0, dim)]


def validate_blocks(blocks: list[ParamBlock], dim: int) -> None:
    """Blocks must partition [0, dim) without gaps or overlaps."""
    if not blocks:
        raise ConfigurationError("at least one block is required")
    ordered = sorted(blocks, key=lambda b: b.start)
    cursor = 0
    for b in ordered:
        if b.start != cursor:
            kind = "overlap" if b.start < cursor else "gap"
            raise ConfigurationError(
                f"blocks do not partition [0, {dim}): {kind} at index {min(b.start, cursor)}"
            )
        cursor = b.stop
    if cursor != dim:
        raise ConfigurationError(
            f"blocks cover [0, {cursor}) but the vector has dimension {dim}"
        )


def block_view(w: np.ndarray, blocks: list[ParamBlock]) -> list[np.ndarray]:
    """Non-copying views of `w`, one per block, in the given block order.

    The concatenation of the views (in start order) reproduces `w`.
    """
    validate_blocks(blocks, w.shape[0])
    return [w[b.start : b.stop] for b in blocks]


@dataclass(frozen=True)
class TrajectoryRecord:
    """Per-step log: objective, norms, distance to optimum, and step geometry.

    `f_value` and the norms are evaluated at the pre-update iterate w_k;
    `step_norm_l2` is the L2 norm of the transition w_{k+1} - w_k.
    `dist_to_opt` is None when the optimum is unknown.
    """

    step: int
    f_value: float
    grad_norm_l2: float
    w_norm_l2: float
    dist_to_opt: float | None
    lr: float
    step_norm_l2: float
    fallback_active: tuple[bool, ...]

    @property
    def fallback_any(self) -> bool:
        return any(self.fallback_active)
