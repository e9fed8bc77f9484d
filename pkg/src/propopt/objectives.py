"""Convex objective oracles with analytic gradients and exact convexity metadata.

Each factory returns an `Objective`: a stateless value/gradient pair over a
flat float64 parameter vector, with optional metadata (strong-convexity
constant `m`, Lipschitz-gradient constant `L`, optimum `w_star`, `f_star`)
when those are known exactly.  Dataset-backed objectives additionally expose
batch oracles over sample index subsets; the mini-batch cursor itself lives
in the harness.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import (
    ConfigurationError,
    DataError,
    NumericsError,
    ParamBlock,
    as_param_vector,
)

# ---------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class ConvexityInfo:
    """Exact convexity metadata; any field may be unknown (None)."""

    m: float | None = None
    L: float | None = None
    w_star: np.ndarray | None = None
    f_star: float | None = None


@dataclass(frozen=True)
class Objective:
    """Value + gradient oracle over a flat parameter vector.

    `batch_value`/`batch_gradient` take (w, indices) and are present only for
    dataset-backed objectives.  `gradient_many` evaluates the gradient at many
    points at once, rows of an (n, dim) array; it exists where vectorization
    is cheap and is only a performance hook.  `default_blocks` suggests a
    per-block split (e.g. one block per output row of the multiclass model).
    """

    dim: int
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    info: ConvexityInfo | None = None
    batch_value: Callable[[np.ndarray, np.ndarray], float] | None = None
    batch_gradient: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    gradient_many: Callable[[np.ndarray], np.ndarray] | None = None
    default_blocks: tuple[ParamBlock, ...] | None = None
    n_samples: int | None = None

    def gradients_at(self, points: np.ndarray) -> np.ndarray:
        """Gradients at each row of `points`, vectorized when possible."""
        if self.gradient_many is not None:
            return self.gradient_many(points)
        return np.array([self.gradient(p) for p in points])


@dataclass(frozen=True)
class Dataset:
    """Feature matrix plus integer labels (+-1 margins or class indices)."""

    features: np.ndarray
    labels: np.ndarray
    batch_size: int | None = None  # None means full batch

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels)
        if X.ndim != 2:
            raise DataError(f"features must be 2-D, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise DataError(
                f"labels count {y.shape} does not match n_samples {X.shape[0]}"
            )
        if not np.all(np.isfinite(X)):
            raise DataError("features contain NaN/Inf")
        if self.batch_size is not None and not (1 <= self.batch_size <= X.shape[0]):
            raise DataError(
                f"batch_size {self.batch_size} out of range for {X.shape[0]} samples"
            )
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


def _check_optimum(obj: Objective) -> None:
    # Metadata sanity: gradient vanishes at the claimed optimum, m <= L.
    info = obj.info
    if info is None or info.w_star is None:
        return
    g = np.asarray(obj.gradient(info.w_star))
    scale = 1.0 + float(np.linalg.norm(info.w_star))
    if float(np.linalg.norm(g)) > 1e-9 * scale:
        raise ConfigurationError("metadata w_star is not a stationary point")
    if info.m is not None and info.L is not None and info.m > info.L * (1 + 1e-12):
        raise ConfigurationError(f"metadata requires m <= L, got m={info.m}, L={info.L}")


# ---------------------------------------------------------------------------
# analytic objectives


def quadratic_1d(a: float) -> Objective:
    """f(w) = (w - a)^2 / 2 on the line; optimum at a with m = L = 1."""
    a = float(a)
    if not np.isfinite(a):
        raise ConfigurationError("a must be finite")

    def value(w):
        return 0.5 * float((w[0] - a) ** 2)

    def gradient(w):
        return np.array([w[0] - a], dtype=np.float64)

    obj = Objective(
        dim=1,
        value=value,
        gradient=gradient,
        info=ConvexityInfo(m=1.0, L=1.0, w_star=np.array([a]), f_star=0.0),
        gradient_many=lambda W: W - a,
    )
    _check_optimum(obj)
    return obj


def quadratic_nd(A, b) -> Objective:
    """f(w) = (w-b)^T A (w-b) / 2 for symmetric positive-definite A.

    m and L are the extreme eigenvalues of A; the optimum is b.
    """
    A = np.asarray(A, dtype=np.float64)
    b = as_param_vector(b, "b")
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ConfigurationError(f"A must be square, got shape {A.shape}")
    if A.shape[0] != b.shape[0]:
        raise ConfigurationError("A and b dimensions disagree")
    if not np.allclose(A, A.T, rtol=1e-12, atol=1e-12):
        raise ConfigurationError("A must be symmetric")
    try:
        np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise ConfigurationError("A must be positive definite") from exc
    eigs = np.linalg.eigvalsh(A)

    def value(w):
        d = w - b
        return 0.5 * float(d @ (A @ d))

    def gradient(w):
        return A @ (w - b)

    obj = Objective(
        dim=b.shape[0],
        value=value,
        gradient=gradient,
        info=ConvexityInfo(m=float(eigs[0]), L=float(eigs[-1]), w_star=b.copy(), f_star=0.0),
        gradient_many=lambda W: (W - b) @ A,  # A is symmetric
    )
    _check_optimum(obj)
    return obj


def convex_1d_power(a: float, p: int) -> Objective:
    """f(w) = (w - a)^p / p for even p >= 4: convex, flat optimum at a.

    Not strongly convex and with no global gradient Lipschitz constant, so
    the metadata carries only the optimum.
    """
    a = float(a)
    p = int(p)
    if p < 4 or p % 2 != 0:
        raise ConfigurationError(f"p must be an even integer >= 4, got {p}")

    def value(w):
        return float((w[0] - a) ** p) / p

    def gradient(w):
        return np.array([(w[0] - a) ** (p - 1)], dtype=np.float64)

    obj = Objective(
        dim=1,
        value=value,
        gradient=gradient,
        info=ConvexityInfo(w_star=np.array([a]), f_star=0.0),
        gradient_many=lambda W: (W - a) ** (p - 1),
    )
    _check_optimum(obj)
    return obj


# ---------------------------------------------------------------------------
# dataset-backed objectives


def svm_hinge(data: Dataset, reg: float = 0.0) -> Objective:
    """Mean hinge loss plus `reg * ||w||_2^2` for labels in {-1, +1}.

    The subgradient contribution of a sample is -y*x when its margin is
    strictly below 1 and zero otherwise (zero at the kink).  Any bias must
    already be folded into the features as a constant-1 column.
    """
    y = np.asarray(data.labels, dtype=np.float64)
    if not np.all(np.isin(y, (-1.0, 1.0))):
        bad = sorted(set(np.unique(data.labels)) - {-1, 1})
        raise DataError(f"svm labels must be in {{-1,+1}}, found {bad}")
    if reg < 0:
        raise ConfigurationError(f"reg must be nonnegative, got {reg}")
    X = data.features
    n = data.n_samples

    def _hinge(w, X_, y_):
        margins = y_ * (X_ @ w)
        return float(np.mean(np.maximum(0.0, 1.0 - margins)))

    def _hinge_grad(w, X_, y_):
        margins = y_ * (X_ @ w)
        active = margins < 1.0
        g = np.zeros_like(w)
        if np.any(active):
            g = -(X_[active].T @ y_[active]) / X_.shape[0]
        return g

    def value(w):
        return _hinge(w, X, y) + reg * float(w @ w)

    def gradient(w):
        return _hinge_grad(w, X, y) + 2.0 * reg * w

    def batch_value(w, idx):
        return _hinge(w, X[idx], y[idx]) + reg * float(w @ w)

    def batch_gradient(w, idx):
        return _hinge_grad(w, X[idx], y[idx]) + 2.0 * reg * w

    return Objective(
        dim=data.n_features,
        value=value,
        gradient=gradient,
        batch_value=batch_value,
        batch_gradient=batch_gradient,
        n_samples=n,
    )


def logistic_regression(
    data: Dataset, n_classes: int, block_per_class: bool = True
) -> Objective:
    """Mean softmax cross-entropy of a linear model over `n_classes` classes.

    The weight matrix (n_classes x n_features) is flattened row-major into one
    parameter vector; by default each output row is its own block.
    """
    n_classes = int(n_classes)
    if n_classes < 2:
        raise ConfigurationError(f"n_classes must be >= 2, got {n_classes}")
    y = np.asarray(data.labels)
    if y.dtype.kind not in "iu":
        y = y.astype(np.int64)
    if np.any(y < 0) or np.any(y >= n_classes):
        raise DataError(
            f"labels must lie in [0, {n_classes}), found range [{y.min()}, {y.max()}]"
        )
    X = data.features
    n, d = X.shape
    dim = n_classes * d

    def _softmax_terms(w, X_, y_):
        W = w.reshape(n_classes, d)
        logits = X_ @ W.T
        logits -= logits.max(axis=1, keepdims=True)
        expl = np.exp(logits)
        total = expl.sum(axis=1)
        probs = expl / total[:, None]
        rows = np.arange(X_.shape[0])
        losses = np.log(total) - logits[rows, y_]
        return probs, rows, losses

    def _ce(w, X_, y_):
        _, _, losses = _softmax_terms(w, X_, y_)
        return float(np.mean(losses))

    def _ce_grad(w, X_, y_):
        probs, rows, _ = _softmax_terms(w, X_, y_)
        probs[rows, y_] -= 1.0
        return (probs.T @ X_).ravel() / X_.shape[0]

    blocks = None
    if block_per_class:
        blocks = tuple(
            ParamBlock(f"class{c}", c * d, (c + 1) * d) for c in range(n_classes)
        )

    return Objective(
        dim=dim,
        value=lambda w: _ce(w, X, y),
        gradient=lambda w: _ce_grad(w, X, y),
        batch_value=lambda w, idx: _ce(w, X[idx], y[idx]),
        batch_gradient=lambda w, idx: _ce_grad(w, X[idx], y[idx]),
        default_blocks=blocks,
        n_samples=n,
    )


# ---------------------------------------------------------------------------
# synthetic datasets and ingestion


def _rng(seed: int, *spawn_key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=spawn_key))


def make_separable_dataset(
    n: int, dim: int, margin: float, seed: int, bias_column: bool = True
) -> Dataset:
    """Two deterministic clusters, linearly separable with at least `margin`.

    Points are y * (margin + t) * u + noise orthogonal to the unit direction
    u, so the separator through the origin with normal u attains geometric
    margin >= margin.  Labels are +-1, half each; a constant-1 bias column is
    appended unless disabled.  Same seed, same bytes.
    """
    if n < 2 or n % 2 != 0:
        raise ConfigurationError(f"n must be even and >= 2, got {n}")
    if margin <= 0:
        raise ConfigurationError(f"margin must be positive, got {margin}")
    rng = _rng(seed, 1)
    u = rng.normal(size=dim)
    u /= np.linalg.norm(u)
    y = np.repeat([1.0, -1.0], n // 2)
    along = margin + rng.uniform(0.0, 1.0, size=n)
    noise = rng.normal(scale=0.5, size=(n, dim))
    noise -= np.outer(noise @ u, u)  # keep noise off the separating direction
    X = y[:, None] * along[:, None] * u[None, :] + noise
    perm = rng.permutation(n)
    X, y = X[perm], y[perm]
    if bias_column:
        X = np.column_stack([X, np.ones(n)])
    return Dataset(features=X, labels=y.astype(np.int64))


def make_blobs_dataset(
    n: int,
    dim: int,
    n_classes: int,
    seed: int,
    center_scale: float = 3.0,
    spread: float = 1.0,
    bias_column: bool = True,
) -> Dataset:
    """Deterministic Gaussian blobs, one per class, labels in [0, n_classes).

    Centers are drawn once at `center_scale`; overlap is controlled by
    `spread` so the cross-entropy optimum stays interior.
    """
    if n_classes < 2:
        raise ConfigurationError(f"n_classes must be >= 2, got {n_classes}")
    if n < n_classes:
        raise ConfigurationError(f"need at least one sample per class, got n={n}")
    rng = _rng(seed, 2)
    centers = rng.normal(scale=center_scale, size=(n_classes, dim))
    y = np.arange(n) % n_classes
    X = centers[y] + rng.normal(scale=spread, size=(n, dim))
    perm = rng.permutation(n)
    X, y = X[perm], y[perm]
    if bias_column:
        X = np.column_stack([X, np.ones(n)])
    return Dataset(features=X, labels=y.astype(np.int64))


def load_csv_dataset(path) -> Dataset:
    """CSV with a header row, one sample per row, last column = integer label."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header.strip():
            raise DataError(f"{path}: empty file")
        try:
            body = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise DataError(f"{path}: could not parse numeric rows: {exc}") from exc
    if body.size == 0 or body.shape[1] < 2:
        raise DataError(f"{path}: need at least one feature column plus a label column")
    labels = body[:, -1]
    if not np.all(labels == np.round(labels)):
        raise DataError(f"{path}: labels (last column) must be integers")
    return Dataset(features=body[:, :-1], labels=labels.astype(np.int64))


# ---------------------------------------------------------------------------
# gradient checking


def numeric_gradient(f: Callable[[np.ndarray], float], w: np.ndarray,
                     rel_step: float = 1e-5) -> np.ndarray:
    """Central finite-difference gradient with per-coordinate step
    h_i = rel_step * (1 + |w_i|).  Independent of any analytic gradient."""
    w = np.asarray(w, dtype=np.float64)
    g = np.zeros_like(w)
    for i in range(w.shape[0]):
        h = rel_step * (1.0 + abs(w[i]))
        wp = w.copy()
        wm = w.copy()
        wp[i] += h
        wm[i] -= h
        g[i] = (f(wp) - f(wm)) / (2.0 * h)
    return g
