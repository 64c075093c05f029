"""Binary SVM training and prediction.

Two solvers share one model type: a primal stochastic subgradient solver for the linear
kernel and a two-variable SMO solver over the dual for every kernel. Labels are +1 / -1 and
inputs are standardized with a scaler fitted on the training samples only.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np

from app.core.config import settings
from app.core.errors import DimensionMismatchError, EmptyInputError, LabelError, SingleClassError
from app.schemas.svm_schemas import KernelSpec

logger = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, Sequence[float], Sequence[Sequence[float]]]

TAU = 1e-12


@dataclass(frozen=True)
class ScalerParams:
    mean: np.ndarray
    stddev: np.ndarray

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def transform(self, X: ArrayLike) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.dim:
            raise DimensionMismatchError(f"Expected {self.dim} features, got {X.shape[-1]}.")
        return (X - self.mean) / self.stddev


@dataclass
class SvmModel:
    """Trained model. Exactly one of `weights` (primal) or the support set (SMO) is populated."""
    kernel: KernelSpec
    scaler: ScalerParams
    bias: float
    c: float
    seed: int
    solver: str
    weights: Optional[np.ndarray] = None
    support_vectors: Optional[np.ndarray] = None
    support_labels: Optional[np.ndarray] = None
    support_alphas: Optional[np.ndarray] = None
    tol: Optional[float] = None
    max_passes: Optional[int] = None
    epochs: Optional[int] = None
    converged: bool = True
    objective_trace: List[float] = field(default_factory=list)

    @property
    def feature_dim(self) -> int:
        return self.scaler.dim

    @property
    def dual_coef(self) -> np.ndarray:
        return self.support_alphas * self.support_labels


def _as_matrix(samples: ArrayLike) -> np.ndarray:
    if isinstance(samples, np.ndarray):
        X = samples.astype(np.float64, copy=False)
    else:
        rows = [np.asarray(row, dtype=np.float64) for row in samples]
        if not rows:
            raise EmptyInputError("Cannot fit on an empty sample set.")
        dims = {row.shape for row in rows}
        if len(dims) != 1:
            raise DimensionMismatchError(f"Samples have inconsistent dimensions: {sorted(d[0] for d in dims)}.")
        X = np.vstack(rows)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyInputError("Cannot fit on an empty sample set.")
    return X


def _check_labels(y: ArrayLike) -> np.ndarray:
    y = np.asarray(y, dtype=np.int64)
    unknown = set(np.unique(y).tolist()) - {-1, 1}
    if unknown:
        raise LabelError(f"Labels must be +1 or -1, got {sorted(unknown)}.")
    present = set(np.unique(y).tolist())
    if present != {-1, 1}:
        raise SingleClassError(f"Training needs both labels, got only {sorted(present)}.")
    return y


def fit_scaler(samples: ArrayLike) -> ScalerParams:
    """Per-dimension mean and population standard deviation; zero deviations become 1."""
    X = _as_matrix(samples)
    mean = X.mean(axis=0)
    stddev = X.std(axis=0)
    stddev[stddev == 0] = 1.0
    return ScalerParams(mean=mean, stddev=stddev)


# --- Kernels ---

def kernel_eval(k: KernelSpec, a: ArrayLike, b: ArrayLike) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"Kernel inputs differ in shape: {a.shape} vs {b.shape}.")
    if k.kind == "gaussian":
        diff = a - b
        return math.exp(-k.gamma * float(np.dot(diff, diff)))
    dot = float(np.dot(a, b))
    if k.kind == "linear":
        return dot
    return (dot + k.coef0) ** k.degree


def kernel_matrix(k: KernelSpec, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """K[i, j] = kernel(A[i], B[j])."""
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatchError(f"Kernel inputs differ in dimension: {A.shape[1]} vs {B.shape[1]}.")
    if k.kind == "gaussian":
        sq = np.empty((A.shape[0], B.shape[0]), dtype=np.float64)
        for row, a in enumerate(A):
            diff = B - a
            sq[row] = np.einsum("ij,ij->i", diff, diff)
        return np.exp(-k.gamma * sq)
    dots = A @ B.T
    if k.kind == "linear":
        return dots
    return (dots + k.coef0) ** k.degree


# --- Primal solver ---

def _primal_objective(w: np.ndarray, Xa: np.ndarray, y: np.ndarray, lam: float) -> float:
    hinge = np.maximum(0.0, 1.0 - y * (Xa @ w))
    return 0.5 * lam * float(w @ w) + float(hinge.mean())


def train_linear(samples: ArrayLike, labels: ArrayLike, c: float = 1.0,
                 epochs: Optional[int] = None, seed: int = 42) -> SvmModel:
    """Seeded stochastic subgradient descent on lambda/2 ||w||^2 + mean hinge, lambda = 1 / (c n).

    The bias is an extra weight on a constant feature. The objective is measured every n
    updates and the best iterate so far (starting from w = 0) is kept, so the recorded trace
    never increases.
    """
    if c <= 0:
        raise ValueError("c must be positive.")
    X = _as_matrix(samples)
    y = _check_labels(labels).astype(np.float64)
    scaler = fit_scaler(X)
    Xs = scaler.transform(X)
    n = Xs.shape[0]
    Xa = np.hstack([Xs, np.ones((n, 1))])

    lam = 1.0 / (c * n)
    total_steps = epochs if epochs is not None else settings.epochs_per_sample * n
    radius = 1.0 / math.sqrt(lam)
    rng = np.random.default_rng(seed)
    picks = rng.integers(0, n, size=total_steps)

    w = np.zeros(Xa.shape[1])
    best_w = w.copy()
    best_obj = _primal_objective(w, Xa, y, lam)
    trace = [best_obj]

    for t in range(1, total_steps + 1):
        i = picks[t - 1]
        eta = 1.0 / (lam * t)
        violated = y[i] * float(Xa[i] @ w) < 1.0
        w *= 1.0 - eta * lam
        if violated:
            w += (eta * y[i]) * Xa[i]
        norm = math.sqrt(float(w @ w))
        if norm > radius:
            w *= radius / norm
        if t % n == 0 or t == total_steps:
            obj = _primal_objective(w, Xa, y, lam)
            if obj < best_obj:
                best_obj, best_w = obj, w.copy()
            trace.append(best_obj)

    logger.info(f"Primal solver finished {total_steps} steps on {n} samples, objective {best_obj:.6f}.")
    return SvmModel(
        kernel=KernelSpec(kind="linear"),
        scaler=scaler,
        bias=float(best_w[-1]),
        weights=best_w[:-1].copy(),
        c=c,
        seed=seed,
        solver="primal",
        epochs=total_steps,
        objective_trace=trace,
    )


# --- SMO solver ---

def _violation_bounds(alpha, G, y, c):
    minus_yG = -y * G
    up = ((y > 0) & (alpha < c)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < c))
    return minus_yG, up, low


def _update_pair(i, j, alpha, G, y, K, QD, c):
    Qi = y[i] * y * K[i]
    Qj = y[j] * y * K[j]
    old_ai, old_aj = alpha[i], alpha[j]

    if y[i] != y[j]:
        quad = QD[i] + QD[j] + 2.0 * Qi[j]
        if quad <= 0:
            quad = TAU
        delta = (-G[i] - G[j]) / quad
        diff = alpha[i] - alpha[j]
        alpha[i] += delta
        alpha[j] += delta
        if diff > 0:
            if alpha[j] < 0:
                alpha[j] = 0.0
                alpha[i] = diff
            if alpha[i] > c:
                alpha[i] = c
                alpha[j] = c - diff
        else:
            if alpha[i] < 0:
                alpha[i] = 0.0
                alpha[j] = -diff
            if alpha[j] > c:
                alpha[j] = c
                alpha[i] = c + diff
    else:
        quad = QD[i] + QD[j] - 2.0 * Qi[j]
        if quad <= 0:
            quad = TAU
        delta = (G[i] - G[j]) / quad
        total = alpha[i] + alpha[j]
        alpha[i] -= delta
        alpha[j] += delta
        if total > c:
            if alpha[i] > c:
                alpha[i] = c
                alpha[j] = total - c
            if alpha[j] > c:
                alpha[j] = c
                alpha[i] = total - c
        else:
            if alpha[j] < 0:
                alpha[j] = 0.0
                alpha[i] = total
            if alpha[i] < 0:
                alpha[i] = 0.0
                alpha[j] = total

    G += Qi * (alpha[i] - old_ai) + Qj * (alpha[j] - old_aj)


def train_smo(samples: ArrayLike, labels: ArrayLike, kernel: KernelSpec, c: float = 1.0,
              tol: float = 1e-3, max_passes: int = 10, seed: int = 42) -> SvmModel:
    """Sequential minimal optimization with maximal-violating / second-order pair selection.

    Stops once the KKT violation gap is within `tol`. A pass is n pair updates; after
    `max_passes` passes without a new smallest gap the solver gives up with a warning.
    """
    if c <= 0:
        raise ValueError("c must be positive.")
    if tol <= 0:
        raise ValueError("tol must be positive.")
    X = _as_matrix(samples)
    y = _check_labels(labels).astype(np.float64)
    scaler = fit_scaler(X)
    Xs = scaler.transform(X)
    n = Xs.shape[0]

    K = kernel_matrix(kernel, Xs, Xs)
    QD = np.diag(K).copy()
    alpha = np.zeros(n)
    G = -np.ones(n)

    # ties in pair selection go to the earliest index of a seeded permutation
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)

    def first_in_order(mask: np.ndarray) -> int:
        return int(order[np.argmax(mask[order])])

    max_iter = max(1_000_000, 100 * n)
    stall_limit = max_passes * n
    best_gap, stalled, converged = math.inf, 0, False

    for iteration in range(max_iter):
        minus_yG, up, low = _violation_bounds(alpha, G, y, c)
        m_up = minus_yG[up].max()
        m_low = minus_yG[low].min()
        gap = m_up - m_low
        if gap <= tol:
            converged = True
            break

        i = first_in_order(up & (minus_yG == m_up))
        candidates = low & (minus_yG < m_up)
        curvature = QD[i] + QD - 2.0 * K[i]
        curvature = np.where(curvature > 0, curvature, TAU)
        gain = m_up - minus_yG
        score = np.where(candidates, -(gain * gain) / curvature, np.inf)
        j = first_in_order(score == score.min())

        _update_pair(i, j, alpha, G, y, K, QD, c)

        if gap < best_gap:
            best_gap, stalled = gap, 0
        else:
            stalled += 1
            if stalled >= stall_limit:
                break

    if not converged:
        logger.warning(f"SMO stopped after {iteration + 1} updates with KKT gap {best_gap:.3g} > tol {tol}.")

    minus_yG, up, low = _violation_bounds(alpha, G, y, c)
    free = (alpha > 0) & (alpha < c)
    if free.any():
        bias = float(minus_yG[free].mean())
    else:
        bias = float((minus_yG[up].max() + minus_yG[low].min()) / 2.0)

    support = alpha > 0
    logger.info(
        f"SMO ({kernel.kind}) converged={converged} after {iteration + 1} updates; "
        f"{int(support.sum())} support vectors of {n}."
    )
    return SvmModel(
        kernel=kernel,
        scaler=scaler,
        bias=bias,
        support_vectors=Xs[support].copy(),
        support_labels=y[support].copy(),
        support_alphas=alpha[support].copy(),
        c=c,
        seed=seed,
        solver="smo",
        tol=tol,
        max_passes=max_passes,
        converged=converged,
    )


# --- Prediction ---

def decision_values(m: SvmModel, X: ArrayLike) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != m.feature_dim:
        raise DimensionMismatchError(f"Model expects {m.feature_dim} features, got {X.shape[1]}.")
    Xs = m.scaler.transform(X)
    if m.weights is not None:
        return Xs @ m.weights + m.bias
    return kernel_matrix(m.kernel, Xs, m.support_vectors) @ m.dual_coef + m.bias


def decision_value(m: SvmModel, x: ArrayLike) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionMismatchError("decision_value takes a single feature vector.")
    return float(decision_values(m, x[None, :])[0])


def predict(m: SvmModel, x: ArrayLike) -> int:
    return 1 if decision_value(m, x) >= 0 else -1


def predict_many(m: SvmModel, X: ArrayLike) -> np.ndarray:
    return np.where(decision_values(m, X) >= 0, 1, -1)
