"""Soft-margin SVM trained by SMO, combined one-vs-one for multi-class problems."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BinaryMachine",
    "SvmModel",
    "SvmParams",
    "kernel_matrix",
    "kkt_violations",
    "smo_solve",
    "svm_decision_values",
    "svm_predict",
    "svm_train",
    "vote",
]

log = logging.getLogger(__name__)

TAU = 1e-12
KERNELS = ("linear", "rbf")


@dataclass(frozen=True)
class SvmParams:
    C: float = 10.0
    kernel: str = "linear"
    gamma: float = 1.0
    tol: float = 1e-3
    max_iter: int = 100_000

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError(f"C must be > 0, got {self.C}")
        if self.kernel not in KERNELS:
            raise ValueError(f"kernel must be one of {KERNELS}, got {self.kernel!r}")
        if self.kernel == "rbf" and not self.gamma > 0:
            raise ValueError(f"rbf gamma must be > 0, got {self.gamma}")
        if not self.tol > 0:
            raise ValueError(f"tol must be > 0, got {self.tol}")


def kernel_matrix(A: np.ndarray, B: np.ndarray, params: SvmParams) -> np.ndarray:
    A = np.atleast_2d(A)
    B = np.atleast_2d(B)
    if params.kernel == "linear":
        return A @ B.T
    sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    return np.exp(-params.gamma * np.maximum(sq, 0.0))


def smo_solve(K: np.ndarray, y: np.ndarray, C: float, tol: float = 1e-3,
              max_iter: int = 100_000) -> tuple[np.ndarray, float, int]:
    """Solve the SVM dual with maximal-violating-pair, second-order working sets.

    Returns ``(alpha, bias, iterations)``.  Stops when the KKT gap
    ``max_{I_up} -y G - min_{I_low} -y G`` drops below ``tol``; the bias is the
    midpoint of the feasible interval, so every sample's KKT residual is at
    most ``tol / 2``.  Ties in the working-set argmax/argmin go to the lowest
    index, which keeps training deterministic.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    Q = (y[:, None] * y[None, :]) * K
    QD = np.diag(K).copy()
    alpha = np.zeros(n)
    G = -np.ones(n)

    it = 0
    while True:
        minus_yG = -y * G
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        if not up.any() or not low.any():
            break
        up_vals = np.where(up, minus_yG, -np.inf)
        i = int(np.argmax(up_vals))
        g_max = up_vals[i]
        g_min = np.min(minus_yG[low])
        if g_max - g_min < tol or it >= max_iter:
            if it >= max_iter:
                log.warning("SMO stopped at max_iter=%d with KKT gap %.3g", max_iter, g_max - g_min)
            break

        cand = low & (minus_yG < g_max)
        b = g_max - minus_yG
        a = QD[i] + QD - 2.0 * K[i]
        a = np.where(a > 0, a, TAU)
        score = np.where(cand, -(b * b) / a, np.inf)
        j = int(np.argmin(score))

        old_i, old_j = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = max(QD[i] + QD[j] + 2.0 * Q[i, j], TAU)
            delta = (-G[i] - G[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j], alpha[i] = 0.0, diff
            elif alpha[i] < 0:
                alpha[i], alpha[j] = 0.0, -diff
            if diff > 0:
                if alpha[i] > C:
                    alpha[i], alpha[j] = C, C - diff
            elif alpha[j] > C:
                alpha[j], alpha[i] = C, C + diff
        else:
            quad = max(QD[i] + QD[j] - 2.0 * Q[i, j], TAU)
            delta = (G[i] - G[j]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i], alpha[j] = C, total - C
            elif alpha[j] < 0:
                alpha[j], alpha[i] = 0.0, total
            if total > C:
                if alpha[j] > C:
                    alpha[j], alpha[i] = C, total - C
            elif alpha[i] < 0:
                alpha[i], alpha[j] = 0.0, total

        G += Q[:, i] * (alpha[i] - old_i) + Q[:, j] * (alpha[j] - old_j)
        it += 1

    minus_yG = -y * G
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
    lo = minus_yG[up].max() if up.any() else minus_yG[low].min()
    hi = minus_yG[low].min() if low.any() else lo
    return alpha, 0.5 * (lo + hi), it


@dataclass(eq=False)
class BinaryMachine:
    """One pairwise classifier; ``positive`` is the class labelled +1."""

    positive: str
    negative: str
    points: np.ndarray
    y: np.ndarray
    alpha: np.ndarray
    bias: float
    params: SvmParams
    iterations: int = 0

    def decision(self, X: np.ndarray) -> np.ndarray:
        sv = self.alpha > 0
        if not sv.any():
            return np.full(np.atleast_2d(X).shape[0], self.bias)
        k = kernel_matrix(np.atleast_2d(X), self.points[sv], self.params)
        return k @ (self.alpha[sv] * self.y[sv]) + self.bias


@dataclass(eq=False)
class SvmModel:
    classes: tuple[str, ...]
    machines: list[BinaryMachine] = field(default_factory=list)
    params: SvmParams = field(default_factory=SvmParams)

    @property
    def pairs(self) -> list[tuple[str, str]]:
        return [(m.positive, m.negative) for m in self.machines]


def svm_train(points: np.ndarray, labels, params: SvmParams | None = None) -> SvmModel:
    """Train C(K, 2) one-vs-one machines; classes are ordered by sorted label."""
    params = params or SvmParams()
    X = np.asarray(points, dtype=float)
    labels = np.asarray(labels)
    if X.ndim != 2 or X.shape[0] != labels.shape[0]:
        raise ValueError("points must be (n, d) with one label per row")
    classes = tuple(sorted(set(labels.tolist())))
    if len(classes) < 2:
        raise ValueError(f"need at least 2 classes, got {classes}")
    for c in classes:
        if np.sum(labels == c) < 2:
            raise ValueError(f"class {c!r} has fewer than 2 training points")

    machines = []
    for a, b in itertools.combinations(classes, 2):
        mask = (labels == a) | (labels == b)
        Xp = X[mask]
        y = np.where(labels[mask] == a, 1.0, -1.0)
        K = kernel_matrix(Xp, Xp, params)
        alpha, bias, it = smo_solve(K, y, params.C, params.tol, params.max_iter)
        machines.append(BinaryMachine(a, b, Xp, y, alpha, bias, params, it))
    return SvmModel(classes, machines, params)


def svm_decision_values(model: SvmModel, X: np.ndarray) -> np.ndarray:
    """Decision values, shape ``(n, n_machines)``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return np.column_stack([m.decision(X) for m in model.machines])


def vote(classes, pairs, decisions: np.ndarray) -> list:
    """One-vs-one majority vote.

    A positive decision votes for the pair's first class, otherwise the
    second; the winner also collects ``|decision|``.  Ties on votes go to
    the larger summed margin, then to the earlier class in ``classes``.
    """
    index = {c: k for k, c in enumerate(classes)}
    decisions = np.atleast_2d(decisions)
    out = []
    for row in decisions:
        votes = np.zeros(len(classes))
        margin = np.zeros(len(classes))
        for (a, b), d in zip(pairs, row):
            k = index[a] if d > 0 else index[b]
            votes[k] += 1
            margin[k] += abs(d)
        best = max(range(len(classes)), key=lambda k: (votes[k], margin[k], -k))
        out.append(classes[best])
    return out


def svm_predict(model: SvmModel, X) -> list:
    """Predict labels for an ``(n, d)`` batch (a single point gives a 1-element list)."""
    if not model.machines:
        raise ValueError("model is untrained")
    return vote(model.classes, model.pairs, svm_decision_values(model, X))


def kkt_violations(machine: BinaryMachine, tol: float = 1e-3) -> dict:
    """Check a machine against the dual KKT conditions from scratch.

    Recomputes every training decision value through the kernel, then tests
    ``0 <= alpha <= C``, ``sum(alpha * y) == 0`` and the complementary
    conditions on ``y f(x)``.  Returns counts and the worst residual.
    """
    C = machine.params.C
    alpha, y = machine.alpha, machine.y
    K = kernel_matrix(machine.points, machine.points, machine.params)
    margin = y * (K @ (alpha * y) + machine.bias)
    eps = 1e-9 * C
    residual = np.zeros_like(alpha)
    at_zero = alpha <= eps
    at_c = alpha >= C - eps
    free = ~at_zero & ~at_c
    residual[at_zero] = np.maximum(0.0, 1.0 - margin[at_zero])
    residual[at_c] = np.maximum(0.0, margin[at_c] - 1.0)
    residual[free] = np.abs(margin[free] - 1.0)
    return {
        "box": int(np.sum((alpha < -eps) | (alpha > C + eps))),
        "equality": float(abs(np.dot(alpha, y))),
        "max_residual": float(residual.max(initial=0.0)),
        "violations": int(np.sum(residual > tol)),
    }
