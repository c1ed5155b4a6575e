"""Soft-margin SVM on genome-sliced feature columns, scored by balanced accuracy.

Positive class (+1) is non-forest. The linear kernel is solved by dual
coordinate descent; the rbf kernel by an SMO working on the most violating
pair. Class penalties are inverse-frequency weighted:
C_class = C * N_total / (2 * N_class).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit

from .segments import LABEL_NONFOREST, SegmentRecord
from .texture import FeatureMatrix

POSITIVE = 1   # non-forest
NEGATIVE = -1  # forest


class ClassifierError(Exception):
    pass


@dataclass(frozen=True)
class SvmConfig:
    kernel: str = "linear"      # "linear" | "rbf"
    C: float = 1.0
    tol: float = 1e-4
    max_epochs: int = 1000
    gamma: float | None = None  # rbf only; default 1 / (d * mean column variance)
    standardize: bool = True
    seed: int = 0


@dataclass(frozen=True)
class Scaler:
    mean: np.ndarray
    sd: np.ndarray  # constant columns carry sd = 1

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.sd


@dataclass(frozen=True)
class SvmModel:
    kernel: str
    scaler: Scaler | None
    weights: np.ndarray | None = None       # (d + 1,), last entry is the bias
    support_x: np.ndarray | None = None     # rbf
    support_coef: np.ndarray | None = None  # rbf: alpha_i * y_i
    bias: float = 0.0
    gamma: float | None = None


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fn: int
    tn: int
    fp: int


def balanced_accuracy(c: ConfusionCounts) -> float:
    """Mean of the two per-class recalls: ((TPR + TNR) / 2)."""
    if c.tp + c.fn == 0:
        raise ClassifierError("no positive samples; balanced accuracy undefined")
    if c.tn + c.fp == 0:
        raise ClassifierError("no negative samples; balanced accuracy undefined")
    tpr = c.tp / (c.tp + c.fn)
    tnr = c.tn / (c.tn + c.fp)
    return (tpr + tnr) / 2.0


def confusion_counts(y_true: np.ndarray, y_pred: np.ndarray) -> ConfusionCounts:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    return ConfusionCounts(
        tp=int(((y_true == POSITIVE) & (y_pred == POSITIVE)).sum()),
        fn=int(((y_true == POSITIVE) & (y_pred == NEGATIVE)).sum()),
        tn=int(((y_true == NEGATIVE) & (y_pred == NEGATIVE)).sum()),
        fp=int(((y_true == NEGATIVE) & (y_pred == POSITIVE)).sum()),
    )


def _fit_scaler(X: np.ndarray) -> Scaler:
    mean = X.mean(axis=0)
    sd = X.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    return Scaler(mean=mean, sd=sd)


def _class_penalties(y: np.ndarray, C: float) -> np.ndarray:
    n = y.size
    n_pos = int((y == POSITIVE).sum())
    n_neg = n - n_pos
    c_pos = C * n / (2.0 * n_pos)
    c_neg = C * n / (2.0 * n_neg)
    return np.where(y == POSITIVE, c_pos, c_neg)


@njit(cache=True)
def _dual_cd(X, y, Ci, tol, max_epochs, order):  # pragma: no cover - jitted
    n, d = X.shape
    alpha = np.zeros(n)
    w = np.zeros(d)
    diag = np.empty(n)
    for i in range(n):
        s = 0.0
        for k in range(d):
            s += X[i, k] * X[i, k]
        diag[i] = s
    for _ in range(max_epochs):
        max_pg = 0.0
        for t in range(n):
            i = order[t]
            g = 0.0
            for k in range(d):
                g += w[k] * X[i, k]
            g = g * y[i] - 1.0
            pg = g
            if alpha[i] <= 0.0 and g > 0.0:
                pg = 0.0
            elif alpha[i] >= Ci[i] and g < 0.0:
                pg = 0.0
            if abs(pg) > max_pg:
                max_pg = abs(pg)
            if abs(pg) > 1e-12:
                a_old = alpha[i]
                a_new = a_old - g / diag[i]
                if a_new < 0.0:
                    a_new = 0.0
                elif a_new > Ci[i]:
                    a_new = Ci[i]
                alpha[i] = a_new
                delta = (a_new - a_old) * y[i]
                if delta != 0.0:
                    for k in range(d):
                        w[k] += delta * X[i, k]
        if max_pg < tol:
            break
    return w


def _smo_rbf(K, y, Ci, tol, max_iter):
    """Most-violating-pair SMO on a precomputed kernel matrix."""
    n = y.size
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of the dual objective wrt alpha
    yK = K * y[None, :] * y[:, None]
    for _ in range(max_iter):
        ygrad = -y * grad
        up = ((y == 1) & (alpha < Ci)) | ((y == -1) & (alpha > 0))
        low = ((y == 1) & (alpha > 0)) | ((y == -1) & (alpha < Ci))
        if not up.any() or not low.any():
            break
        i = int(np.flatnonzero(up)[np.argmax(ygrad[up])])
        j = int(np.flatnonzero(low)[np.argmin(ygrad[low])])
        if ygrad[i] - ygrad[j] < tol:
            break
        quad = yK[i, i] + yK[j, j] - 2.0 * y[i] * y[j] * K[i, j]
        quad = max(quad, 1e-12)
        step = (ygrad[i] - ygrad[j]) / quad
        # Box constraints for the pair update alpha_i += y_i*s, alpha_j -= y_j*s.
        max_step = step
        if y[i] == 1:
            max_step = min(max_step, Ci[i] - alpha[i])
        else:
            max_step = min(max_step, alpha[i])
        if y[j] == 1:
            max_step = min(max_step, alpha[j])
        else:
            max_step = min(max_step, Ci[j] - alpha[j])
        step = max(0.0, min(step, max_step))
        if step == 0.0:
            break
        alpha[i] += y[i] * step
        alpha[j] -= y[j] * step
        grad += step * y * (K[:, i] - K[:, j])
    # Bias from the midpoint of the violating-pair bounds.
    ygrad = -y * grad
    up = ((y == 1) & (alpha < Ci)) | ((y == -1) & (alpha > 0))
    low = ((y == 1) & (alpha > 0)) | ((y == -1) & (alpha < Ci))
    hi = ygrad[up].max() if up.any() else 0.0
    lo = ygrad[low].min() if low.any() else 0.0
    bias = (hi + lo) / 2.0
    return alpha, bias


def _rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    sq = ((A ** 2).sum(1)[:, None] + (B ** 2).sum(1)[None, :]) - 2.0 * A @ B.T
    return np.exp(-gamma * np.maximum(sq, 0.0))


def train(X: np.ndarray, y: np.ndarray, config: SvmConfig = SvmConfig()) -> SvmModel:
    """Fit an SVM; `y` in {+1, -1}, columns already sliced to the active set."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.shape[1] == 0:
        raise ClassifierError("empty active column set")
    classes = np.unique(y)
    if classes.size < 2:
        raise ClassifierError("training set contains a single class")
    scaler = _fit_scaler(X) if config.standardize else None
    Xs = scaler.transform(X) if scaler else X
    Ci = _class_penalties(y, config.C)

    if config.kernel == "linear":
        Xb = np.hstack([Xs, np.ones((Xs.shape[0], 1))])
        order = np.random.default_rng(config.seed).permutation(Xb.shape[0])
        w = _dual_cd(
            np.ascontiguousarray(Xb), y, Ci, config.tol, config.max_epochs, order
        )
        return SvmModel(kernel="linear", scaler=scaler, weights=w)
    if config.kernel == "rbf":
        gamma = config.gamma
        if gamma is None:
            mean_var = float(Xs.var(axis=0).mean())
            gamma = 1.0 / (Xs.shape[1] * mean_var) if mean_var > 0 else 1.0 / Xs.shape[1]
        K = _rbf_kernel(Xs, Xs, gamma)
        alpha, bias = _smo_rbf(K, y, Ci, config.tol, max_iter=100 * y.size)
        sv = alpha > 1e-12
        return SvmModel(
            kernel="rbf",
            scaler=scaler,
            support_x=Xs[sv],
            support_coef=alpha[sv] * y[sv],
            bias=bias,
            gamma=gamma,
        )
    raise ClassifierError(f"unknown kernel {config.kernel!r}")


def decision_function(model: SvmModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    Xs = model.scaler.transform(X) if model.scaler else X
    if model.kernel == "linear":
        return Xs @ model.weights[:-1] + model.weights[-1]
    K = _rbf_kernel(Xs, model.support_x, model.gamma)
    return K @ model.support_coef + model.bias


def predict(model: SvmModel, X: np.ndarray) -> np.ndarray:
    return np.where(decision_function(model, X) >= 0.0, POSITIVE, NEGATIVE)


def labels_and_splits(records: list[SegmentRecord]) -> tuple[np.ndarray, np.ndarray]:
    """(y, splits) arrays aligned to the record order; +1 = non-forest."""
    y = np.array([POSITIVE if r.label == LABEL_NONFOREST else NEGATIVE for r in records])
    splits = np.array([r.split or "" for r in records])
    return y, splits


def evaluate_genome(
    genome,
    fm: FeatureMatrix,
    y: np.ndarray,
    splits: np.ndarray,
    config: SvmConfig = SvmConfig(),
    memo: Optional[dict] = None,
) -> tuple[float, float]:
    """(validation, test) balanced accuracy of an SVM on the genome's bands.

    Validation is the UMDA fitness; test is reporting only. Results are
    memoized by genome bit pattern when a memo dict is supplied.
    """
    key = tuple(int(g) for g in genome)
    if not any(key):
        raise ClassifierError("genome has no active bands")
    if memo is not None and key in memo:
        return memo[key]
    cols = fm.genome_columns(key)
    X = fm.values[:, cols]
    train_rows = splits == "train"
    model = train(X[train_rows], y[train_rows], config)
    scores = []
    for split in ("val", "test"):
        rows = splits == split
        pred = predict(model, X[rows])
        scores.append(balanced_accuracy(confusion_counts(y[rows], pred)))
    result = (scores[0], scores[1])
    if memo is not None:
        memo[key] = result
    return result
