"""Margin classifiers and cross-validation fold construction.

The linear SVM minimizes the L2-regularized hinge loss via dual coordinate
descent (box-constrained, one alpha per sample), which is deterministic for
a fixed seed and needs no external solver. Multiclass problems are handled
one-vs-rest; a two-class problem trains a single binary machine. A Newton
(IRLS) binomial logistic classifier is available for two-class problems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ClassTooSmall, TooFewClasses
from .rng import item_rng

SVM_TOL = 1e-4


@dataclass(frozen=True)
class ClassifierSpec:
    method: str = "svm-linear"  # "svm-linear" | "binomial-logistic"
    regularization: float = 1.0  # C for the SVM, lambda for logistic
    max_epochs: int = 1000
    seed: int = 0


def stratified_folds(labels: list[str], num_folds: int, seed: int) -> list[np.ndarray]:
    """Partition indices into ``num_folds`` folds with per-class balance.

    Each class' shuffled indices are dealt into folds in contiguous chunks
    whose sizes differ by at most one, so every fold's class proportions sit
    within +-1 member of the global proportions.
    """
    if num_folds < 2:
        raise ClassTooSmall("need at least 2 folds")
    by_class: dict[str, list[int]] = {}
    for i, lab in enumerate(labels):
        by_class.setdefault(lab, []).append(i)
    smallest = min(len(v) for v in by_class.values())
    if smallest < num_folds:
        raise ClassTooSmall(
            f"smallest class has {smallest} members, fewer than {num_folds} folds"
        )
    rng = item_rng(seed, 0)
    folds: list[list[int]] = [[] for _ in range(num_folds)]
    for lab in sorted(by_class):
        idx = np.array(by_class[lab])
        rng.shuffle(idx)
        base, extra = divmod(idx.size, num_folds)
        start = 0
        for f in range(num_folds):
            stop = start + base + (1 if f < extra else 0)
            folds[f].extend(int(i) for i in idx[start:stop])
            start = stop
    return [np.array(sorted(f), dtype=np.int64) for f in folds]


def _train_binary_svm(
    x: np.ndarray, y: np.ndarray, c: float, max_epochs: int, rng: np.random.Generator
) -> np.ndarray:
    """Dual coordinate descent for min_w 0.5||w||^2 + C sum hinge(y_i w.x_i).

    ``x`` must already carry the bias column; ``y`` is +-1. Stops when the
    largest projected-gradient violation in an epoch falls below SVM_TOL.
    """
    n = x.shape[0]
    alpha = np.zeros(n)
    w = np.zeros(x.shape[1])
    qii = np.einsum("ij,ij->i", x, x)
    yx = y[:, None] * x
    for _ in range(max_epochs):
        worst = 0.0
        for i in rng.permutation(n):
            g = float(yx[i] @ w) - 1.0
            a = alpha[i]
            if a <= 0.0:
                pg = min(g, 0.0)
            elif a >= c:
                pg = max(g, 0.0)
            else:
                pg = g
            if pg != 0.0:
                worst = max(worst, abs(pg))
                new_a = min(max(a - g / qii[i], 0.0), c)
                if new_a != a:
                    alpha[i] = new_a
                    w += (new_a - a) * yx[i]
        if worst < SVM_TOL:
            break
    return w


class LinearSVM:
    """One-vs-rest linear SVM over standardized features."""

    def __init__(self, spec: ClassifierSpec):
        self.spec = spec
        self.classes_: list[str] = []
        self.weights_: np.ndarray | None = None

    def fit(self, x: np.ndarray, labels: list[str]) -> "LinearSVM":
        self.classes_ = sorted(set(labels))
        if len(self.classes_) < 2:
            raise TooFewClasses("need at least 2 classes")
        xb = np.column_stack([x, np.ones(x.shape[0])])
        if len(self.classes_) == 2:
            y = np.where(np.array(labels) == self.classes_[1], 1.0, -1.0)
            w = _train_binary_svm(
                xb, y, self.spec.regularization, self.spec.max_epochs, item_rng(self.spec.seed, 0)
            )
            self.weights_ = w[None, :]
        else:
            rows = []
            for k, cls in enumerate(self.classes_):
                y = np.where(np.array(labels) == cls, 1.0, -1.0)
                rows.append(
                    _train_binary_svm(
                        xb, y, self.spec.regularization, self.spec.max_epochs,
                        item_rng(self.spec.seed, k),
                    )
                )
            self.weights_ = np.vstack(rows)
        return self

    def decision_values(self, x: np.ndarray) -> np.ndarray:
        xb = np.column_stack([x, np.ones(x.shape[0])])
        return xb @ self.weights_.T

    def predict(self, x: np.ndarray) -> list[str]:
        scores = self.decision_values(x)
        if len(self.classes_) == 2:
            return [self.classes_[1] if s > 0 else self.classes_[0] for s in scores[:, 0]]
        return [self.classes_[int(k)] for k in np.argmax(scores, axis=1)]


class BinomialLogistic:
    """Two-class ridge-regularized logistic regression fitted by Newton steps."""

    def __init__(self, spec: ClassifierSpec):
        self.spec = spec
        self.classes_: list[str] = []
        self.w_: np.ndarray | None = None

    def fit(self, x: np.ndarray, labels: list[str]) -> "BinomialLogistic":
        self.classes_ = sorted(set(labels))
        if len(self.classes_) != 2:
            raise TooFewClasses(
                f"binomial logistic needs exactly 2 classes, got {len(self.classes_)}"
            )
        xb = np.column_stack([x, np.ones(x.shape[0])])
        t = np.where(np.array(labels) == self.classes_[1], 1.0, 0.0)
        lam = self.spec.regularization
        w = np.zeros(xb.shape[1])
        for _ in range(min(self.spec.max_epochs, 100)):
            z = xb @ w
            prob = 1.0 / (1.0 + np.exp(-np.clip(z, -35, 35)))
            grad = xb.T @ (prob - t) + lam * w
            if float(np.max(np.abs(grad))) < 1e-10:
                break
            r = np.maximum(prob * (1.0 - prob), 1e-10)
            hess = (xb * r[:, None]).T @ xb + lam * np.eye(xb.shape[1])
            w = w - np.linalg.solve(hess, grad)
        self.w_ = w
        return self

    def decision_values(self, x: np.ndarray) -> np.ndarray:
        xb = np.column_stack([x, np.ones(x.shape[0])])
        return (xb @ self.w_)[:, None]

    def predict(self, x: np.ndarray) -> list[str]:
        return [
            self.classes_[1] if z > 0 else self.classes_[0]
            for z in self.decision_values(x)[:, 0]
        ]


def make_classifier(spec: ClassifierSpec):
    if spec.method == "svm-linear":
        return LinearSVM(spec)
    if spec.method == "binomial-logistic":
        return BinomialLogistic(spec)
    raise ValueError(f"unknown classifier method {spec.method!r}")
