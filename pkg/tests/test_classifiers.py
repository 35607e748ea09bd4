from __future__ import annotations

import numpy as np
import pytest

from featkit.classifiers import (
    BinomialLogistic,
    ClassifierSpec,
    LinearSVM,
    make_classifier,
    stratified_folds,
)
from featkit.errors import ClassTooSmall, TooFewClasses


def blobs(n_per_class=20, sep=4.0, d=3, seed=0):
    rng = np.random.default_rng(seed)
    x = np.vstack([
        rng.normal(size=(n_per_class, d)),
        rng.normal(loc=sep, size=(n_per_class, d)),
    ])
    y = ["a"] * n_per_class + ["b"] * n_per_class
    return x, y


# -- folds -------------------------------------------------------------------

def test_folds_partition_and_balance():
    labels = ["a"] * 25 + ["b"] * 13 + ["c"] * 12
    folds = stratified_folds(labels, 5, seed=3)
    all_idx = np.concatenate(folds)
    assert sorted(all_idx.tolist()) == list(range(50))
    global_props = {c: labels.count(c) / len(labels) for c in "abc"}
    for fold in folds:
        for cls in "abc":
            got = sum(1 for i in fold if labels[i] == cls)
            expect = global_props[cls] * len(fold)
            assert abs(got - expect) <= 1.0 + 1e-9


def test_folds_deterministic_given_seed():
    labels = ["a"] * 10 + ["b"] * 10
    f1 = stratified_folds(labels, 5, seed=7)
    f2 = stratified_folds(labels, 5, seed=7)
    f3 = stratified_folds(labels, 5, seed=8)
    assert all(np.array_equal(a, b) for a, b in zip(f1, f2))
    assert any(not np.array_equal(a, b) for a, b in zip(f1, f3))


def test_folds_reject_small_class():
    with pytest.raises(ClassTooSmall):
        stratified_folds(["a"] * 10 + ["b"] * 3, 5, seed=0)


# -- linear SVM --------------------------------------------------------------

def test_svm_separates_blobs():
    x, y = blobs(sep=5.0)
    model = LinearSVM(ClassifierSpec(seed=1)).fit(x, y)
    assert model.predict(x) == y


def test_svm_deterministic_given_seed():
    x, y = blobs(sep=2.0, seed=4)
    w1 = LinearSVM(ClassifierSpec(seed=9)).fit(x, y).weights_
    w2 = LinearSVM(ClassifierSpec(seed=9)).fit(x, y).weights_
    assert np.array_equal(w1, w2)


def test_svm_decision_invariant_to_feature_order():
    x, y = blobs(sep=3.0, d=5, seed=6)
    perm = np.array([3, 1, 4, 0, 2])
    m1 = LinearSVM(ClassifierSpec(seed=2)).fit(x, y)
    m2 = LinearSVM(ClassifierSpec(seed=2)).fit(x[:, perm], y)
    assert np.allclose(m1.decision_values(x), m2.decision_values(x[:, perm]), atol=1e-6)
    assert m1.predict(x) == m2.predict(x[:, perm])


def test_svm_multiclass_one_vs_rest():
    rng = np.random.default_rng(8)
    centers = np.array([[0.0, 0.0], [6.0, 0.0], [0.0, 6.0]])
    x = np.vstack([rng.normal(size=(15, 2)) + c for c in centers])
    y = ["a"] * 15 + ["b"] * 15 + ["c"] * 15
    model = LinearSVM(ClassifierSpec(seed=3)).fit(x, y)
    assert model.predict(x) == y
    assert model.decision_values(x).shape == (45, 3)


def test_svm_binary_reduces_to_single_machine():
    x, y = blobs(seed=5)
    model = LinearSVM(ClassifierSpec(seed=0)).fit(x, y)
    assert model.weights_.shape[0] == 1  # one machine, not two OvR machines
    scores = model.decision_values(x)[:, 0]
    preds = model.predict(x)
    assert all((s > 0) == (p == "b") for s, p in zip(scores, preds))


def test_svm_rejects_single_class():
    with pytest.raises(TooFewClasses):
        LinearSVM(ClassifierSpec()).fit(np.zeros((4, 2)), ["a"] * 4)


def test_svm_dual_feasibility():
    # hinge-loss dual keeps 0 <= alpha <= C; spot-check through the primal:
    # the learned machine must classify a margin-separated set perfectly and
    # produce |decision| >= ~1 outside the margin band
    x, y = blobs(sep=8.0, seed=11)
    model = LinearSVM(ClassifierSpec(seed=0)).fit(x, y)
    scores = model.decision_values(x)[:, 0]
    assert np.min(np.abs(scores)) > 0.5


# -- logistic ----------------------------------------------------------------

def test_logistic_separates_blobs():
    # the default ridge (lambda = 1) trades a sliver of training accuracy
    # for bounded weights on separable data
    x, y = blobs(sep=4.0, seed=12)
    model = BinomialLogistic(ClassifierSpec("binomial-logistic")).fit(x, y)
    errors = sum(1 for got, want in zip(model.predict(x), y) if got != want)
    assert errors <= 2
    wide_x, wide_y = blobs(sep=8.0, seed=12)
    wide = BinomialLogistic(ClassifierSpec("binomial-logistic")).fit(wide_x, wide_y)
    assert wide.predict(wide_x) == wide_y


def test_logistic_requires_two_classes():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(30, 2))
    y = ["a"] * 10 + ["b"] * 10 + ["c"] * 10
    with pytest.raises(TooFewClasses):
        BinomialLogistic(ClassifierSpec("binomial-logistic")).fit(x, y)


def test_make_classifier_dispatch():
    assert isinstance(make_classifier(ClassifierSpec("svm-linear")), LinearSVM)
    assert isinstance(make_classifier(ClassifierSpec("binomial-logistic")), BinomialLogistic)
    with pytest.raises(ValueError):
        make_classifier(ClassifierSpec("forest"))
