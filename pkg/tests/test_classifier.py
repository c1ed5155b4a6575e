from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bandsel.classifier import (
    ClassifierError,
    ConfusionCounts,
    SvmConfig,
    balanced_accuracy,
    confusion_counts,
    evaluate_genome,
    predict,
    train,
)


def test_balanced_accuracy_hand_examples():
    assert balanced_accuracy(ConfusionCounts(tp=5, fn=0, tn=5, fp=0)) == 1.0
    assert balanced_accuracy(ConfusionCounts(tp=0, fn=5, tn=0, fp=5)) == 0.0
    # TPR = 3/4, TNR = 1/2 -> 5/8
    assert balanced_accuracy(ConfusionCounts(tp=3, fn=1, tn=2, fp=2)) == pytest.approx(0.625)


def test_balanced_accuracy_majority_predictor_is_half():
    # Predicting the majority class for everything scores exactly 0.5.
    y_true = np.array([1] * 90 + [-1] * 10)
    y_pred = np.ones(100, dtype=int)
    assert balanced_accuracy(confusion_counts(y_true, y_pred)) == 0.5


def test_balanced_accuracy_empty_class_errors():
    with pytest.raises(ClassifierError):
        balanced_accuracy(ConfusionCounts(tp=0, fn=0, tn=3, fp=1))
    with pytest.raises(ClassifierError):
        balanced_accuracy(ConfusionCounts(tp=2, fn=1, tn=0, fp=0))


@given(
    tp=st.integers(0, 50),
    fn=st.integers(0, 50),
    tn=st.integers(0, 50),
    fp=st.integers(0, 50),
)
def test_balanced_accuracy_matches_exact_fraction(tp, fn, tn, fp):
    c = ConfusionCounts(tp=tp, fn=fn, tn=tn, fp=fp)
    if tp + fn == 0 or tn + fp == 0:
        with pytest.raises(ClassifierError):
            balanced_accuracy(c)
        return
    exact = (Fraction(tp, tp + fn) + Fraction(tn, tn + fp)) / 2
    assert abs(balanced_accuracy(c) - float(exact)) < 1e-15


def test_balanced_accuracy_class_swap_invariance():
    c = ConfusionCounts(tp=7, fn=3, tn=11, fp=9)
    swapped = ConfusionCounts(tp=c.tn, fn=c.fp, tn=c.tp, fp=c.fn)
    assert balanced_accuracy(c) == pytest.approx(balanced_accuracy(swapped), abs=1e-15)


def separable_clouds(n=60, d=4, gap=6.0, seed=0):
    rng = np.random.default_rng(seed)
    pos = rng.standard_normal((n, d)) + gap
    neg = rng.standard_normal((n, d)) - gap
    X = np.vstack([pos, neg])
    y = np.array([1] * n + [-1] * n)
    return X, y


@pytest.mark.parametrize("kernel", ["linear", "rbf"])
def test_separable_clouds_perfect(kernel):
    X, y = separable_clouds()
    model = train(X, y, SvmConfig(kernel=kernel))
    pred = predict(model, X)
    assert balanced_accuracy(confusion_counts(y, pred)) == 1.0


def test_random_labels_near_chance():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((200, 6))
    y = rng.choice([-1, 1], size=200)
    X_test = rng.standard_normal((400, 6))
    y_test = rng.choice([-1, 1], size=400)
    model = train(X, y, SvmConfig())
    ba = balanced_accuracy(confusion_counts(y_test, predict(model, X_test)))
    assert abs(ba - 0.5) < 0.1


def test_imbalanced_classes_still_learned():
    # 10:1 imbalance with class weighting: the minority class must not be
    # swamped on separable data.
    rng = np.random.default_rng(2)
    pos = rng.standard_normal((10, 3)) + 4.0
    neg = rng.standard_normal((100, 3)) - 4.0
    X = np.vstack([pos, neg])
    y = np.array([1] * 10 + [-1] * 100)
    model = train(X, y, SvmConfig())
    assert balanced_accuracy(confusion_counts(y, predict(model, X))) == 1.0


def test_duplicated_column_identical_predictions():
    X, y = separable_clouds(gap=1.0, seed=3)
    X2 = np.hstack([X, X[:, :1]])
    p1 = predict(train(X, y, SvmConfig()), X)
    p2 = predict(train(X2, y, SvmConfig()), X2)
    assert np.array_equal(p1, p2) or (p1 != p2).mean() < 0.05


def test_constant_column_handled():
    X, y = separable_clouds(seed=4)
    X = np.hstack([X, np.full((X.shape[0], 1), 3.0)])
    model = train(X, y, SvmConfig())
    assert np.isfinite(model.weights).all()
    assert balanced_accuracy(confusion_counts(y, predict(model, X))) == 1.0


def test_single_class_training_errors():
    X = np.random.default_rng(5).standard_normal((10, 3))
    with pytest.raises(ClassifierError):
        train(X, np.ones(10, dtype=int), SvmConfig())


def test_train_determinism():
    X, y = separable_clouds(gap=0.5, seed=6)
    m1 = train(X, y, SvmConfig(seed=7))
    m2 = train(X, y, SvmConfig(seed=7))
    assert np.array_equal(m1.weights, m2.weights)


def test_bad_kernel_errors():
    X, y = separable_clouds(seed=8)
    with pytest.raises(ClassifierError):
        train(X, y, SvmConfig(kernel="poly"))


def test_evaluate_genome_uses_selected_band_columns(band_signal_dataset):
    ds = band_signal_dataset
    memo = {}
    val_both, test_both = evaluate_genome(
        (0, 0, 0, 0, 1, 1, 0), ds.fm, ds.y, ds.splits, memo=memo
    )
    assert val_both == 1.0 and test_both == 1.0
    val_noise, _ = evaluate_genome((1, 0, 0, 0, 0, 0, 0), ds.fm, ds.y, ds.splits, memo=memo)
    assert val_noise < 0.7
    val_single, _ = evaluate_genome((0, 0, 0, 0, 1, 0, 0), ds.fm, ds.y, ds.splits, memo=memo)
    assert val_noise < val_single < val_both


def test_evaluate_genome_memoized(band_signal_dataset):
    ds = band_signal_dataset
    memo = {}
    first = evaluate_genome((0, 0, 0, 0, 1, 1, 0), ds.fm, ds.y, ds.splits, memo=memo)
    # Second call must hit the memo (same object back).
    again = evaluate_genome((0, 0, 0, 0, 1, 1, 0), ds.fm, ds.y, ds.splits, memo=memo)
    assert first == again
    assert list(memo) == [(0, 0, 0, 0, 1, 1, 0)]


def test_evaluate_genome_all_zero_errors(band_signal_dataset):
    ds = band_signal_dataset
    with pytest.raises(ClassifierError):
        evaluate_genome((0,) * 7, ds.fm, ds.y, ds.splits)
