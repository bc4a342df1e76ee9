"""Confusion-matrix quality criteria: BAC, Cohen's kappa, micro-F1."""

import warnings

import numpy as np


def confusion_matrix(y_true, y_pred, n_classes=None):
    """Counts with rows = truth, cols = prediction; labels 1..M."""
    y_true = np.asarray(y_true, dtype=int)
    y_pred = np.asarray(y_pred, dtype=int)
    if y_true.shape != y_pred.shape:
        raise ValueError("y_true and y_pred lengths differ")
    m = n_classes or int(max(y_true.max(), y_pred.max()))
    cm = np.zeros((m, m), dtype=int)
    np.add.at(cm, (y_true - 1, y_pred - 1), 1)
    return cm


def balanced_accuracy(cm):
    """Mean per-class recall; empty truth rows are excluded with a warning."""
    cm = np.asarray(cm, dtype=float)
    row_sums = cm.sum(axis=1)
    present = row_sums > 0
    if not np.all(present):
        warnings.warn("classes with no true samples excluded from BAC",
                      RuntimeWarning)
    if not np.any(present):
        raise ValueError("empty confusion matrix")
    recalls = np.diag(cm)[present] / row_sums[present]
    return float(np.mean(recalls))


def cohens_kappa(cm):
    cm = np.asarray(cm, dtype=float)
    total = cm.sum()
    if total == 0:
        raise ValueError("empty confusion matrix")
    p_o = np.trace(cm) / total
    p_e = float(np.sum(cm.sum(axis=1) * cm.sum(axis=0)) / total ** 2)
    if p_e >= 1.0:
        return 0.0
    return float((p_o - p_e) / (1.0 - p_e))


def micro_f1(cm):
    """Micro-averaged F1; equals overall accuracy for single-label multiclass."""
    cm = np.asarray(cm, dtype=float)
    total = cm.sum()
    if total == 0:
        raise ValueError("empty confusion matrix")
    tp = np.trace(cm)
    fp = total - tp  # every off-diagonal count is one FP and one FN
    fn = fp
    return float(2.0 * tp / (2.0 * tp + fp + fn))


ALL_CRITERIA = {
    "bac": balanced_accuracy,
    "kappa": cohens_kappa,
    "f1": micro_f1,
}
