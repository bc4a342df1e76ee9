"""Reference methods: plain naive Bayes on all channels and an
error-correcting output codes ensemble over naive Bayes base learners."""

import math
import warnings

import numpy as np

from .dnb import DynamicNaiveBayes
from .rng import philox_rng
from .metrics import confusion_matrix, balanced_accuracy
from .validation import check_matrix, check_labels, check_fitted

CODE_SIZE_GRID = (2, 3, 4, 5, 6)


def predict_plain(model, X):
    """Method B: the dynamic classifier with every channel treated as clean."""
    return model.predict(X, r=None)


def build_codebook(n_classes, code_size, rng, max_attempts=1000):
    """Random dense binary codebook, resampled until rows are distinct and no
    column is constant."""
    if n_classes < 2:
        raise ValueError("need at least 2 classes")
    length = math.ceil(code_size * n_classes)
    for _ in range(max_attempts):
        book = rng.integers(0, 2, size=(n_classes, length))
        rows_ok = len({tuple(row) for row in book}) == n_classes
        cols_ok = np.all(book.min(axis=0) != book.max(axis=0))
        if rows_ok and cols_ok:
            return book
    raise ValueError(
        f"no valid {n_classes}x{length} codebook found in {max_attempts} attempts"
    )


class EcocNaiveBayes:
    """ECOC decomposition with one Gaussian-NB binary learner per codebook
    column; decoding by minimum Euclidean distance between the per-column
    positive-class probabilities and the codebook rows.

    ``code_size=None`` tunes over ``code_size_grid`` with 4-fold CV balanced
    accuracy (ties to the smaller size).
    """

    def __init__(self, code_size=None, code_size_grid=CODE_SIZE_GRID,
                 density="gaussian", n_components=None, random_state=0):
        self.code_size = code_size
        self.code_size_grid = code_size_grid
        self.density = density
        self.n_components = n_components
        self.random_state = random_state

    def get_params(self, deep=True):
        return {
            "code_size": self.code_size,
            "code_size_grid": self.code_size_grid,
            "density": self.density,
            "n_components": self.n_components,
            "random_state": self.random_state,
        }

    def set_params(self, **params):
        for k, v in params.items():
            if not hasattr(self, k):
                raise ValueError(f"unknown parameter {k}")
            setattr(self, k, v)
        return self

    def _rng(self, salt):
        return philox_rng(self.random_state, salt, 3)

    def _fit_with_size(self, X, y, code_size, rng):
        m = int(y.max())
        book = build_codebook(m, code_size, rng)
        learners = []
        kept = []
        for col in range(book.shape[1]):
            relabel = book[y - 1, col] + 1  # binary classes 1/2
            if len(np.unique(relabel)) < 2:
                warnings.warn(f"codebook column {col} collapsed to one class; "
                              "dropped", RuntimeWarning)
                continue
            clf = DynamicNaiveBayes(
                n_channels=1, density=self.density,
                n_components=self.n_components,
                random_state=self.random_state,
            )
            clf.fit(X, relabel)
            learners.append(clf)
            kept.append(col)
        if not learners:
            raise ValueError("all codebook columns were dropped")
        return book[:, kept], learners

    def fit(self, X, y):
        X = check_matrix(X, "X")
        y = check_labels(y, X.shape[0])
        self.classes_ = np.arange(1, int(y.max()) + 1)
        if self.code_size is not None:
            size = self.code_size
        elif len(self.code_size_grid) == 1:
            size = self.code_size_grid[0]
        else:
            size = self._tune_code_size(X, y)
        self.code_size_ = size
        self.codebook_, self.learners_ = self._fit_with_size(
            X, y, size, self._rng(0)
        )
        return self

    def _tune_code_size(self, X, y, cv_folds=4):
        rng = self._rng(99)
        n = len(y)
        perm = rng.permutation(n)
        fold_of = np.empty(n, dtype=int)
        for c in np.unique(y):
            idx_c = perm[y[perm] == c]
            fold_of[idx_c] = np.arange(len(idx_c)) % cv_folds
        m = int(y.max())
        best_size, best_bac = None, -1.0
        for size in self.code_size_grid:
            bacs = []
            ok = True
            for f in range(cv_folds):
                tr = fold_of != f
                te = ~tr
                if len(np.unique(y[tr])) < m:
                    ok = False
                    break
                try:
                    book, learners = self._fit_with_size(
                        X[tr], y[tr], size, self._rng(1000 + size)
                    )
                except ValueError:
                    ok = False
                    break
                pred = _decode(book, learners, X[te])
                bacs.append(balanced_accuracy(
                    confusion_matrix(y[te], pred, m)
                ))
            if not ok:
                continue
            mean_bac = float(np.mean(bacs))
            if mean_bac > best_bac + 1e-12:
                best_size, best_bac = size, mean_bac
        if best_size is None:
            raise ValueError("no feasible code_size in the grid")
        return best_size

    def column_probabilities(self, X):
        check_fitted(self, "learners_")
        X = check_matrix(X, "X")
        return np.column_stack([
            clf.supports(X)[:, 1] for clf in self.learners_
        ])

    def predict(self, X):
        check_fitted(self, "learners_")
        return _decode(self.codebook_, self.learners_, np.asarray(X, dtype=float))


def _decode(codebook, learners, X):
    probs = np.column_stack([clf.supports(X)[:, 1] for clf in learners])
    dists = np.linalg.norm(
        probs[:, None, :] - codebook[None, :, :].astype(float), axis=2
    )
    return np.argmin(dists, axis=1) + 1  # ties -> smallest class index
