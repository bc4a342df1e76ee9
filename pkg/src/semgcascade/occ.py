"""Per-channel one-class SVM detectors with optional sigmoid calibration.

The ensemble flags contaminated channels: each detector is trained only on
clean (target-class) feature blocks of its channel and scores new blocks with
an RBF one-class SVM. Crisp mode thresholds the decision function at zero;
soft mode maps scores through a fitted logistic sigmoid.
"""

import math
from dataclasses import dataclass

import numpy as np

from .rng import philox_rng
from .validation import check_matrix, check_fitted

SMO_TOL = 1e-4
SMO_MAX_ITER = 1_000_000
DEFAULT_NU_GRID = tuple(round(0.1 * k, 1) for k in range(1, 11))


def rbf_kernel(A, B, gamma):
    a2 = np.sum(A ** 2, axis=1)[:, None]
    b2 = np.sum(B ** 2, axis=1)[None, :]
    d2 = np.maximum(a2 + b2 - 2.0 * A @ B.T, 0.0)
    return np.exp(-gamma * d2)


def default_gamma(X):
    """Scale heuristic: 1 / (d * var of all entries), guarding degenerate data."""
    X = check_matrix(X, "X")
    d = X.shape[1]
    v = float(np.var(X))
    if v < 1e-12:
        return 1.0 / d
    return 1.0 / (d * v)


@dataclass
class OcsvmModel:
    support_vectors: np.ndarray
    alphas: np.ndarray  # sum to 1, 0 <= alpha_i <= 1/(nu*n_train)
    rho: float
    gamma: float
    nu: float

    def decision_function(self, X):
        X = check_matrix(np.atleast_2d(X), "X")
        if X.shape[1] != self.support_vectors.shape[1]:
            raise ValueError(
                f"feature dimension {X.shape[1]} does not match model "
                f"dimension {self.support_vectors.shape[1]}"
            )
        K = rbf_kernel(X, self.support_vectors, self.gamma)
        return K @ self.alphas - self.rho


def train_ocsvm(X, nu, gamma, tol=SMO_TOL, max_iter=SMO_MAX_ITER):
    """Solve the one-class dual (min 1/2 a'Qa, 0 <= a_i <= 1/(nu n), sum a = 1)
    by maximal-violating-pair SMO with a precomputed kernel matrix."""
    X = check_matrix(X, "X")
    n = X.shape[0]
    if not (0.0 < nu <= 1.0):
        raise ValueError(f"nu must be in (0, 1], got {nu}")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if nu * n < 1.0:
        raise ValueError(f"infeasible problem: nu*n = {nu * n:.3f} < 1")

    C = 1.0 / (nu * n)
    Q = rbf_kernel(X, X, gamma)

    # Feasible start: fill the box from the front.
    alpha = np.zeros(n)
    full = int(math.floor(nu * n))
    alpha[: min(full, n)] = C
    if full < n:
        alpha[full] = 1.0 - C * full
    grad = Q @ alpha

    eps = 1e-12
    for _ in range(max_iter):
        up = alpha < C - eps
        low = alpha > eps
        if not (np.any(up) and np.any(low)):
            break
        i = int(np.flatnonzero(up)[np.argmin(grad[up])])
        j = int(np.flatnonzero(low)[np.argmax(grad[low])])
        if grad[j] - grad[i] < tol:
            break
        quad = Q[i, i] + Q[j, j] - 2.0 * Q[i, j]
        if quad <= 0:
            quad = 1e-12
        delta = (grad[j] - grad[i]) / quad
        delta = min(delta, C - alpha[i], alpha[j])
        alpha[i] += delta
        alpha[j] -= delta
        grad += delta * (Q[:, i] - Q[:, j])

    sv = alpha > eps
    free = sv & (alpha < C - eps)
    if np.any(free):
        rho = float(np.mean(grad[free]))
    else:
        rho = float(np.mean(grad[sv]))
    return OcsvmModel(
        support_vectors=X[sv].copy(),
        alphas=alpha[sv].copy(),
        rho=rho,
        gamma=gamma,
        nu=nu,
    )


def generate_uniform_outliers(bounds, count, rng):
    """I.i.d. uniform points within per-dimension (lo, hi) bounds."""
    lo = np.array([b[0] for b in bounds], dtype=float)
    hi = np.array([b[1] for b in bounds], dtype=float)
    if np.any(lo > hi):
        raise ValueError("invalid bounds: lo > hi")
    return lo + (hi - lo) * rng.random((count, len(bounds)))


def outlier_bounds(X, margin=0.1):
    """Per-feature min/max of X expanded by a relative margin."""
    lo = X.min(axis=0)
    hi = X.max(axis=0)
    span = hi - lo
    return list(zip(lo - margin * span, hi + margin * span))


def _binary_bac(target_scores, outlier_scores):
    tpr = np.mean(target_scores >= 0.0)
    tnr = np.mean(outlier_scores < 0.0)
    return 0.5 * (tpr + tnr)


def tune_nu(X, nu_grid=DEFAULT_NU_GRID, rng=None, gamma=None, cv_folds=4):
    """Pick nu by k-fold CV where each validation fold is augmented with
    uniform artificial outliers, scored by balanced accuracy.

    Returns ``(best_nu, model, calibration_scores, calibration_labels)``;
    the calibration pairs are the pooled out-of-fold scores of the winning nu
    (targets labelled 1, artificial outliers 0) and the model is retrained on
    all of X.
    """
    X = check_matrix(X, "X")
    rng = rng or np.random.default_rng(0)
    n = X.shape[0]
    if n < 2 * cv_folds:
        raise ValueError(f"need at least {2 * cv_folds} rows to tune nu, got {n}")
    if gamma is None:
        gamma = default_gamma(X)

    perm = rng.permutation(n)
    fold_of = np.empty(n, dtype=int)
    fold_of[perm] = np.arange(n) % cv_folds

    # Per fold: precompute training kernel reuse is internal to train_ocsvm;
    # outliers are drawn once per fold so every nu sees the same validation set.
    folds = []
    for f in range(cv_folds):
        val = np.flatnonzero(fold_of == f)
        tr = np.flatnonzero(fold_of != f)
        bounds = outlier_bounds(X[tr])
        outliers = generate_uniform_outliers(bounds, len(val), rng)
        folds.append((tr, val, outliers))

    best_nu, best_bac = None, -1.0
    best_scores, best_labels = None, None
    for nu in nu_grid:
        bacs = []
        scores, labels = [], []
        feasible = True
        for tr, val, outliers in folds:
            if nu * len(tr) < 1.0:
                feasible = False
                break
            model = train_ocsvm(X[tr], nu, gamma)
            s_t = model.decision_function(X[val])
            s_o = model.decision_function(outliers)
            bacs.append(_binary_bac(s_t, s_o))
            scores.extend(s_t)
            scores.extend(s_o)
            labels.extend([1] * len(s_t))
            labels.extend([0] * len(s_o))
        if not feasible:
            continue
        mean_bac = float(np.mean(bacs))
        if mean_bac > best_bac + 1e-12:  # ties keep the smaller nu seen first
            best_nu, best_bac = nu, mean_bac
            best_scores = np.array(scores)
            best_labels = np.array(labels)
    if best_nu is None:
        raise ValueError("no feasible nu in the grid")
    final = train_ocsvm(X, best_nu, gamma)
    return best_nu, final, best_scores, best_labels


@dataclass
class Calibrator:
    """Logistic sigmoid p = 1 / (1 + exp(-(a*s + b))) on raw decision scores."""

    a: float
    b: float

    def __call__(self, scores):
        z = self.a * np.asarray(scores, dtype=float) + self.b
        return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


def fit_calibrator(scores, labels, max_iter=100, tol=1e-10, smooth=True):
    """Newton-optimized cross-entropy fit of a two-parameter sigmoid.

    With ``smooth`` the binary targets are shrunk to (n+1)/(n+2) and 1/(n+2)
    per class, which keeps the slope finite on separable score sets.
    """
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=float)
    if len(np.unique(y)) < 2:
        raise ValueError("calibration needs both classes present")
    if smooth:
        n1 = float(np.sum(y == 1))
        n0 = float(np.sum(y == 0))
        y = np.where(y == 1, (n1 + 1.0) / (n1 + 2.0), 1.0 / (n0 + 2.0))
    a, b = 1.0, 0.0
    prev_loss = np.inf
    for _ in range(max_iter):
        z = np.clip(a * s + b, -500, 500)
        p = 1.0 / (1.0 + np.exp(-z))
        g_a = np.sum((p - y) * s)
        g_b = np.sum(p - y)
        w = np.maximum(p * (1.0 - p), 1e-12)
        h_aa = np.sum(w * s * s) + 1e-12
        h_ab = np.sum(w * s)
        h_bb = np.sum(w) + 1e-12
        det = h_aa * h_bb - h_ab * h_ab
        if det <= 0:
            break
        da = (h_bb * g_a - h_ab * g_b) / det
        db = (h_aa * g_b - h_ab * g_a) / det
        # Backtracking keeps the loss from diverging on separable data.
        step = 1.0
        loss0 = -np.sum(y * np.log(np.maximum(p, 1e-300))
                        + (1 - y) * np.log(np.maximum(1 - p, 1e-300)))
        while step > 1e-10:
            a_n, b_n = a - step * da, b - step * db
            z_n = np.clip(a_n * s + b_n, -500, 500)
            p_n = 1.0 / (1.0 + np.exp(-z_n))
            loss = -np.sum(y * np.log(np.maximum(p_n, 1e-300))
                           + (1 - y) * np.log(np.maximum(1 - p_n, 1e-300)))
            if loss <= loss0:
                break
            step *= 0.5
        a, b = a - step * da, b - step * db
        if abs(prev_loss - loss) < tol:
            break
        prev_loss = loss
    return Calibrator(a=float(a), b=float(b))


class OneClassChannelEnsemble:
    """sklearn-style ensemble of per-channel one-class SVM detectors.

    ``fit`` expects the full feature matrix of clean windows, organised as L
    consecutive blocks of ``block_dim`` columns. ``predict`` returns the
    contamination vector r per row: crisp {0, 1} or soft [0, 1], where 1
    means clean.
    """

    def __init__(self, n_channels, block_dim, mode="crisp",
                 nu_grid=DEFAULT_NU_GRID, random_state=0):
        self.n_channels = n_channels
        self.block_dim = block_dim
        self.mode = mode
        self.nu_grid = nu_grid
        self.random_state = random_state

    def get_params(self, deep=True):
        return {
            "n_channels": self.n_channels,
            "block_dim": self.block_dim,
            "mode": self.mode,
            "nu_grid": self.nu_grid,
            "random_state": self.random_state,
        }

    def set_params(self, **params):
        for k, v in params.items():
            if not hasattr(self, k):
                raise ValueError(f"unknown parameter {k}")
            setattr(self, k, v)
        return self

    def _block(self, X, l):
        return X[:, l * self.block_dim:(l + 1) * self.block_dim]

    def fit(self, X, y=None):
        if self.mode not in ("crisp", "soft"):
            raise ValueError(f"mode must be 'crisp' or 'soft', got {self.mode!r}")
        X = check_matrix(X, "X", min_cols=self.n_channels * self.block_dim)
        if X.shape[1] != self.n_channels * self.block_dim:
            raise ValueError(
                f"expected {self.n_channels * self.block_dim} columns, "
                f"got {X.shape[1]}"
            )
        self.detectors_ = []
        self.calibrators_ = []
        self.nus_ = []
        for l in range(self.n_channels):
            rng = philox_rng(self.random_state, l, 1)
            nu, model, scores, labels = tune_nu(
                self._block(X, l), self.nu_grid, rng
            )
            self.detectors_.append(model)
            self.calibrators_.append(fit_calibrator(scores, labels))
            self.nus_.append(nu)
        return self

    def decision_function(self, X):
        check_fitted(self, "detectors_")
        X = check_matrix(X, "X")
        return np.column_stack([
            det.decision_function(self._block(X, l))
            for l, det in enumerate(self.detectors_)
        ])

    def predict(self, X):
        scores = self.decision_function(X)
        if self.mode == "crisp":
            return (scores >= 0.0).astype(float)
        return np.column_stack([
            cal(scores[:, l]) for l, cal in enumerate(self.calibrators_)
        ])
