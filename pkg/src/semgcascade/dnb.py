"""Dynamic naive Bayes classifier with per-channel contamination weighting.

The per-feature class-conditional densities are estimated once (Gaussian or
1-D Gaussian mixture per feature). At prediction time the per-channel log
likelihood sums are multiplied by the contamination vector r, so channels can
be down-weighted (soft) or eliminated (crisp r = 0) without any retraining.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .rng import philox_rng
from .validation import check_matrix, check_labels, check_fitted

LOG2PI = float(np.log(2.0 * np.pi))
DENSITY_FLOOR_LOG = float(np.log(1e-300))
VAR_FLOOR_SCALE = 1e-9
GMM_COMPONENT_GRID = (1, 3, 5, 7)
GMM_TOL = 1e-6
GMM_MAX_ITER = 200


def fit_priors(labels, n_classes=None):
    """Empirical class frequencies over labels 1..M."""
    y = check_labels(labels)
    m = n_classes or int(y.max())
    counts = np.bincount(y, minlength=m + 1)[1:]
    return counts / counts.sum()


def variance_floors(X):
    """Per-feature variance floor tied to the global feature spread."""
    return VAR_FLOOR_SCALE * (np.var(X, axis=0) + 1e-12)


@dataclass
class GaussianFeatureModel:
    means: np.ndarray  # (M, D)
    vars: np.ndarray   # (M, D), floored
    var_floor: np.ndarray

    def log_density(self, X):
        """Per-feature log densities, shape (n, M, D), floored before use."""
        diff = X[:, None, :] - self.means[None, :, :]
        logpdf = -0.5 * (LOG2PI + np.log(self.vars)[None] + diff ** 2 / self.vars[None])
        return np.maximum(logpdf, DENSITY_FLOOR_LOG)


def fit_gaussian(X, y, n_classes=None):
    X = check_matrix(X, "X")
    y = check_labels(y, X.shape[0])
    m = n_classes or int(y.max())
    floor = variance_floors(X)
    means = np.empty((m, X.shape[1]))
    variances = np.empty((m, X.shape[1]))
    for j in range(1, m + 1):
        rows = X[y == j]
        if rows.shape[0] < 2:
            raise ValueError(f"class {j} has fewer than 2 samples")
        means[j - 1] = rows.mean(axis=0)
        variances[j - 1] = np.maximum(rows.var(axis=0), floor)
    return GaussianFeatureModel(means=means, vars=variances, var_floor=floor)


def kmeans_pp_init(values, k, rng):
    """k-means++ seeding on a 1-D sample; k is capped at the distinct count."""
    values = np.asarray(values, dtype=float)
    if len(values) == 0:
        raise ValueError("empty input")
    distinct = np.unique(values)
    k = min(k, len(distinct))
    centers = [values[int(rng.integers(0, len(values)))]]
    while len(centers) < k:
        d2 = np.min((values[:, None] - np.array(centers)[None, :]) ** 2, axis=1)
        total = d2.sum()
        if total <= 0:
            break
        probs = d2 / total
        centers.append(values[int(rng.choice(len(values), p=probs))])
    return np.array(centers)


def fit_gmm_feature(values, k, rng, var_floor=1e-12):
    """EM fit of a 1-D K-component Gaussian mixture seeded by k-means++.

    Returns (weights, means, vars); k degrades to the distinct-value count.
    """
    x = np.asarray(values, dtype=float)
    centers = kmeans_pp_init(x, k, rng)
    k = len(centers)
    if k == 1:
        return (np.ones(1), np.array([x.mean()]),
                np.array([max(x.var(), var_floor)]))
    means = centers.astype(float)
    variances = np.full(k, max(x.var(), var_floor))
    weights = np.full(k, 1.0 / k)
    prev_ll = -np.inf
    for _ in range(GMM_MAX_ITER):
        log_comp = (np.log(np.maximum(weights, 1e-300))[None, :]
                    - 0.5 * (LOG2PI + np.log(variances)[None, :]
                             + (x[:, None] - means[None, :]) ** 2 / variances[None, :]))
        mx = log_comp.max(axis=1, keepdims=True)
        lse = mx[:, 0] + np.log(np.exp(log_comp - mx).sum(axis=1))
        ll = lse.sum()
        resp = np.exp(log_comp - lse[:, None])
        nk = resp.sum(axis=0)
        nk = np.maximum(nk, 1e-12)
        weights = nk / len(x)
        means = (resp * x[:, None]).sum(axis=0) / nk
        variances = (resp * (x[:, None] - means[None, :]) ** 2).sum(axis=0) / nk
        variances = np.maximum(variances, var_floor)
        if ll - prev_ll < GMM_TOL and np.isfinite(prev_ll):
            break
        prev_ll = ll
    weights = weights / weights.sum()
    return weights, means, variances


@dataclass
class GmmFeatureModel:
    """Per (class, feature) 1-D mixtures; ragged component counts allowed."""

    weights: list  # [M][D] -> array (K,)
    means: list
    vars: list
    var_floor: np.ndarray

    def log_density(self, X):
        n, d = X.shape
        m = len(self.weights)
        out = np.empty((n, m, d))
        for j in range(m):
            for i in range(d):
                w = self.weights[j][i]
                mu = self.means[j][i]
                var = self.vars[j][i]
                log_comp = (np.log(w)[None, :]
                            - 0.5 * (LOG2PI + np.log(var)[None, :]
                                     + (X[:, i:i + 1] - mu[None, :]) ** 2 / var[None, :]))
                mx = log_comp.max(axis=1)
                out[:, j, i] = mx + np.log(np.exp(log_comp - mx[:, None]).sum(axis=1))
        return np.maximum(out, DENSITY_FLOOR_LOG)


def fit_gmm(X, y, k, rng, n_classes=None):
    X = check_matrix(X, "X")
    y = check_labels(y, X.shape[0])
    m = n_classes or int(y.max())
    floor = variance_floors(X)
    weights, means, variances = [], [], []
    for j in range(1, m + 1):
        rows = X[y == j]
        if rows.shape[0] < 2:
            raise ValueError(f"class {j} has fewer than 2 samples")
        wj, mj, vj = [], [], []
        for i in range(X.shape[1]):
            kk = min(k, rows.shape[0])
            w, mu, var = fit_gmm_feature(rows[:, i], kk, rng, var_floor=floor[i])
            wj.append(w)
            mj.append(mu)
            vj.append(var)
        weights.append(wj)
        means.append(mj)
        variances.append(vj)
    return GmmFeatureModel(weights=weights, means=means, vars=variances,
                           var_floor=floor)


def weighted_log_support(log_priors, log_like, r, block_dim):
    """log d~_j = log p_j + sum_l r_l * sum_{i in channel l} log P(x_i | j).

    ``log_like`` has shape (n, M, D) with D = L * block_dim; ``r`` is (n, L).
    """
    n, m, d = log_like.shape
    r = np.asarray(r, dtype=float)
    n_channels = d // block_dim
    if r.shape != (n, n_channels):
        raise ValueError(
            f"contamination shape {r.shape} does not match (n={n}, L={n_channels})"
        )
    per_channel = log_like.reshape(n, m, n_channels, block_dim).sum(axis=3)
    return log_priors[None, :] + (per_channel * r[:, None, :]).sum(axis=2)


def softmax_supports(log_support):
    ls = np.asarray(log_support, dtype=float)
    bad = ~np.isfinite(ls).any(axis=1)
    if np.any(bad):
        warnings.warn("all log-supports are -inf; falling back to uniform",
                      RuntimeWarning)
        ls = ls.copy()
        ls[bad] = 0.0
    mx = ls.max(axis=1, keepdims=True)
    e = np.exp(ls - mx)
    return e / e.sum(axis=1, keepdims=True)


class DynamicNaiveBayes:
    """sklearn-style naive Bayes with contamination-weighted channels.

    ``density`` selects the per-feature estimator: "gaussian" or "gmm" (1-D
    mixtures per feature, global component count tuned over ``component_grid``
    by 4-fold CV balanced accuracy unless ``n_components`` is given).
    """

    def __init__(self, n_channels, density="gaussian", n_components=None,
                 component_grid=GMM_COMPONENT_GRID, random_state=0):
        self.n_channels = n_channels
        self.density = density
        self.n_components = n_components
        self.component_grid = component_grid
        self.random_state = random_state

    def get_params(self, deep=True):
        return {
            "n_channels": self.n_channels,
            "density": self.density,
            "n_components": self.n_components,
            "component_grid": self.component_grid,
            "random_state": self.random_state,
        }

    def set_params(self, **params):
        for k, v in params.items():
            if not hasattr(self, k):
                raise ValueError(f"unknown parameter {k}")
            setattr(self, k, v)
        return self

    def _rng(self, salt):
        return philox_rng(self.random_state, salt, 2)

    def fit(self, X, y):
        X = check_matrix(X, "X")
        y = check_labels(y, X.shape[0])
        if X.shape[1] % self.n_channels != 0:
            raise ValueError(
                f"{X.shape[1]} features do not divide into {self.n_channels} channels"
            )
        self.block_dim_ = X.shape[1] // self.n_channels
        self.classes_ = np.arange(1, int(y.max()) + 1)
        self.priors_ = fit_priors(y, len(self.classes_))
        self.log_priors_ = np.log(np.maximum(self.priors_, 1e-300))
        if self.density == "gaussian":
            self.model_ = fit_gaussian(X, y, len(self.classes_))
            self.n_components_ = 1
        elif self.density == "gmm":
            k = self.n_components or tune_gmm_components(
                X, y, self.n_channels, self.component_grid, self._rng(1)
            )
            self.model_ = fit_gmm(X, y, k, self._rng(2), len(self.classes_))
            self.n_components_ = k
        else:
            raise ValueError(f"unknown density {self.density!r}")
        return self

    def _full_r(self, X, r):
        if r is None:
            return np.ones((X.shape[0], self.n_channels))
        r = np.asarray(r, dtype=float)
        if r.ndim == 1:
            r = np.tile(r, (X.shape[0], 1))
        return r

    def log_support(self, X, r=None):
        check_fitted(self, "model_")
        X = check_matrix(X, "X")
        log_like = self.model_.log_density(X)
        return weighted_log_support(
            self.log_priors_, log_like, self._full_r(X, r), self.block_dim_
        )

    def supports(self, X, r=None):
        return softmax_supports(self.log_support(X, r))

    def predict(self, X, r=None):
        ls = self.log_support(X, r)
        return self.classes_[np.argmax(ls, axis=1)]

    predict_proba = supports


def tune_gmm_components(X, y, n_channels, grid=GMM_COMPONENT_GRID, rng=None,
                        cv_folds=4):
    """Global mixture size maximizing mean CV balanced accuracy of the plain
    (all-channels) classifier; ties go to the smaller size."""
    from .metrics import confusion_matrix, balanced_accuracy

    rng = rng or np.random.default_rng(0)
    y = check_labels(y, len(X))
    n = len(y)
    perm = rng.permutation(n)
    fold_of = np.empty(n, dtype=int)
    # stratified round-robin over the permuted order
    for c in np.unique(y):
        idx_c = perm[y[perm] == c]
        fold_of[idx_c] = np.arange(len(idx_c)) % cv_folds
    m = int(y.max())
    best_k, best_bac = None, -1.0
    for k in grid:
        bacs = []
        ok = True
        for f in range(cv_folds):
            tr = fold_of != f
            te = ~tr
            if len(np.unique(y[tr])) < m:
                ok = False
                break
            clf = DynamicNaiveBayes(n_channels, density="gmm", n_components=k)
            try:
                clf.fit(X[tr], y[tr])
            except ValueError:
                ok = False
                break
            pred = clf.predict(X[te])
            cm = confusion_matrix(y[te], pred, m)
            bacs.append(balanced_accuracy(cm))
        if not ok:
            continue
        mean_bac = float(np.mean(bacs))
        if mean_bac > best_bac + 1e-12:
            best_k, best_bac = k, mean_bac
    if best_k is None:
        raise ValueError("no feasible mixture size in the grid")
    return best_k
