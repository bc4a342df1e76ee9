"""Small input-validation helpers shared by the estimators."""

import numpy as np


def check_matrix(X, name="X", min_rows=1, min_cols=1):
    """Coerce to a 2-D float array and validate shape/finiteness."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {X.shape}")
    if X.shape[0] < min_rows:
        raise ValueError(f"{name} needs at least {min_rows} rows, got {X.shape[0]}")
    if X.shape[1] < min_cols:
        raise ValueError(f"{name} needs at least {min_cols} columns, got {X.shape[1]}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    return X


def check_vector(x, name="x", min_len=1):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {x.shape}")
    if len(x) < min_len:
        raise ValueError(f"{name} needs at least {min_len} elements, got {len(x)}")
    return x


def check_labels(y, n_rows=None):
    """Validate integer class labels in 1..M."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError("labels must be 1-D")
    if n_rows is not None and len(y) != n_rows:
        raise ValueError(f"label count {len(y)} does not match row count {n_rows}")
    if len(y) == 0:
        raise ValueError("labels are empty")
    y = y.astype(int)
    if np.any(y < 1):
        raise ValueError("class labels must be positive integers (1..M)")
    return y


def check_fitted(est, attr):
    if not hasattr(est, attr):
        raise RuntimeError(
            f"{type(est).__name__} is not fitted; call fit() first"
        )
