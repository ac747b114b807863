"""Small input-validation helpers shared by the public API."""

import numbers

import numpy as np
from sklearn.utils import check_array


def check_positive(value, name, strict=True):
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise TypeError(f"{name} must be a real number, got {type(value).__name__}")
    value = float(value)
    if not np.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")
    if strict and value <= 0:
        raise ValueError(f"{name} must be > 0, got {value}")
    if not strict and value < 0:
        raise ValueError(f"{name} must be >= 0, got {value}")
    return value


def check_capital(X, name="X", min_nodes=1):
    """Return capital samples as a 1-d float array of strictly positive values.

    Accepts a sequence, a column vector ``(n, 1)`` or a plain 1-d array so
    the estimators compose with the usual ``(n_samples, n_features)`` layout.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 0:
        X = X.reshape(1)
    if X.ndim == 2:
        X = check_array(X, ensure_min_samples=min_nodes)
        if X.shape[1] != 1:
            raise ValueError(f"{name} must have a single feature (capital), got {X.shape[1]}")
        X = X[:, 0]
    elif X.ndim == 1:
        X = check_array(X.reshape(-1, 1), ensure_min_samples=min_nodes)[:, 0]
    else:
        raise ValueError(f"{name} must be 1-d or a single column, got shape {X.shape}")
    if np.any(X <= 0):
        raise ValueError(f"{name} must be strictly positive")
    return X


def check_grid(nodes, min_nodes=2):
    nodes = check_capital(nodes, "nodes", min_nodes=min_nodes)
    if nodes.size < min_nodes:
        raise ValueError(f"grid needs at least {min_nodes} nodes, got {nodes.size}")
    if np.any(np.diff(nodes) <= 0):
        raise ValueError("grid nodes must be strictly increasing")
    return nodes
