"""Gaussian kernel, median-distance bandwidth and Gram matrix centering.

The kernel is ``k(x, y) = exp(-||x - y||^2 / (2 * sigma))`` where ``sigma`` is
measured in squared-distance units, so it can be set directly as a multiple of
the median squared pairwise distance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform

__all__ = [
    "GramMatrix",
    "CrossGram",
    "check_bandwidth",
    "rbf",
    "median_heuristic",
    "gram",
    "cross_gram",
    "center_train",
    "center_test",
]


@dataclass(frozen=True, eq=False)
class GramMatrix:
    values: np.ndarray
    centered: bool = False

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class CrossGram:
    """Kernel values between target rows and training columns."""

    values: np.ndarray
    centered: bool = False


def check_bandwidth(sigma) -> float:
    sigma = float(sigma)
    if not np.isfinite(sigma) or sigma <= 0:
        raise ValueError(f"bandwidth must be positive and finite, got {sigma}")
    return sigma


def _features(data):
    return np.asarray(getattr(data, "X", data), dtype=float)


def rbf(x, x2, sigma) -> float:
    x = np.asarray(x, dtype=float).ravel()
    x2 = np.asarray(x2, dtype=float).ravel()
    if x.shape != x2.shape:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {x2.shape[0]}")
    sigma = check_bandwidth(sigma)
    diff = x - x2
    return float(np.exp(-np.dot(diff, diff) / (2.0 * sigma)))


def median_heuristic(data) -> float:
    """Median squared Euclidean distance over unordered pairs ``i < j``.

    With an even number of pairs the lower of the two middle values is
    returned, so the result is always a realized distance.
    """
    X = _features(data)
    if X.shape[0] < 2:
        raise ValueError("median heuristic needs at least two instances")
    d2 = np.sort(pdist(X, "sqeuclidean"))
    return float(d2[(d2.size - 1) // 2])


def gram(data, sigma) -> GramMatrix:
    X = _features(data)
    sigma = check_bandwidth(sigma)
    if X.shape[0] == 0:
        raise ValueError("Gram matrix of an empty dataset")
    K = squareform(np.exp(-pdist(X, "sqeuclidean") / (2.0 * sigma)))
    np.fill_diagonal(K, 1.0)
    return GramMatrix(K, centered=False)


def cross_gram(target, train, sigma) -> CrossGram:
    Xt, X = _features(target), _features(train)
    sigma = check_bandwidth(sigma)
    if Xt.shape[0] and Xt.shape[1] != X.shape[1]:
        raise ValueError(f"dimension mismatch: target d={Xt.shape[1]}, train d={X.shape[1]}")
    if Xt.shape[0] == 0:
        return CrossGram(np.zeros((0, X.shape[0])))
    return CrossGram(np.exp(-cdist(Xt, X, "sqeuclidean") / (2.0 * sigma)))


def center_train(K: GramMatrix) -> GramMatrix:
    """``K - 1K - K1 + 1K1`` with ``1`` the n x n matrix of entries ``1/n``."""
    if K.centered:
        raise ValueError("Gram matrix is already centered")
    Kv = K.values
    if Kv.ndim != 2 or Kv.shape[0] != Kv.shape[1]:
        raise ValueError("center_train expects a square matrix")
    col = Kv.mean(axis=0, keepdims=True)
    row = Kv.mean(axis=1, keepdims=True)
    Kc = Kv - col - row + Kv.mean()
    return GramMatrix((Kc + Kc.T) / 2.0, centered=True)


def center_test(Kt: CrossGram, n_train: int | None = None) -> CrossGram:
    """``Kt - 1_t Kt - Kt 1_n + 1_t Kt 1_n``.

    ``1_t`` averages over target rows and ``1_n`` over training columns, so
    each target set is centered with its own statistics. A target set equal
    to the training set therefore maps onto the centered training Gram.
    """
    if Kt.centered:
        raise ValueError("cross Gram matrix is already centered")
    V = Kt.values
    if n_train is not None and V.shape[1] != n_train:
        raise ValueError(f"cross Gram has {V.shape[1]} columns, training set has {n_train}")
    if V.shape[0] == 0:
        return CrossGram(V.copy(), centered=True)
    col = V.mean(axis=0, keepdims=True)
    row = V.mean(axis=1, keepdims=True)
    return CrossGram(V - col - row + V.mean(), centered=True)
