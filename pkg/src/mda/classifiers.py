"""1-nearest-neighbor classification and the KPCA / KFD baseline transforms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.spatial.distance import cdist

from . import kernel
from .data import MultiDomainDataset
from .eigsolver import DEFAULT_EPSILON, HyperParams, Projection, select_components
from .pipeline import FitError, fit_prepared, prepare, resolve_bandwidth

__all__ = [
    "NnModel",
    "BaselineModel",
    "nn1_predict",
    "accuracy",
    "kpca_fit",
    "kpca_transform",
    "kfd_fit",
    "kfd_transform",
    "baseline_train_features",
]


@dataclass(frozen=True, eq=False)
class NnModel:
    references: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        refs = np.atleast_2d(np.asarray(self.references, dtype=float))
        labels = np.asarray(self.labels).reshape(-1)
        if refs.shape[0] != labels.shape[0]:
            raise ValueError("reference and label counts differ")
        object.__setattr__(self, "references", refs)
        object.__setattr__(self, "labels", labels)


def nn1_predict(model: NnModel, queries) -> np.ndarray:
    """Label of the Euclidean-nearest reference; ties go to the lowest index."""
    if model.references.shape[0] == 0:
        raise ValueError("empty reference set")
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    if queries.shape[0] == 0:
        return model.labels[:0].copy()
    if queries.shape[1] != model.references.shape[1]:
        raise ValueError(
            f"query dimension {queries.shape[1]} != reference dimension {model.references.shape[1]}"
        )
    dist = cdist(queries, model.references, "sqeuclidean")
    return model.labels[np.argmin(dist, axis=1)]


def accuracy(predicted, truth) -> float:
    predicted = np.asarray(predicted).reshape(-1)
    truth = np.asarray(truth).reshape(-1)
    if predicted.shape != truth.shape:
        raise ValueError(f"length mismatch: {predicted.size} vs {truth.size}")
    if truth.size == 0:
        raise ValueError("accuracy of an empty label vector")
    return float(np.mean(predicted == truth))


@dataclass(frozen=True, eq=False)
class BaselineModel:
    kind: str
    train: MultiDomainDataset
    sigma: float
    K_raw: kernel.GramMatrix
    K_centered: kernel.GramMatrix
    projection: Projection

    @property
    def q(self) -> int:
        return self.projection.q


def _scaled(model):
    return model.projection.B / np.sqrt(model.projection.eigenvalues)[None, :]


def baseline_train_features(model: BaselineModel) -> np.ndarray:
    return model.K_centered.values @ _scaled(model)


def _transform(model: BaselineModel, data) -> np.ndarray:
    Kt = kernel.center_test(kernel.cross_gram(data, model.train, model.sigma), model.train.n)
    return Kt.values @ _scaled(model)


def kpca_fit(data: MultiDomainDataset, sigma="median", rule=0.96,
             rel_tol=DEFAULT_EPSILON) -> BaselineModel:
    """Kernel PCA on the centered Gram.

    Eigenvalues at or below ``rel_tol`` times the largest are dropped before
    the component rule is applied.
    """
    if data.n < 2:
        raise ValueError("KPCA needs at least two instances")
    sigma = resolve_bandwidth(sigma, data)
    K_raw = kernel.gram(data, sigma)
    Kc = kernel.center_train(K_raw)
    lam, V = linalg.eigh(Kc.values)
    order = np.argsort(lam, kind="stable")[::-1]
    lam, V = lam[order], V[:, order]
    if lam[0] <= 0:
        raise ValueError("centered Gram has no positive eigenvalue")
    keep = lam > rel_tol * lam[0]
    lam, V = lam[keep], V[:, keep]
    q = select_components(lam, rule)
    idx = np.argmax(np.abs(V), axis=0)
    V = V * np.sign(V[idx, np.arange(V.shape[1])])
    return BaselineModel("kpca", data, sigma, K_raw, Kc, Projection(V[:, :q], lam[:q]))


def kpca_transform(model: BaselineModel, data) -> np.ndarray:
    return _transform(model, data)


def kfd_fit(data: MultiDomainDataset, sigma="median", rule=0.96,
            epsilon=DEFAULT_EPSILON) -> BaselineModel:
    """Kernel Fisher discriminant as the single-domain case of the MDA solve.

    All instances are pooled into one domain; the numerator is the between-
    class matrix and the denominator within-class plus Gram plus ``eps I``.
    """
    if data.c < 2:
        raise FitError("scatter", f"KFD needs at least two classes, got {data.c}")
    prep = prepare(data.pooled(), sigma, need_G=False)
    hp = HyperParams(alpha=1.0, beta=0.0, gamma=0.0, epsilon=epsilon, components=rule)
    m = fit_prepared(prep, hp)
    return BaselineModel("kfd", data, m.sigma, m.K_raw, m.K_centered, m.projection)


def kfd_transform(model: BaselineModel, data) -> np.ndarray:
    return _transform(model, data)
