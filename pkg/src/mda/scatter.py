"""Empirical mean-embedding coefficients and the four measure matrices.

Every RKHS element used here is a finite combination of training feature maps,
``Phi^T v`` for a coefficient vector ``v`` of length n. An outer product of two
such elements sandwiched by ``Phi`` becomes ``K v v^T K``; each measure matrix
is therefore ``K M K`` for a small sum of outer products ``M`` built from the
coefficient vectors below.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .data import MultiDomainDataset
from .kernel import GramMatrix

__all__ = [
    "EmbeddingCoefficients",
    "ScatterSet",
    "build_coefficients",
    "build_G",
    "build_F",
    "build_P",
    "build_Q",
    "build_scatter",
    "measure_report",
]


@dataclass(frozen=True, eq=False)
class EmbeddingCoefficients:
    """Coefficient vectors of the empirical embeddings.

    Attributes
    ----------
    a : array, shape (m, c, n)
        ``a[s, j]`` holds ``1/n^s_j`` on instances of class j in domain s.
        All-zero for empty cells.
    w : array, shape (c, n)
        Class mean representations ``w[j] = sum_s p_s_given_j[s, j] a[s, j]``.
    w_bar : array, shape (n,)
        Overall mean ``sum_j (n_j / n) w[j]``.
    p_s_given_j : array, shape (m, c)
        Domain posterior per class under equal domain sampling probability.
    class_counts : int array, shape (c,)
    labels : int array, shape (n,)
    """

    a: np.ndarray
    w: np.ndarray
    w_bar: np.ndarray
    p_s_given_j: np.ndarray
    class_counts: np.ndarray
    labels: np.ndarray

    @property
    def m(self) -> int:
        return self.a.shape[0]

    @property
    def c(self) -> int:
        return self.a.shape[1]

    @property
    def n(self) -> int:
        return self.a.shape[2]

    def realized(self, s: int, j: int) -> bool:
        return bool(self.a[s, j].any())


@dataclass(frozen=True, eq=False)
class ScatterSet:
    G: np.ndarray
    F: np.ndarray
    P: np.ndarray
    Q: np.ndarray

    def as_dict(self):
        return {"G": self.G, "F": self.F, "P": self.P, "Q": self.Q}


def build_coefficients(data: MultiDomainDataset) -> EmbeddingCoefficients:
    n, m, c = data.n, data.m, data.c
    counts = data.counts.astype(float)
    class_counts = data.counts.sum(axis=0)
    missing = np.flatnonzero(class_counts == 0)
    if missing.size:
        names = [data.label_names[j] for j in missing]
        raise ValueError(f"class(es) {names} absent from every domain")

    a = np.zeros((m, c, n))
    for s in range(m):
        for j in range(c):
            if counts[s, j] > 0:
                mask = (data.domains == s) & (data.labels == j)
                a[s, j, mask] = 1.0 / counts[s, j]

    domain_sizes = counts.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        within = np.where(domain_sizes > 0, counts / domain_sizes, 0.0)
    p = within / within.sum(axis=0, keepdims=True)

    w = np.einsum("sj,sjn->jn", p, a)
    w_bar = (class_counts / n) @ w
    return EmbeddingCoefficients(a, w, w_bar, p, class_counts, data.labels.copy())


def _sandwich(K: GramMatrix | np.ndarray, M: np.ndarray) -> np.ndarray:
    Kv = getattr(K, "values", K)
    if Kv.shape != M.shape:
        raise ValueError(f"Gram shape {Kv.shape} does not match coefficient space {M.shape}")
    out = Kv @ M @ Kv
    return (out + out.T) / 2.0


def _outer_sum(diffs: np.ndarray, weights=None) -> np.ndarray:
    """``sum_k weights[k] * diffs[k] diffs[k]^T`` for diffs of shape (k, n)."""
    if weights is None:
        return diffs.T @ diffs
    return (diffs * np.asarray(weights)[:, None]).T @ diffs


def domain_pairs(coeff: EmbeddingCoefficients) -> list[tuple[int, int, int]]:
    """Realized ``(j, s, s')`` triples, ``s < s'``, in enumeration order."""
    return [
        (j, s, t)
        for j in range(coeff.c)
        for s, t in combinations(range(coeff.m), 2)
        if coeff.realized(s, j) and coeff.realized(t, j)
    ]


def build_G(K, coeff: EmbeddingCoefficients) -> np.ndarray:
    """Average domain discrepancy matrix.

    Averages over realized ``(class, domain pair)`` combinations; pairs with
    an empty cell are skipped and do not count toward the divisor.
    """
    if coeff.m < 2:
        raise ValueError("average domain discrepancy needs at least two domains")
    pairs = domain_pairs(coeff)
    if not pairs:
        return np.zeros((coeff.n, coeff.n))
    diffs = np.array([coeff.a[s, j] - coeff.a[t, j] for j, s, t in pairs])
    return _sandwich(K, _outer_sum(diffs) / len(pairs))


def build_F(K, coeff: EmbeddingCoefficients) -> np.ndarray:
    """Average class discrepancy matrix over all class pairs."""
    if coeff.c < 2:
        raise ValueError("average class discrepancy needs at least two classes")
    pairs = list(combinations(range(coeff.c), 2))
    diffs = np.array([coeff.w[j] - coeff.w[k] for j, k in pairs])
    return _sandwich(K, _outer_sum(diffs) / len(pairs))


def build_P(K, coeff: EmbeddingCoefficients) -> np.ndarray:
    diffs = coeff.w - coeff.w_bar[None, :]
    return _sandwich(K, _outer_sum(diffs, coeff.class_counts) / coeff.n)


def build_Q(K, coeff: EmbeddingCoefficients) -> np.ndarray:
    # row i is e_i - w[label_i]
    R = np.eye(coeff.n) - coeff.w[coeff.labels]
    return _sandwich(K, (R.T @ R) / coeff.n)


def build_scatter(K, coeff: EmbeddingCoefficients, need_G=True) -> ScatterSet:
    n = coeff.n
    G = build_G(K, coeff) if need_G else np.zeros((n, n))
    return ScatterSet(G, build_F(K, coeff), build_P(K, coeff), build_Q(K, coeff))


def measure_report(scatter: ScatterSet, B, tol=1e-8) -> dict:
    """Trace forms ``tr(B^T M B)`` for the four measure matrices.

    Values in ``[-tol * scale, 0)`` are reported as 0; anything more negative
    indicates a broken matrix and raises.
    """
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    out = {}
    for key, name in (("G", "domain_discrepancy"), ("F", "class_discrepancy"),
                      ("P", "between_scatter"), ("Q", "within_scatter")):
        M = getattr(scatter, key)
        if B.shape[0] != M.shape[0]:
            raise ValueError(f"B has {B.shape[0]} rows, matrices are {M.shape[0]} x {M.shape[0]}")
        v = float(np.einsum("ik,ij,jk->", B, M, B))
        scale = max(1.0, float(np.einsum("ik,ik->", B, B)) * float(np.abs(M).max(initial=0.0)))
        if v < 0:
            if v < -tol * scale:
                raise ValueError(f"negative trace form for {key}: {v}")
            v = 0.0
        out[name] = v
    return out
