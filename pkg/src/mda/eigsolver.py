"""Regularized generalized eigenproblem ``A B = D B Gamma``.

``A = beta F + (1 - beta) P`` rewards class separation, ``D = gamma G + alpha Q
+ K + eps I`` penalizes domain discrepancy, within-class spread and RKHS norm.
"""

from __future__ import annotations

import numbers
from dataclasses import asdict, dataclass

import numpy as np
from scipy import linalg

from .scatter import ScatterSet

__all__ = [
    "HyperParams",
    "Projection",
    "SolverError",
    "assemble",
    "solve",
    "solve_full",
    "select_components",
    "objective_value",
]

DEFAULT_EPSILON = 1e-5


class SolverError(ValueError):
    pass


@dataclass(frozen=True)
class HyperParams:
    """Trade-off weights and the component rule.

    ``components`` is either an ``int`` (keep that many leading components)
    or a ``float`` in ``(0, 1]`` (keep the fewest leading components whose
    eigenvalues reach that fraction of the positive spectrum's sum).
    """

    alpha: float = 1.0
    beta: float = 0.5
    gamma: float = 1.0
    epsilon: float = DEFAULT_EPSILON
    components: int | float = 0.96

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if not 0 <= self.beta <= 1:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        check_rule(self.components)

    def to_dict(self) -> dict:
        return asdict(self)


def check_rule(rule):
    if isinstance(rule, bool):
        raise ValueError("component rule must be an int or a float")
    if isinstance(rule, numbers.Integral):
        if rule < 1:
            raise ValueError(f"component count must be >= 1, got {rule}")
    elif isinstance(rule, numbers.Real):
        if not 0 < rule <= 1:
            raise ValueError(f"energy fraction must lie in (0, 1], got {rule}")
    else:
        raise ValueError(f"unsupported component rule {rule!r}")
    return rule


@dataclass(frozen=True, eq=False)
class Projection:
    """Generalized eigenvectors (columns of ``B``) and their eigenvalues.

    Columns are sorted by descending eigenvalue and normalized so that
    ``B^T D B = I``.
    """

    B: np.ndarray
    eigenvalues: np.ndarray

    @property
    def q(self) -> int:
        return self.B.shape[1]

    def truncate(self, q: int) -> "Projection":
        return Projection(self.B[:, :q], self.eigenvalues[:q])


def _sym(M):
    return (M + M.T) / 2.0


def assemble(scatter: ScatterSet, K_centered, hp: HyperParams):
    Kc = getattr(K_centered, "values", K_centered)
    n = Kc.shape[0]
    if scatter.F.shape != (n, n):
        raise ValueError("scatter matrices and Gram matrix differ in size")
    A = hp.beta * scatter.F + (1.0 - hp.beta) * scatter.P
    D = hp.gamma * scatter.G + hp.alpha * scatter.Q + Kc + hp.epsilon * np.eye(n)
    return _sym(A), _sym(D)


def _fix_signs(B):
    idx = np.argmax(np.abs(B), axis=0)
    signs = np.sign(B[idx, np.arange(B.shape[1])])
    signs[signs == 0] = 1.0
    return B * signs


def solve_full(A, D, rel_tol=DEFAULT_EPSILON) -> Projection:
    """All generalized eigenpairs with eigenvalue above ``rel_tol * lambda_max``.

    Uses the Cholesky reduction ``D = L L^T``: the symmetric matrix
    ``L^-1 A L^-T`` is diagonalized and eigenvectors are mapped back with
    ``B = L^-T V``, which makes ``B^T D B = I``.
    """
    A = np.asarray(A, dtype=float)
    D = np.asarray(D, dtype=float)
    if A.shape != D.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"A and D must be square and equal in shape, got {A.shape}, {D.shape}")
    try:
        L = linalg.cholesky(D, lower=True)
    except linalg.LinAlgError as exc:
        raise SolverError(
            "denominator matrix is not positive definite "
            f"(min diagonal {np.min(np.diag(D)):.3e}): {exc}"
        ) from None
    C = linalg.solve_triangular(L, A, lower=True)
    C = linalg.solve_triangular(L, C.T, lower=True)
    lam, V = linalg.eigh(_sym(C))
    order = np.argsort(lam, kind="stable")[::-1]
    lam, V = lam[order], V[:, order]
    if lam.size == 0 or lam[0] <= 0:
        raise SolverError("no positive eigenvalue: no discriminative direction")
    keep = lam > rel_tol * lam[0]
    B = linalg.solve_triangular(L.T, V[:, keep], lower=False)
    return Projection(_fix_signs(B), lam[keep])


def select_components(eigenvalues, rule) -> int:
    """Number of leading components kept by ``rule``."""
    rule = check_rule(rule)
    k = len(eigenvalues)
    if isinstance(rule, numbers.Integral):
        return min(int(rule), k)
    cum = np.cumsum(eigenvalues)
    target = rule * cum[-1]
    # guard against round-off hiding an exactly-reached fraction
    q = int(np.searchsorted(cum, target * (1 - 1e-12), side="left")) + 1
    return min(q, k)


def solve(A, D, rule, rel_tol=DEFAULT_EPSILON) -> Projection:
    full = solve_full(A, D, rel_tol)
    return full.truncate(select_components(full.eigenvalues, rule))


def objective_value(A, D, B) -> float:
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    num = float(np.einsum("ik,ij,jk->", B, A, B))
    den = float(np.einsum("ik,ij,jk->", B, D, B))
    if den == 0:
        raise ZeroDivisionError("tr(B^T D B) is zero")
    return num / den
