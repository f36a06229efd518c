"""Excess-risk and generalization-error bounds evaluated for a fitted projection.

The loss and kernel constants are not computable from data; they default to 1
and the reports are meant for comparing ``tr(B^T K B)`` across models.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

__all__ = [
    "BoundConstants",
    "BoundReport",
    "trace_bkb",
    "excess_risk_bound",
    "generalization_bound",
    "bound_report",
]


@dataclass(frozen=True)
class BoundConstants:
    """Lipschitz and boundedness constants of the loss and kernels.

    Attributes
    ----------
    L_loss, U_loss : loss Lipschitz constant and upper bound.
    U_kx, U_kprime, U_kgamma : square roots of the bounds of the input kernel,
        the kernel used to embed marginals, and the kernel on embeddings.
    L_kgamma : Lipschitz constant of the feature map of the embedding kernel.
    delta : failure probability, in (0, 1).
    """

    L_loss: float = 1.0
    U_loss: float = 1.0
    U_kx: float = 1.0
    U_kprime: float = 1.0
    U_kgamma: float = 1.0
    L_kgamma: float = 1.0
    delta: float = 0.05

    def __post_init__(self):
        for name, v in asdict(self).items():
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v}")
        if not self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class BoundReport:
    tr_bkb: float
    excess_risk_bound: float
    generalization_bound: float
    constants: BoundConstants
    n: int
    m: int
    n_bar: float
    delta: float

    def to_dict(self):
        d = asdict(self)
        d["constants"] = self.constants.to_dict()
        return d


def trace_bkb(model, centered=True, tol=1e-10) -> float:
    """``tr(B^T K B)`` with the centered (default) or raw training Gram."""
    K = (model.K_centered if centered else model.K_raw).values
    B = model.projection.B
    v = float(np.einsum("ik,ij,jk->", B, K, B))
    if v < 0:
        if v < -tol * max(1.0, float(np.trace(K))):
            raise ValueError(f"tr(B^T K B) is negative: {v}")
        v = 0.0
    return v


def excess_risk_bound(tr_bkb: float, n: int, k: BoundConstants) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    lead = 4 * k.L_loss * k.L_kgamma * k.U_kprime * k.U_kx
    return lead * math.sqrt(tr_bkb / n) + math.sqrt(2 * math.log(2 / k.delta) / n)


def generalization_bound(tr_bkb: float, m: int, n_bar: float, k: BoundConstants) -> float:
    """Uniform deviation bound over ``m`` domains of ``n_bar`` instances each.

    The concentration term attached to ``c1`` carries ``log(2 m / delta)``,
    the union bound over the ``m`` empirical marginals.
    """
    if m < 1 or n_bar < 1:
        raise ValueError("m and n_bar must be >= 1")
    c1 = 2 * math.sqrt(2) * k.L_loss * k.U_kx * k.L_kgamma * k.U_kprime
    c2 = 2 * k.L_loss * k.U_kx * k.U_kgamma
    sampling = k.U_loss * (
        math.sqrt(math.log(2 / k.delta) / (2 * m * n_bar))
        + math.sqrt(math.log(1 / k.delta) / (2 * m))
    )
    transform = c1 * math.sqrt(math.log(2 * m / k.delta) / n_bar) + c2 * (
        math.sqrt(1 / (m * n_bar)) + math.sqrt(1 / m)
    )
    return sampling + math.sqrt(tr_bkb) * transform


def bound_report(model, constants: BoundConstants | None = None, centered=True) -> BoundReport:
    """Both bounds for a fitted model; ``n_bar`` is the mean source-domain size."""
    constants = constants or BoundConstants()
    tr = trace_bkb(model, centered=centered)
    data = model.train
    sizes = data.counts.sum(axis=1)
    m = int(np.count_nonzero(sizes))
    n_bar = float(sizes[sizes > 0].mean())
    return BoundReport(
        tr_bkb=tr,
        excess_risk_bound=excess_risk_bound(tr, data.n, constants),
        generalization_bound=generalization_bound(tr, m, n_bar, constants),
        constants=constants,
        n=int(data.n),
        m=m,
        n_bar=n_bar,
        delta=constants.delta,
    )
