"""Fitting and applying a multidomain discriminant transformation."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import kernel
from .data import MultiDomainDataset
from .eigsolver import HyperParams, Projection, assemble, select_components, solve_full
from .scatter import EmbeddingCoefficients, ScatterSet, build_coefficients, build_scatter, measure_report

__all__ = [
    "FitError",
    "Prepared",
    "MdaModel",
    "ProjectedData",
    "resolve_bandwidth",
    "prepare",
    "fit",
    "fit_prepared",
    "transform_train",
    "transform_target",
]


class FitError(ValueError):
    """Raised with the name of the pipeline stage that failed."""

    def __init__(self, stage, message):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass(frozen=True, eq=False)
class Prepared:
    """Everything in a fit that depends on the data and bandwidth only."""

    data: MultiDomainDataset
    sigma: float
    K_raw: kernel.GramMatrix
    K_centered: kernel.GramMatrix
    coeff: EmbeddingCoefficients
    scatter: ScatterSet
    center_before_scatter: bool = False


@dataclass(frozen=True, eq=False)
class MdaModel:
    train: MultiDomainDataset
    sigma: float
    hyperparams: HyperParams
    K_raw: kernel.GramMatrix
    K_centered: kernel.GramMatrix
    projection: Projection
    measures: dict
    center_before_scatter: bool = False
    scale_train: bool = True

    @property
    def q(self) -> int:
        return self.projection.q

    @property
    def B(self) -> np.ndarray:
        return self.projection.B

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.projection.eigenvalues


@dataclass(frozen=True, eq=False)
class ProjectedData:
    rows: np.ndarray
    labels: np.ndarray | None = None
    domains: np.ndarray | None = None
    source: str = "target"


def resolve_bandwidth(sigma, data) -> float:
    """Accept a positive number, ``"median"`` or ``"<mult>*median"``."""
    if isinstance(sigma, str):
        text = sigma.strip().lower()
        mult = 1.0
        if text != "median":
            head, sep, tail = text.partition("*")
            if not sep or tail.strip() != "median":
                raise ValueError(f"cannot parse bandwidth {sigma!r}")
            mult = float(head)
        return kernel.check_bandwidth(mult * kernel.median_heuristic(data))
    return kernel.check_bandwidth(sigma)


def prepare(data: MultiDomainDataset, sigma, *, center_before_scatter=False, need_G=True) -> Prepared:
    """Gram matrices, embedding coefficients and measure matrices.

    By default the measure matrices are built from the raw Gram and the
    centered Gram only enters the denominator and the transforms. With
    ``center_before_scatter`` both use the centered Gram.
    """
    if data.n == 0:
        raise FitError("data", "empty training set")
    sigma = resolve_bandwidth(sigma, data)
    K_raw = kernel.gram(data, sigma)
    try:
        coeff = build_coefficients(data)
    except ValueError as exc:
        raise FitError("coefficients", exc) from None
    K_centered = kernel.center_train(K_raw)
    try:
        scatter = build_scatter(K_centered if center_before_scatter else K_raw, coeff, need_G=need_G)
    except ValueError as exc:
        raise FitError("scatter", exc) from None
    return Prepared(data, sigma, K_raw, K_centered, coeff, scatter, center_before_scatter)


def _check_fit_data(data):
    if data.m < 2:
        raise FitError("scatter", f"need at least two source domains, got {data.m}")
    if data.c < 2:
        raise FitError("scatter", f"need at least two classes, got {data.c}")


def fit_prepared(prep: Prepared, hp: HyperParams, full: Projection | None = None) -> MdaModel:
    """Solve for the projection given precomputed matrices.

    ``full`` may carry an already computed untruncated solution for the same
    ``(alpha, beta, gamma, epsilon)``, in which case only the component rule
    is applied.
    """
    if full is None:
        A, D = assemble(prep.scatter, prep.K_centered, hp)
        try:
            full = solve_full(A, D, rel_tol=hp.epsilon)
        except ValueError as exc:
            raise FitError("solve", exc) from None
    proj = full.truncate(select_components(full.eigenvalues, hp.components))
    return MdaModel(
        train=prep.data,
        sigma=prep.sigma,
        hyperparams=hp,
        K_raw=prep.K_raw,
        K_centered=prep.K_centered,
        projection=proj,
        measures=measure_report(prep.scatter, proj.B),
        center_before_scatter=prep.center_before_scatter,
    )


def fit(data: MultiDomainDataset, sigma="median", hp: HyperParams | None = None, *,
        center_before_scatter=False, scale_train=True) -> MdaModel:
    """Learn the projection from labeled source domains.

    Steps: raw Gram, embedding coefficients, measure matrices, centered Gram,
    assembly of numerator and denominator, generalized eigen solve, component
    selection.
    """
    hp = hp or HyperParams()
    _check_fit_data(data)
    prep = prepare(data, sigma, center_before_scatter=center_before_scatter)
    model = fit_prepared(prep, hp)
    return model if scale_train else replace(model, scale_train=False)


def _scaled(model: MdaModel):
    return model.B / np.sqrt(model.eigenvalues)[None, :]


def transform_train(model: MdaModel) -> ProjectedData:
    B = _scaled(model) if model.scale_train else model.B
    return ProjectedData(
        model.K_centered.values @ B, model.train.labels, model.train.domains, source="train"
    )


def transform_target(model: MdaModel, target) -> ProjectedData:
    """Map target instances into the learned subspace.

    ``target`` is a dataset or a raw (n_t, d) feature array.
    """
    Kt = kernel.cross_gram(target, model.train, model.sigma)
    Kt = kernel.center_test(Kt, model.train.n)
    rows = Kt.values @ _scaled(model)
    if isinstance(target, MultiDomainDataset):
        return ProjectedData(rows, target.labels, target.domains)
    return ProjectedData(rows)

