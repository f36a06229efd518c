"""Multidomain discriminant analysis for domain generalization."""

from .data import (DomainSpec, Instance, MultiDomainDataset, apply_prior, concat,
                   generate_synthetic, load_csv, table2_preset, write_csv)
from .eigsolver import HyperParams, Projection
from .pipeline import MdaModel, fit, transform_target, transform_train

__version__ = "0.1.0"

__all__ = [
    "DomainSpec", "Instance", "MultiDomainDataset", "apply_prior", "concat",
    "generate_synthetic", "load_csv", "table2_preset", "write_csv",
    "HyperParams", "Projection", "MdaModel", "fit", "transform_target", "transform_train",
]
