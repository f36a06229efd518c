"""Binary model container.

Layout (all integers and floats little-endian)::

    b"MDA1"                    magic / version tag
    uint64                     length L of the JSON header in bytes
    L bytes                    UTF-8 JSON header
    float64[n, q]              projection B, row-major
    float64[q]                 eigenvalues
    float64[n, d]              training features, row-major
    int64[n]                   training labels
    int64[n]                   training domains

The header records n, q, d, sigma, hyperparameters, label/domain names, the
measure traces at fit time and a SHA-256 digest of the training data. The
training data are stored because every transform needs the cross Gram against
them; the digest is checked on load.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from . import kernel
from .data import MultiDomainDataset
from .eigsolver import HyperParams, Projection
from .pipeline import MdaModel

__all__ = ["MAGIC", "save_model", "load_model", "model_bytes"]

MAGIC = b"MDA1"


def _header(model: MdaModel) -> dict:
    train = model.train
    return {
        "format": "MDA1",
        "n": train.n,
        "q": model.q,
        "d": train.d,
        "sigma": model.sigma,
        "hyperparams": model.hyperparams.to_dict(),
        "dataset_hash": train.digest(),
        "label_names": list(train.label_names),
        "domain_names": list(train.domain_names),
        "center_before_scatter": model.center_before_scatter,
        "scale_train": model.scale_train,
        "measures": model.measures,
    }


def model_bytes(model: MdaModel) -> bytes:
    header = json.dumps(_header(model), sort_keys=True).encode("utf-8")
    parts = [MAGIC, struct.pack("<Q", len(header)), header]
    for arr, dt in ((model.B, "<f8"), (model.eigenvalues, "<f8"), (model.train.X, "<f8"),
                    (model.train.labels, "<i8"), (model.train.domains, "<i8")):
        parts.append(np.ascontiguousarray(arr, dtype=dt).tobytes())
    return b"".join(parts)


def save_model(model: MdaModel, path):
    with open(path, "wb") as fh:
        fh.write(model_bytes(model))


def _take(buf, offset, count, dtype):
    size = count * np.dtype(dtype).itemsize
    if offset + size > len(buf):
        raise ValueError("model file is truncated")
    return np.frombuffer(buf, dtype=dtype, count=count, offset=offset).copy(), offset + size


def load_model(path) -> MdaModel:
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:4] != MAGIC:
        raise ValueError(f"{path}: not an MDA1 model file")
    (hlen,) = struct.unpack_from("<Q", buf, 4)
    off = 12 + hlen
    header = json.loads(buf[12:off].decode("utf-8"))
    n, q, d = header["n"], header["q"], header["d"]
    B, off = _take(buf, off, n * q, "<f8")
    lam, off = _take(buf, off, q, "<f8")
    X, off = _take(buf, off, n * d, "<f8")
    labels, off = _take(buf, off, n, "<i8")
    domains, off = _take(buf, off, n, "<i8")
    if off != len(buf):
        raise ValueError(f"{path}: {len(buf) - off} trailing bytes")
    train = MultiDomainDataset(X.reshape(n, d), labels, domains,
                               tuple(header["label_names"]), tuple(header["domain_names"]))
    if train.digest() != header["dataset_hash"]:
        raise ValueError(f"{path}: training data digest mismatch")
    K_raw = kernel.gram(train, header["sigma"])
    return MdaModel(
        train=train,
        sigma=header["sigma"],
        hyperparams=HyperParams(**header["hyperparams"]),
        K_raw=K_raw,
        K_centered=kernel.center_train(K_raw),
        projection=Projection(B.reshape(n, q), lam),
        measures=header["measures"],
        center_before_scatter=header["center_before_scatter"],
        scale_train=header["scale_train"],
    )
