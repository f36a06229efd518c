"""Multi-domain labeled datasets, CSV ingestion and the synthetic Gaussian generator.

Data are stored column-wise: a feature matrix plus integer label and domain
vectors. Labels and domains are dense 0-based indices; the original string
names are kept alongside so CSV round trips are lossless.
"""

from __future__ import annotations

import csv
import hashlib
import math
import os
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

import numpy as np

__all__ = [
    "Instance",
    "MultiDomainDataset",
    "DomainSpec",
    "load_csv",
    "write_csv",
    "concat",
    "generate_synthetic",
    "table2_preset",
    "apply_prior",
    "largest_remainder",
]


class Instance(NamedTuple):
    features: np.ndarray
    label: int
    domain: int


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MultiDomainDataset:
    """Labeled instances partitioned by domain and class.

    Parameters
    ----------
    X : array, shape (n, d)
        Feature matrix. Row order is the index order used by every Gram and
        scatter matrix built from this dataset.
    labels, domains : int arrays, shape (n,)
        Dense class indices in ``[0, c)`` and domain indices in ``[0, m)``.
    label_names, domain_names : tuple of str, optional
        External names for each index. Default to ``"0", "1", ...``.
    """

    X: np.ndarray
    labels: np.ndarray
    domains: np.ndarray
    label_names: tuple = ()
    domain_names: tuple = ()
    counts: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim == 1 and X.size == 0:
            X = X.reshape(0, 0)
        if X.ndim != 2:
            raise ValueError(f"X must be 2-D, got shape {X.shape}")
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        domains = np.asarray(self.domains, dtype=np.int64).reshape(-1)
        n = X.shape[0]
        if labels.shape[0] != n or domains.shape[0] != n:
            raise ValueError("X, labels and domains must have the same length")
        if not np.all(np.isfinite(X)):
            raise ValueError("features must be finite")
        if n and (labels.min() < 0 or domains.min() < 0):
            raise ValueError("label and domain indices must be nonnegative")

        c = len(self.label_names) or (int(labels.max()) + 1 if n else 0)
        m = len(self.domain_names) or (int(domains.max()) + 1 if n else 0)
        if n and (labels.max() >= c or domains.max() >= m):
            raise ValueError("label or domain index outside the declared name range")
        label_names = tuple(self.label_names) or tuple(str(j) for j in range(c))
        domain_names = tuple(self.domain_names) or tuple(str(s) for s in range(m))

        counts = np.zeros((m, c), dtype=np.int64)
        np.add.at(counts, (domains, labels), 1)
        counts.setflags(write=False)

        object.__setattr__(self, "X", _frozen(X, np.float64))
        object.__setattr__(self, "labels", _frozen(labels, np.int64))
        object.__setattr__(self, "domains", _frozen(domains, np.int64))
        object.__setattr__(self, "label_names", tuple(str(v) for v in label_names))
        object.__setattr__(self, "domain_names", tuple(str(v) for v in domain_names))
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def m(self) -> int:
        return self.counts.shape[0]

    @property
    def c(self) -> int:
        return self.counts.shape[1]

    @property
    def empty_cells(self) -> list[tuple[int, int]]:
        """(domain, class) cells holding no instance."""
        return [tuple(int(v) for v in ij) for ij in np.argwhere(self.counts == 0)]

    def __len__(self):
        return self.n

    def __iter__(self) -> Iterator[Instance]:
        for i in range(self.n):
            yield Instance(self.X[i], int(self.labels[i]), int(self.domains[i]))

    @classmethod
    def from_instances(cls, instances: Sequence[Instance], **names) -> "MultiDomainDataset":
        if not instances:
            raise ValueError("empty dataset")
        X = np.vstack([np.asarray(inst.features, dtype=float) for inst in instances])
        return cls(
            X,
            [inst.label for inst in instances],
            [inst.domain for inst in instances],
            **names,
        )

    def subset(self, index) -> "MultiDomainDataset":
        """Rows selected by ``index``; label and domain index spaces are kept."""
        index = np.asarray(index)
        return MultiDomainDataset(
            self.X[index],
            self.labels[index],
            self.domains[index],
            self.label_names,
            self.domain_names,
        )

    def select_domains(self, domains: Sequence[int]) -> "MultiDomainDataset":
        """Instances of the given domains, re-indexed to ``0..len(domains)-1``."""
        domains = list(domains)
        remap = {s: k for k, s in enumerate(domains)}
        mask = np.isin(self.domains, domains)
        return MultiDomainDataset(
            self.X[mask],
            self.labels[mask],
            [remap[int(s)] for s in self.domains[mask]],
            self.label_names,
            tuple(self.domain_names[s] for s in domains),
        )

    def pooled(self) -> "MultiDomainDataset":
        """All instances assigned to a single pseudo-domain."""
        return MultiDomainDataset(
            self.X, self.labels, np.zeros(self.n, dtype=np.int64),
            self.label_names, ("pooled",),
        )

    def digest(self) -> str:
        """SHA-256 over features, labels, domains and names."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.X, dtype="<f8").tobytes())
        h.update(np.ascontiguousarray(self.labels, dtype="<i8").tobytes())
        h.update(np.ascontiguousarray(self.domains, dtype="<i8").tobytes())
        h.update("\x1f".join(self.label_names).encode())
        h.update(b"\x1e")
        h.update("\x1f".join(self.domain_names).encode())
        return h.hexdigest()


def concat(datasets: Sequence[MultiDomainDataset]) -> MultiDomainDataset:
    """Stack datasets, merging label/domain names in first-appearance order."""
    if not datasets:
        raise ValueError("nothing to concatenate")
    label_names: dict[str, int] = {}
    domain_names: dict[str, int] = {}
    labels, domains = [], []
    for ds in datasets:
        for name in ds.label_names:
            label_names.setdefault(name, len(label_names))
        for name in ds.domain_names:
            domain_names.setdefault(name, len(domain_names))
        lmap = np.array([label_names[v] for v in ds.label_names], dtype=np.int64)
        dmap = np.array([domain_names[v] for v in ds.domain_names], dtype=np.int64)
        labels.append(lmap[ds.labels] if ds.n else ds.labels)
        domains.append(dmap[ds.domains] if ds.n else ds.domains)
    dims = {ds.d for ds in datasets if ds.n}
    if len(dims) > 1:
        raise ValueError(f"feature dimensions differ across datasets: {sorted(dims)}")
    return MultiDomainDataset(
        np.vstack([ds.X for ds in datasets if ds.n]),
        np.concatenate(labels),
        np.concatenate(domains),
        tuple(label_names),
        tuple(domain_names),
    )


# --------------------------------------------------------------------- CSV


class CsvFormatError(ValueError):
    pass


def load_csv(path, domain_col="domain", label_col="label", feature_cols=None,
             label_names=None, domain_names=None) -> MultiDomainDataset:
    """Read a ``domain,label,f0..`` CSV file.

    ``feature_cols`` defaults to every column other than the domain and label
    columns, in file order. Domain and label strings are mapped to dense
    indices in order of first appearance unless ``label_names`` /
    ``domain_names`` fix the mapping, in which case unknown values raise.
    Row numbers in error messages count the header as row 1.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise CsvFormatError(f"{path}: empty dataset") from None
        for col in (domain_col, label_col):
            if col not in header:
                raise CsvFormatError(f"{path}: missing column {col!r}")
        if feature_cols is None:
            feature_cols = [h for h in header if h not in (domain_col, label_col)]
        if not feature_cols:
            raise CsvFormatError(f"{path}: no feature columns")
        missing = [f for f in feature_cols if f not in header]
        if missing:
            raise CsvFormatError(f"{path}: missing feature columns {missing}")
        di, li = header.index(domain_col), header.index(label_col)
        fi = [header.index(f) for f in feature_cols]

        fixed_labels = label_names is not None
        fixed_domains = domain_names is not None
        lmap = {v: k for k, v in enumerate(label_names or ())}
        dmap = {v: k for k, v in enumerate(domain_names or ())}
        rows, labels, domains = [], [], []
        for rowno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise CsvFormatError(
                    f"{path}: row {rowno} has {len(row)} columns, expected {len(header)}"
                )
            feats = []
            for k, col in zip(fi, feature_cols):
                try:
                    v = float(row[k])
                except ValueError:
                    v = math.nan
                if not math.isfinite(v):
                    raise CsvFormatError(
                        f"{path}: non-numeric feature at row {rowno}, column {col}: {row[k]!r}"
                    )
                feats.append(v)
            lab, dom = row[li].strip(), row[di].strip()
            for value, table, fixed, what in ((lab, lmap, fixed_labels, "label"),
                                              (dom, dmap, fixed_domains, "domain")):
                if value not in table:
                    if fixed:
                        raise CsvFormatError(f"{path}: unknown {what} {value!r} at row {rowno}")
                    table[value] = len(table)
            rows.append(feats)
            labels.append(lmap[lab])
            domains.append(dmap[dom])
    if not rows:
        raise CsvFormatError(f"{path}: empty dataset")
    return MultiDomainDataset(
        np.array(rows), labels, domains, tuple(lmap), tuple(dmap)
    )


def write_csv(data: MultiDomainDataset, path, feature_prefix="f"):
    """Write ``data`` with ``repr`` floats (17 significant digits, lossless)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["domain", "label"] + [f"{feature_prefix}{k}" for k in range(data.d)])
        for i in range(data.n):
            w.writerow(
                [data.domain_names[data.domains[i]], data.label_names[data.labels[i]]]
                + [repr(float(v)) for v in data.X[i]]
            )


# --------------------------------------------------------------- synthetic


@dataclass(frozen=True)
class DomainSpec:
    """Per-class axis-aligned Gaussian specification of one domain.

    ``means`` and ``stds`` have shape (c, d); ``counts`` has length c.
    """

    means: tuple
    stds: tuple
    counts: tuple
    name: str = ""

    def __post_init__(self):
        means = np.asarray(self.means, dtype=float)
        stds = np.asarray(self.stds, dtype=float)
        if means.ndim != 2 or means.shape != stds.shape:
            raise ValueError("means and stds must both have shape (classes, dims)")
        if not np.all(np.isfinite(means)) or not np.all(np.isfinite(stds)):
            raise ValueError("means and stds must be finite")
        if np.any(stds <= 0):
            raise ValueError("standard deviations must be strictly positive")
        counts = tuple(int(v) for v in self.counts)
        if len(counts) != means.shape[0]:
            raise ValueError("one instance count per class required")
        if any(v < 0 for v in counts):
            raise ValueError("instance counts must be nonnegative")
        object.__setattr__(self, "means", tuple(map(tuple, means.tolist())))
        object.__setattr__(self, "stds", tuple(map(tuple, stds.tolist())))
        object.__setattr__(self, "counts", counts)

    @property
    def n_classes(self) -> int:
        return len(self.counts)

    @property
    def n_features(self) -> int:
        return len(self.means[0])

    @property
    def priors(self) -> np.ndarray:
        counts = np.asarray(self.counts, dtype=float)
        return counts / counts.sum()

    def to_dict(self) -> dict:
        return {"name": self.name, "means": [list(r) for r in self.means],
                "stds": [list(r) for r in self.stds], "counts": list(self.counts)}

    @classmethod
    def from_dict(cls, d: dict) -> "DomainSpec":
        return cls(d["means"], d["stds"], d["counts"], d.get("name", ""))


def table2_preset() -> list[DomainSpec]:
    """Three 2-D domains of three classes, 50 instances per class, sigma 0.3."""
    x1 = [(1.0, 2.0, 3.0), (3.5, 4.5, 5.5), (8.0, 9.5, 10.0)]
    x2 = [(2.0, 1.0, 2.0), (2.5, 1.5, 2.5), (2.5, 1.5, 2.5)]
    specs = []
    for s in range(3):
        means = [[x1[s][j], x2[s][j]] for j in range(3)]
        specs.append(DomainSpec(means, [[0.3, 0.3]] * 3, [50, 50, 50], f"domain{s + 1}"))
    return specs


def largest_remainder(prior, total: int) -> np.ndarray:
    """Integer apportionment of ``total`` by ``prior``; ties go to the lower index."""
    prior = np.asarray(prior, dtype=float)
    quotas = prior * total
    counts = np.floor(quotas).astype(np.int64)
    short = int(total - counts.sum())
    order = np.argsort(-(quotas - counts), kind="stable")
    counts[order[:short]] += 1
    return counts


def apply_prior(spec: DomainSpec, prior, total: int) -> DomainSpec:
    """Copy of ``spec`` whose class counts follow ``prior`` and sum to ``total``."""
    prior = np.asarray(prior, dtype=float)
    if prior.shape != (spec.n_classes,):
        raise ValueError(f"prior must have {spec.n_classes} entries")
    if np.any(prior < 0) or abs(prior.sum() - 1.0) > 1e-9:
        raise ValueError("prior must be nonnegative and sum to 1")
    if total < spec.n_classes:
        raise ValueError("total must be at least the number of classes")
    counts = largest_remainder(prior, total)
    if np.any(counts == 0):
        empty = [int(j) for j in np.flatnonzero(counts == 0)]
        raise ValueError(f"prior leaves class(es) {empty} with no instances (empty class)")
    return DomainSpec(spec.means, spec.stds, counts.tolist(), spec.name)


def generate_synthetic(specs: Sequence[DomainSpec], seed) -> MultiDomainDataset:
    """Draw a dataset from per-domain Gaussian specifications.

    Sampling uses numpy's PCG64 generator seeded with ``seed`` (an int or a
    ``numpy.random.SeedSequence``). Instances are ordered domain-major, then
    class, and each (domain, class) block is drawn as one ``(count, d)``
    standard-normal array, so output is bit-identical for a fixed seed.
    """
    if not specs:
        raise ValueError("at least one domain spec required")
    c = specs[0].n_classes
    d = specs[0].n_features
    for sp in specs:
        if sp.n_classes != c or sp.n_features != d:
            raise ValueError("all domain specs must share class count and dimension")
    if sum(sum(sp.counts) for sp in specs) == 0:
        raise ValueError("zero total instances requested")

    rng = np.random.Generator(np.random.PCG64(seed))
    blocks, labels, domains = [], [], []
    for s, sp in enumerate(specs):
        for j in range(c):
            k = sp.counts[j]
            z = rng.standard_normal((k, d))
            blocks.append(np.asarray(sp.means[j]) + z * np.asarray(sp.stds[j]))
            labels.append(np.full(k, j))
            domains.append(np.full(k, s))
    names = tuple(sp.name or f"domain{s + 1}" for s, sp in enumerate(specs))
    return MultiDomainDataset(
        np.vstack(blocks),
        np.concatenate(labels),
        np.concatenate(domains),
        tuple(f"class{j + 1}" for j in range(c)),
        names,
    )
