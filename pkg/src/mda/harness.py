"""Experiment protocols and hyperparameter sweeps.

Three protocols are supported:

* ``synthetic_validate_test``: fit on generated source domains, select on one
  independent draw of the target domain, report on a second draw.
* ``source_kfold``: select by stratified k-fold cross-validation on the
  labeled sources only, then refit on all of them.
* ``leave_domains_out``: hold out whole domains of a dataset as targets and
  select by k-fold on the rest.

Grid points are enumerated lexicographically over ``(sigma multiplier, beta,
gamma, alpha, energy)``. Work is grouped so the Gram and measure matrices are
built once per bandwidth and the eigenproblem is solved once per
``(sigma, beta, gamma, alpha)``; energy fractions only truncate the solution.
"""

from __future__ import annotations

import csv
import itertools
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import kernel
from .bounds import BoundConstants, bound_report, trace_bkb
from .classifiers import NnModel, accuracy, nn1_predict
from .data import DomainSpec, MultiDomainDataset, generate_synthetic
from .eigsolver import HyperParams, solve_full, assemble
from .pipeline import MdaModel, fit_prepared, prepare, transform_target, transform_train

__all__ = [
    "Grid",
    "Protocol",
    "SweepResult",
    "run_synthetic",
    "run_source_kfold",
    "run_leave_domains_out",
    "stratified_folds",
    "fold_accuracies",
    "evaluate_model",
    "predict",
    "emit_projection_csv",
]

log = logging.getLogger(__name__)

SELECTION_RULE = "max validation accuracy; ties -> first in grid enumeration order"


@dataclass(frozen=True)
class Grid:
    sigma_multipliers: tuple = (0.1, 0.2, 0.5, 1.0, 2.0, 5.0)
    betas: tuple = (0.1, 0.3, 0.5, 0.7, 0.9)
    gammas: tuple = (1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6)
    alphas: tuple = (1.0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8, 1e9)
    energies: tuple = (0.2, 0.4, 0.6, 0.8, 0.92, 0.94, 0.96, 0.98)
    epsilon: float = 1e-5

    def __post_init__(self):
        for name in ("sigma_multipliers", "betas", "gammas", "alphas", "energies"):
            values = tuple(float(v) for v in getattr(self, name))
            if not values:
                raise ValueError(f"grid list {name!r} is empty")
            object.__setattr__(self, name, values)
        if any(v <= 0 for v in self.sigma_multipliers):
            raise ValueError("sigma multipliers must be positive")
        # validates every value against the hyperparameter ranges
        for b, g, a, e in itertools.product(self.betas, self.gammas, self.alphas, self.energies):
            HyperParams(alpha=a, beta=b, gamma=g, epsilon=self.epsilon, components=e)

    @classmethod
    def full(cls) -> "Grid":
        return cls()

    @classmethod
    def reduced(cls) -> "Grid":
        return cls(
            sigma_multipliers=(0.5, 1.0, 2.0),
            betas=(0.3, 0.5, 0.7),
            gammas=(1e-2, 1.0, 1e2),
            alphas=(1.0, 1e2, 1e4),
            energies=(0.8, 0.96),
        )

    @classmethod
    def single(cls, sigma_multiplier=1.0, beta=0.5, gamma=1.0, alpha=1.0, energy=0.96,
               epsilon=1e-5) -> "Grid":
        return cls((sigma_multiplier,), (beta,), (gamma,), (alpha,), (energy,), epsilon)

    @classmethod
    def preset(cls, name: str) -> "Grid":
        try:
            return {"full": cls.full, "reduced": cls.reduced, "single": cls.single}[name]()
        except KeyError:
            raise ValueError(f"unknown grid preset {name!r}") from None

    def __len__(self):
        return (len(self.sigma_multipliers) * len(self.betas) * len(self.gammas)
                * len(self.alphas) * len(self.energies))

    def units(self):
        """``(sigma index, beta, gamma, alpha)`` solve units in enumeration order."""
        return list(itertools.product(range(len(self.sigma_multipliers)),
                                      self.betas, self.gammas, self.alphas))

    def configs(self):
        for index, (si, b, g, a, e) in enumerate(itertools.product(
                range(len(self.sigma_multipliers)), self.betas, self.gammas,
                self.alphas, self.energies)):
            yield index, self.sigma_multipliers[si], b, g, a, e

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass(frozen=True)
class Protocol:
    kind: str = "synthetic_validate_test"
    source_domains: tuple = (0, 1)
    target_domains: tuple = (2,)
    folds: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("synthetic_validate_test", "source_kfold", "leave_domains_out"):
            raise ValueError(f"unknown protocol {self.kind!r}")
        if set(self.source_domains) & set(self.target_domains):
            raise ValueError("target domains overlap source domains")
        if self.folds < 2:
            raise ValueError("k must be >= 2")

    def to_dict(self):
        return asdict(self)


@dataclass
class SweepResult:
    records: list
    best_index: int | None
    protocol: dict
    grid: dict
    extras: dict = field(default_factory=dict)
    model: MdaModel | None = None
    selection_rule: str = SELECTION_RULE

    @property
    def best(self) -> dict | None:
        return None if self.best_index is None else self.records[self.best_index]

    def to_jsonl(self, timing=False) -> str:
        """One JSON object per configuration; wall times only when ``timing``."""
        lines = []
        for rec in self.records:
            if not timing:
                rec = {k: v for k, v in rec.items() if k != "wall_time"}
            lines.append(json.dumps(rec, sort_keys=True))
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        best = self.best
        if best is not None:
            best = {k: v for k, v in best.items() if k != "wall_time"}
        return {
            "best": best,
            "selection_rule": self.selection_rule,
            "n_configs": len(self.records),
            "n_failed": sum(r.get("error") is not None for r in self.records),
            "protocol": self.protocol,
            "grid": self.grid,
            **self.extras,
        }


def _select(records) -> int | None:
    best, best_acc = None, -1.0
    for k, rec in enumerate(records):
        v = rec.get("val_acc")
        if v is not None and v > best_acc:
            best, best_acc = k, v
    return best


def predict(model: MdaModel, target) -> np.ndarray:
    """1NN labels for ``target`` against the projected training data."""
    ref = transform_train(model)
    return nn1_predict(NnModel(ref.rows, ref.labels), transform_target(model, target).rows)


def _map(fn, items, workers):
    if workers is None or workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _record(index, mult, sigma, hp, q):
    return {
        "index": index,
        "sigma_multiplier": mult,
        "sigma": sigma,
        "beta": hp.beta,
        "gamma": hp.gamma,
        "alpha": hp.alpha,
        "energy": hp.components,
        "epsilon": hp.epsilon,
        "q": q,
    }


def _energy_offset(grid, si, b, g, a):
    """Enumeration index of the first energy entry of a solve unit."""
    nb, ng, na, ne = len(grid.betas), len(grid.gammas), len(grid.alphas), len(grid.energies)
    bi, gi, ai = grid.betas.index(b), grid.gammas.index(g), grid.alphas.index(a)
    return (((si * nb + bi) * ng + gi) * na + ai) * ne


# ------------------------------------------------------------- synthetic


def synthetic_sets(specs: Sequence[DomainSpec], seed, sources=(0, 1), target=2):
    """Source data and two independent target draws from one seed."""
    s_src, s_val, s_test = np.random.SeedSequence(seed).spawn(3)
    src = generate_synthetic([specs[s] for s in sources], s_src)
    val = generate_synthetic([specs[target]], s_val)
    test = generate_synthetic([specs[target]], s_test)
    return src, val, test


def run_synthetic(grid: Grid, specs: Sequence[DomainSpec], seed: int, *, sources=(0, 1),
                  target=2, workers=1, center_before_scatter=False) -> SweepResult:
    """Fit every grid point on the sources, select on the validation draw.

    Each record carries validation and test accuracy, so the test accuracy
    of the selected configuration is ``result.best["test_acc"]``.
    """
    if len(sources) < 2:
        raise ValueError("at least two source domains required")
    if target in sources:
        raise ValueError("target domain must differ from the source domains")
    src, val, test = synthetic_sets(specs, seed, sources, target)
    d_m = kernel.median_heuristic(src)
    preps = [prepare(src, mult * d_m, center_before_scatter=center_before_scatter)
             for mult in grid.sigma_multipliers]

    def unit(args):
        si, b, g, a = args
        prep = preps[si]
        t0 = time.perf_counter()
        hp0 = HyperParams(a, b, g, grid.epsilon, grid.energies[0])
        try:
            full = solve_full(*assemble(prep.scatter, prep.K_centered, hp0), rel_tol=grid.epsilon)
        except ValueError as exc:
            full, err = None, str(exc)
        solve_time = (time.perf_counter() - t0) / len(grid.energies)
        out = []
        offset = _energy_offset(grid, si, b, g, a)
        for ei, e in enumerate(grid.energies):
            t1 = time.perf_counter()
            hp = HyperParams(a, b, g, grid.epsilon, e)
            rec = _record(offset + ei, grid.sigma_multipliers[si], prep.sigma, hp, 0)
            if full is None:
                rec.update(val_acc=None, test_acc=None, tr_bkb=None, error=err)
            else:
                model = fit_prepared(prep, hp, full)
                rec.update(
                    q=model.q,
                    val_acc=accuracy(predict(model, val), val.labels),
                    test_acc=accuracy(predict(model, test), test.labels),
                    tr_bkb=trace_bkb(model),
                    error=None,
                )
            rec["wall_time"] = solve_time + time.perf_counter() - t1
            out.append(rec)
        return out

    records = [r for chunk in _map(unit, grid.units(), workers) for r in chunk]
    best = _select(records)
    raw = accuracy(nn1_predict(NnModel(src.X, src.labels), test.X), test.labels)
    protocol = Protocol("synthetic_validate_test", tuple(sources), (target,), 5, seed)
    result = SweepResult(
        records, best, protocol.to_dict(), grid.to_dict(),
        extras={
            "seed": seed,
            "median_sq_distance": d_m,
            "raw_1nn_test_acc": raw,
            "test_acc": None if best is None else records[best]["test_acc"],
            "specs": [sp.to_dict() for sp in specs],
        },
    )
    if best is not None:
        rec = records[best]
        hp = HyperParams(rec["alpha"], rec["beta"], rec["gamma"], grid.epsilon, rec["energy"])
        si = grid.sigma_multipliers.index(rec["sigma_multiplier"])
        result.model = fit_prepared(preps[si], hp)
    return result


def base_hp(rec) -> HyperParams:
    return HyperParams(rec["alpha"], rec["beta"], rec["gamma"], rec["epsilon"], rec["energy"])


# ----------------------------------------------------------------- k-fold


def stratified_folds(data: MultiDomainDataset, k: int, seed) -> np.ndarray:
    """Fold id per instance, stratified by (domain, class).

    Instances are shuffled within each cell, cells are laid out in
    (domain, class) order and fold ids are dealt round-robin along that
    sequence, so every cell with at least ``k`` instances appears in every
    fold. Smaller cells are dealt the same way but cannot cover all folds;
    a warning names them.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > data.n:
        raise ValueError(f"k={k} exceeds the number of instances ({data.n})")
    rng = np.random.Generator(np.random.PCG64(seed))
    folds = np.empty(data.n, dtype=np.int64)
    pos = 0
    small = []
    for s in range(data.m):
        for j in range(data.c):
            idx = np.flatnonzero((data.domains == s) & (data.labels == j))
            if idx.size == 0:
                continue
            if idx.size < k:
                small.append((data.domain_names[s], data.label_names[j], int(idx.size)))
            idx = idx[rng.permutation(idx.size)]
            folds[idx] = (pos + np.arange(idx.size)) % k
            pos += idx.size
    if small:
        log.warning("cells with fewer than k=%d instances are not stratified: %s", k, small)
    return folds


def _fold_preps(data, folds, k, sigmas, center_before_scatter):
    out = []
    for sigma in sigmas:
        row = []
        for f in range(k):
            train = data.subset(folds != f)
            try:
                row.append(prepare(train, sigma, center_before_scatter=center_before_scatter))
            except ValueError as exc:
                row.append(exc)
        out.append(row)
    return out


def fold_accuracies(data: MultiDomainDataset, folds, sigma, hp: HyperParams) -> list[float]:
    """Validation accuracy of one configuration on each fold of ``folds``."""
    folds = np.asarray(folds)
    accs = []
    for f in np.unique(folds):
        train, held = data.subset(folds != f), data.subset(folds == f)
        model = fit_prepared(prepare(train, sigma), hp)
        accs.append(accuracy(predict(model, held), held.labels))
    return accs


def _kfold_sweep(data, grid, k, seed, workers, center_before_scatter, test=None):
    folds = stratified_folds(data, k, seed)
    d_m = kernel.median_heuristic(data)
    sigmas = [mult * d_m for mult in grid.sigma_multipliers]
    preps = _fold_preps(data, folds, k, sigmas, center_before_scatter)
    held = [data.subset(folds == f) for f in range(k)]
    full_preps = {}

    def unit(args):
        si, b, g, a = args
        t0 = time.perf_counter()
        accs = np.zeros((k, len(grid.energies)))
        err = None
        for f in range(k):
            prep = preps[si][f]
            if isinstance(prep, Exception):
                err = f"fold {f}: {prep}"
                break
            hp0 = HyperParams(a, b, g, grid.epsilon, grid.energies[0])
            try:
                full = solve_full(*assemble(prep.scatter, prep.K_centered, hp0),
                                  rel_tol=grid.epsilon)
            except ValueError as exc:
                err = f"fold {f}: {exc}"
                break
            for ei, e in enumerate(grid.energies):
                model = fit_prepared(prep, HyperParams(a, b, g, grid.epsilon, e), full)
                accs[f, ei] = accuracy(predict(model, held[f]), held[f].labels)
        per = (time.perf_counter() - t0) / len(grid.energies)
        offset = _energy_offset(grid, si, b, g, a)
        out = []
        for ei, e in enumerate(grid.energies):
            hp = HyperParams(a, b, g, grid.epsilon, e)
            rec = _record(offset + ei, grid.sigma_multipliers[si], sigmas[si], hp, None)
            rec.pop("q")
            if err is None:
                rec.update(val_acc=float(accs[:, ei].mean()),
                           fold_accs=[float(v) for v in accs[:, ei]], error=None)
            else:
                rec.update(val_acc=None, fold_accs=None, error=err)
            rec["wall_time"] = per
            out.append(rec)
        return out

    records = [r for chunk in _map(unit, grid.units(), workers) for r in chunk]
    best = _select(records)
    model = None
    if best is not None:
        rec = records[best]
        si = grid.sigma_multipliers.index(rec["sigma_multiplier"])
        if si not in full_preps:
            full_preps[si] = prepare(data, sigmas[si], center_before_scatter=center_before_scatter)
        model = fit_prepared(full_preps[si], base_hp(rec))
        rec["q"] = model.q
        rec["tr_bkb"] = trace_bkb(model)
        if test is not None:
            rec["test_acc"] = accuracy(predict(model, test), test.labels)
    return records, best, model, folds, d_m


def run_source_kfold(data: MultiDomainDataset, grid: Grid, k=5, seed=0, *, workers=1,
                     center_before_scatter=False) -> SweepResult:
    """Select by mean fold accuracy over the labeled sources, then refit."""
    records, best, model, folds, d_m = _kfold_sweep(
        data, grid, k, seed, workers, center_before_scatter)
    protocol = Protocol("source_kfold", tuple(range(data.m)), (), k, seed)
    return SweepResult(
        records, best, protocol.to_dict(), grid.to_dict(),
        extras={"seed": seed, "median_sq_distance": d_m, "folds": folds.tolist()},
        model=model,
    )


def run_leave_domains_out(data: MultiDomainDataset, targets: Sequence[int], grid: Grid, k=5,
                          seed=0, *, workers=1, center_before_scatter=False) -> SweepResult:
    """Hold out ``targets`` as unseen domains; select by k-fold on the rest."""
    targets = sorted(set(int(t) for t in targets))
    sources = [s for s in range(data.m) if s not in targets]
    if not targets or len(sources) < 2:
        raise ValueError("need at least one target and two source domains")
    src = data.select_domains(sources)
    tgt = data.select_domains(targets)
    records, best, model, folds, d_m = _kfold_sweep(
        src, grid, k, seed, workers, center_before_scatter, test=tgt)
    protocol = Protocol("leave_domains_out", tuple(sources), tuple(targets), k, seed)
    return SweepResult(
        records, best, protocol.to_dict(), grid.to_dict(),
        extras={"seed": seed, "median_sq_distance": d_m,
                "test_acc": None if best is None else records[best].get("test_acc")},
        model=model,
    )


# --------------------------------------------------------------- evaluation


def evaluate_model(model: MdaModel, target, with_bounds=False,
                   constants: BoundConstants | None = None, accuracy_required=True) -> dict:
    """Project ``target``, classify by 1NN and optionally attach bound diagnostics."""
    labels = getattr(target, "labels", None)
    if accuracy_required and labels is None:
        raise ValueError("target carries no labels; accuracy cannot be computed")
    pred = predict(model, target)
    rec = {"n_target": int(len(pred)), "q": model.q}
    if labels is not None:
        rec["accuracy"] = accuracy(pred, labels)
    rec["tr_bkb"] = trace_bkb(model)
    if with_bounds:
        rec["bounds"] = bound_report(model, constants).to_dict()
    return rec


def emit_projection_csv(model: MdaModel, data: MultiDomainDataset, path):
    """Write ``domain,label,z0..z{q-1}`` rows of projected coordinates."""
    rows = transform_target(model, data).rows if data.n else np.zeros((0, model.q))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["domain", "label"] + [f"z{k}" for k in range(model.q)])
        for i in range(data.n):
            w.writerow([data.domain_names[data.domains[i]], data.label_names[data.labels[i]]]
                       + [repr(float(v)) for v in rows[i]])
