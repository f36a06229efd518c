"""Command-line front end: ``mda {gen,fit,transform,eval,sweep,bounds,project}``.

Exit status is 0 on success, 1 on usage errors and 2 on runtime errors.
Diagnostics go to standard error; JSON and CSV artifacts go to the declared
output paths or standard output.

Every subcommand accepts ``--config FILE``: a JSON object whose keys are
option names (dashes or underscores). A sweep summary can be passed as the
config to replay the sweep, since it embeds its resolved ``run_config``.
Precedence is command line, then config file, then built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import BoundConstants, excess_risk_bound, generalization_bound, bound_report
from .data import DomainSpec, apply_prior, concat, generate_synthetic, load_csv, table2_preset, write_csv
from .eigsolver import HyperParams
from .harness import Grid, emit_projection_csv, evaluate_model, run_leave_domains_out, \
    run_source_kfold, run_synthetic
from .modelio import load_model, save_model
from .pipeline import fit, transform_target

log = logging.getLogger("mda")

COMMANDS = ("gen", "fit", "transform", "eval", "sweep", "bounds", "project")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


class _Formatter(argparse.ArgumentDefaultsHelpFormatter):
    pass


# ----------------------------------------------------------------- parsing


def _component_rule(text):
    text = str(text).strip()
    try:
        if any(ch in text for ch in ".eE"):
            return float(text)
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid component rule {text!r}") from None


def _bandwidth(text):
    text = str(text).strip()
    try:
        return float(text)
    except ValueError:
        if text.lower() == "median" or text.lower().endswith("*median"):
            return text.lower()
        raise argparse.ArgumentTypeError(f"invalid bandwidth {text!r}") from None


def _paths(text):
    if isinstance(text, list):
        return [str(p) for p in text]
    return [p for p in str(text).split(",") if p]


def _prior(text):
    name, sep, rest = str(text).partition(":")
    try:
        values = [float(v) for v in rest.split(",")]
    except ValueError:
        values = None
    if not sep or not values:
        raise argparse.ArgumentTypeError(f"expected DOMAIN:p1,p2,..., got {text!r}")
    return [name, values]


def _add_common(p):
    p.add_argument("--config", metavar="FILE", default=None,
                   help="JSON file of option values (flags take precedence)")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging on stderr")


def _add_seed(p):
    p.add_argument("--seed", type=int, default=None,
                   help="random seed; falls back to $MDA_SEED, then 0")


def _add_hyper(p):
    p.add_argument("--beta", type=float, default=0.5, help="weight of class discrepancy vs between-class scatter")
    p.add_argument("--alpha", type=float, default=1.0, help="weight of within-class scatter")
    p.add_argument("--gamma", type=float, default=1.0, help="weight of domain discrepancy")
    p.add_argument("--epsilon", type=float, default=1e-5, help="ridge added to the denominator")
    p.add_argument("--sigma", type=_bandwidth, default="median",
                   help="kernel width in squared-distance units: number, 'median' or 'K*median'")
    p.add_argument("--components", type=_component_rule, default=0.96,
                   help="int: number of components; float in (0,1]: eigenvalue energy fraction")
    p.add_argument("--center-before-scatter", action="store_true", default=False,
                   help="build measure matrices from the centered Gram")


def _add_constants(p):
    defaults = BoundConstants()
    for name in ("L_loss", "U_loss", "U_kx", "U_kprime", "U_kgamma", "L_kgamma", "delta"):
        p.add_argument(f"--{name.lower().replace('_', '-')}", dest=name, type=float,
                       default=getattr(defaults, name), help=f"bound constant {name}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mda", description="Multidomain discriminant analysis.",
                     formatter_class=_Formatter)
    parser.add_argument("--version", action="version", version=f"mda {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def add(name, help_):
        p = sub.add_parser(name, help=help_, description=help_, formatter_class=_Formatter)
        _add_common(p)
        return p

    p = add("gen", "generate synthetic multi-domain data, one CSV per domain")
    p.add_argument("--preset", choices=["table2"], default="table2", help="built-in domain specification")
    p.add_argument("--spec", metavar="FILE", default=None,
                   help="JSON list of domain specs (means, stds, counts, name); overrides --preset")
    p.add_argument("--prior", type=_prior, action="append", default=None, metavar="DOMAIN:P1,P2,..",
                   help="replace a domain's class prior (domain name or 1-based index); repeatable")
    p.add_argument("--total", type=int, default=None,
                   help="instances per re-weighted domain; unset keeps its current total")
    _add_seed(p)
    p.add_argument("--out", required=True, metavar="DIR", help="output directory")

    p = add("fit", "fit a model on labeled source CSVs")
    p.add_argument("--train", type=_paths, required=True, metavar="CSV[,CSV..]", help="training CSV files")
    _add_hyper(p)
    p.add_argument("--out", required=True, metavar="FILE", help="model file to write")

    p = add("transform", "project data with a fitted model (z columns only)")
    p.add_argument("--model", required=True, metavar="FILE", help="model file")
    p.add_argument("--data", required=True, metavar="CSV", help="data to project")
    p.add_argument("--out", default="-", metavar="FILE", help="output CSV, '-' for stdout")

    p = add("eval", "1NN accuracy of a fitted model on labeled data")
    p.add_argument("--model", required=True, metavar="FILE", help="model file")
    p.add_argument("--data", required=True, metavar="CSV", help="labeled target CSV")
    p.add_argument("--bounds", action="store_true", default=False, help="attach bound diagnostics")
    _add_constants(p)
    p.add_argument("--out", default="-", metavar="FILE", help="output JSON, '-' for stdout")

    p = add("sweep", "hyperparameter sweep under an evaluation protocol")
    p.add_argument("--protocol", choices=["synthetic", "kfold", "lodo"], default="synthetic",
                   help="synthetic: validate/test on two target draws; kfold: source-only CV; "
                        "lodo: leave target domains out")
    p.add_argument("--preset", choices=["table2"], default="table2",
                   help="domain specification for the synthetic protocol")
    p.add_argument("--spec", metavar="FILE", default=None, help="JSON list of domain specs")
    p.add_argument("--prior", type=_prior, action="append", default=None, metavar="DOMAIN:P1,P2,..",
                   help="replace a source domain's class prior; repeatable")
    p.add_argument("--sources", default="1,2", help="1-based source domain indices (synthetic)")
    p.add_argument("--target", type=int, default=3, help="1-based target domain index (synthetic)")
    p.add_argument("--train", type=_paths, default=None, metavar="CSV[,CSV..]",
                   help="labeled CSVs for kfold/lodo")
    p.add_argument("--targets", default=None, help="comma-separated target domain names (lodo)")
    p.add_argument("--folds", type=int, default=5, help="k for k-fold selection")
    p.add_argument("--grid", choices=["reduced", "full", "single"], default="reduced", help="grid preset")
    p.add_argument("--grid-file", metavar="FILE", default=None, help="JSON grid overriding --grid")
    _add_seed(p)
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads; unset uses all available cores")
    p.add_argument("--timing", action="store_true", default=False,
                   help="include wall times in the JSON-lines records")
    p.add_argument("--out", required=True, metavar="FILE", help="JSON-lines output")
    p.add_argument("--summary", default=None, metavar="FILE",
                   help="summary JSON; unset writes OUT with suffix .summary.json")
    p.add_argument("--model-out", default=None, metavar="FILE", help="save the selected model")

    p = add("bounds", "evaluate the excess-risk and generalization bounds")
    p.add_argument("--model", default=None, metavar="FILE", help="fitted model (supplies tr(B'KB), n, m)")
    p.add_argument("--tr-bkb", type=float, default=None, help="trace value when no model is given")
    p.add_argument("--n", type=int, default=None, help="training instances when no model is given")
    p.add_argument("--m", type=int, default=None, help="source domains when no model is given")
    p.add_argument("--n-bar", type=float, default=None, help="instances per domain when no model is given")
    p.add_argument("--raw-gram", action="store_true", default=False,
                   help="use the uncentered Gram in tr(B'KB)")
    _add_constants(p)
    p.add_argument("--out", default="-", metavar="FILE", help="output JSON, '-' for stdout")

    p = add("project", "write domain,label,z0.. CSV of projected coordinates")
    p.add_argument("--model", required=True, metavar="FILE", help="model file")
    p.add_argument("--data", required=True, metavar="CSV", help="data to project")
    p.add_argument("--out", required=True, metavar="FILE", help="output CSV")

    return parser


def _subparser(parser, command):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise KeyError(command)


def _load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"invalid config file {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError(f"invalid config file {path}: expected a JSON object")
    cfg = cfg.get("run_config", cfg)
    return {k.replace("-", "_"): v for k, v in cfg.items() if k not in ("command", "config")}


def _preparse(argv):
    """Command name and ``--config`` path, read before required flags are checked."""
    command = next((a for a in argv if a in COMMANDS), None)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args([a for a in argv if a != command])
    return command, known.config


def parse(argv):
    parser = build_parser()
    command, config = _preparse(argv)
    if command and config:
        sub = _subparser(parser, command)
        known = {a.dest for a in sub._actions}
        cfg = _load_config(config)
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise UsageError(f"invalid config file {config}: unknown keys {unknown}")
        for a in sub._actions:
            if a.dest not in cfg:
                continue
            if a.type is not None and isinstance(cfg[a.dest], str):
                try:
                    cfg[a.dest] = a.type(cfg[a.dest])
                except argparse.ArgumentTypeError as exc:
                    raise UsageError(f"invalid config file {config}: {exc}") from None
            a.required = False
        sub.set_defaults(**cfg)
    args = parser.parse_args(argv)
    if hasattr(args, "seed") and args.seed is None:
        env = os.environ.get("MDA_SEED")
        try:
            args.seed = int(env) if env else 0
        except ValueError:
            raise UsageError(f"MDA_SEED must be an integer, got {env!r}") from None
    return args


def run_config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("config", "verbose")}


# ---------------------------------------------------------------- commands


def _specs(args):
    if args.spec:
        with open(args.spec, encoding="utf-8") as fh:
            specs = [DomainSpec.from_dict(d) for d in json.load(fh)]
    else:
        specs = table2_preset()
    for name, prior in args.prior or []:
        idx = _domain_index(name, specs)
        total = args.total if getattr(args, "total", None) else sum(specs[idx].counts)
        specs[idx] = apply_prior(specs[idx], prior, total)
    return specs


def _domain_index(name, specs):
    names = [sp.name for sp in specs]
    if name in names:
        return names.index(name)
    try:
        idx = int(name) - 1
    except ValueError:
        raise ValueError(f"unknown domain {name!r}; known: {names}") from None
    if not 0 <= idx < len(specs):
        raise ValueError(f"domain index {name} out of range 1..{len(specs)}")
    return idx


def _write_text(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _load_train(paths):
    return concat([load_csv(p) for p in paths])


def cmd_gen(args):
    specs = _specs(args)
    data = generate_synthetic(specs, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for s, name in enumerate(data.domain_names):
        path = out / f"{name}.csv"
        write_csv(data.select_domains([s]), path)
        log.info("wrote %s", path)


def cmd_fit(args):
    hp = HyperParams(alpha=args.alpha, beta=args.beta, gamma=args.gamma,
                     epsilon=args.epsilon, components=args.components)
    data = _load_train(args.train)
    model = fit(data, args.sigma, hp, center_before_scatter=args.center_before_scatter)
    save_model(model, args.out)
    log.info("wrote %s (n=%d, q=%d)", args.out, data.n, model.q)
    _write_text("-", _dump({
        "n": data.n, "q": model.q, "sigma": model.sigma,
        "eigenvalues": model.eigenvalues, "measures": model.measures,
        "run_config": run_config(args),
    }))


def _align_labels(model, data):
    """Re-index ``data`` labels into the model's label space by name."""
    names = model.train.label_names
    lookup = {v: k for k, v in enumerate(names)}
    missing = sorted(set(data.label_names) - set(lookup))
    if missing:
        raise ValueError(f"labels {missing} not seen in training")
    labels = np.array([lookup[data.label_names[j]] for j in data.labels], dtype=np.int64)
    return type(data)(data.X, labels, data.domains, names, data.domain_names)


def cmd_transform(args):
    model = load_model(args.model)
    data = load_csv(args.data)
    rows = transform_target(model, data).rows
    lines = [",".join(f"z{k}" for k in range(model.q))]
    lines += [",".join(repr(float(v)) for v in r) for r in rows]
    _write_text(args.out, "\n".join(lines) + "\n")


def _constants(args):
    return BoundConstants(args.L_loss, args.U_loss, args.U_kx, args.U_kprime,
                          args.U_kgamma, args.L_kgamma, args.delta)


def cmd_eval(args):
    model = load_model(args.model)
    data = _align_labels(model, load_csv(args.data))
    rec = evaluate_model(model, data, with_bounds=args.bounds, constants=_constants(args))
    rec["run_config"] = run_config(args)
    _write_text(args.out, _dump(rec))


def cmd_bounds(args):
    k = _constants(args)
    if args.model and any(getattr(args, f) is not None for f in ("tr_bkb", "n", "m", "n_bar")):
        raise UsageError("bounds: --model conflicts with --tr-bkb/--n/--m/--n-bar")
    if args.model:
        rep = bound_report(load_model(args.model), k, centered=not args.raw_gram).to_dict()
    else:
        missing = [f for f in ("tr_bkb", "n", "m", "n_bar") if getattr(args, f) is None]
        if missing:
            raise UsageError("bounds: without --model, --tr-bkb, --n, --m and --n-bar are required")
        rep = {
            "tr_bkb": args.tr_bkb,
            "excess_risk_bound": excess_risk_bound(args.tr_bkb, args.n, k),
            "generalization_bound": generalization_bound(args.tr_bkb, args.m, args.n_bar, k),
            "constants": k.to_dict(), "n": args.n, "m": args.m, "n_bar": args.n_bar,
            "delta": k.delta,
        }
    _write_text(args.out, _dump(rep))


def cmd_project(args):
    model = load_model(args.model)
    emit_projection_csv(model, load_csv(args.data), args.out)


def _grid(args):
    if args.grid_file:
        with open(args.grid_file, encoding="utf-8") as fh:
            return Grid.from_dict(json.load(fh))
    return Grid.preset(args.grid)


def cmd_sweep(args):
    grid = _grid(args)
    threads = max(1, args.threads or os.cpu_count() or 1)
    if args.protocol == "synthetic" and args.train:
        raise UsageError("sweep: --train conflicts with --protocol synthetic")
    if args.protocol != "synthetic" and (args.spec or args.prior):
        raise UsageError(f"sweep: --spec/--prior conflict with --protocol {args.protocol}")
    if args.protocol == "synthetic":
        specs = _specs(args)
        sources = [int(s) - 1 for s in str(args.sources).split(",")]
        result = run_synthetic(grid, specs, args.seed, sources=sources, target=args.target - 1,
                               workers=threads)
    else:
        if not args.train:
            raise UsageError(f"sweep --protocol {args.protocol} requires --train")
        data = _load_train(args.train)
        if args.protocol == "kfold":
            result = run_source_kfold(data, grid, args.folds, args.seed, workers=threads)
        else:
            if not args.targets:
                raise UsageError("sweep --protocol lodo requires --targets")
            names = list(data.domain_names)
            targets = []
            for t in args.targets.split(","):
                if t not in names:
                    raise ValueError(f"unknown target domain {t!r}; known: {names}")
                targets.append(names.index(t))
            result = run_leave_domains_out(data, targets, grid, args.folds, args.seed,
                                           workers=threads)
    _write_text(args.out, result.to_jsonl(timing=args.timing))
    summary = result.summary()
    summary["run_config"] = run_config(args)
    summary_path = args.summary or str(Path(args.out).with_suffix(".summary.json"))
    _write_text(summary_path, _dump(summary))
    if args.model_out and result.model is not None:
        save_model(result.model, args.model_out)
    best = result.best
    if best is not None:
        log.info("best config %d: val=%.4f", best["index"], best["val_acc"])


HANDLERS = {
    "gen": cmd_gen, "fit": cmd_fit, "transform": cmd_transform, "eval": cmd_eval,
    "sweep": cmd_sweep, "bounds": cmd_bounds, "project": cmd_project,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        HANDLERS[args.command](args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (ValueError, OSError, ArithmeticError, KeyError) as exc:
        print(f"mda {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
