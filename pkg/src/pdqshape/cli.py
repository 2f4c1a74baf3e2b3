"""Command-line interface: ``pdq <command> ...``.

Commands
--------
pdq        write a pdQ curve as CSV ``u,pdq``
fit        fit a shape family to data, JSON out
symmetry   closest symmetric density, JSON out plus optional CSV curves
tails      tail classification of a model pdQ, JSON out
simulate   Monte Carlo comparison of fitting methods from a JSON config
distance   Hellinger distance or KL divergence between two pdQs

Exit status is 0 on success, 2 for usage errors, 3 for unreadable input
and 4 for numerical failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import warnings

import numpy as np

from . import __version__
from .datasets import ParseError, load_wool, read_frequency_csv, read_sample
from .divergence import METRICS
from .dists import LATTICE_FAMILIES, lattice_pdq, make_lattice, make_model, pdq
from .estimate import SMOOTH_M, BandwidthRule, empirical_pdq_discrete, empirical_pdq_smooth
from .exceptions import NonSquareIntegrable, PdqError, UnknownFamily
from .fit import DEFAULT_GRIDS, fit
from .grid import midpoints
from .shape import CRITERIA, classify_tail, closest_symmetric
from .simulation import parse_source, run_simulation

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_NUMERIC = 0, 2, 3, 4
MODEL_M = 1000

log = logging.getLogger("pdqshape")


class UsageError(Exception):
    pass


# --- formatting ----------------------------------------------------------------------

def _fmt(x) -> str:
    return f"{x:.10g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(_fmt(x))
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _dump_json(obj, out):
    json.dump(_jsonable(obj), out, indent=2, sort_keys=True)
    out.write("\n")


def _write_csv(path, header, columns):
    lines = [header] + [",".join(_fmt(v) for v in row) for row in zip(*columns)]
    text = "\n".join(lines) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# --- inputs ---------------------------------------------------------------------------

def _params(text):
    if text is None or text == "":
        return ()
    try:
        return tuple(float(p) for p in text.split(","))
    except ValueError:
        raise UsageError(f"cannot parse parameters {text!r}") from None


def _add_data_args(p, model=True):
    src = p.add_mutually_exclusive_group(required=True)
    if model:
        src.add_argument("--family", help="continuous model family, e.g. lognormal")
        src.add_argument("--lattice", choices=sorted(LATTICE_FAMILIES),
                         help="lattice family")
    src.add_argument("--sample", metavar="FILE", help="raw sample, one value per line")
    src.add_argument("--freq", metavar="FILE", help="frequency CSV with rows value,count")
    src.add_argument("--wool", action="store_true", help="bundled wool fibre diameters")
    if model:
        p.add_argument("--params", help="comma-separated shape parameters")
    p.add_argument("--trim-outliers", action="store_true",
                   help="with --wool, drop the two 52s and the 54")
    p.add_argument("--rule", choices=("cauchy", "lognormal"),
                   help="bandwidth reference (default: lognormal for positive data)")
    p.add_argument("--estimator", choices=("smooth", "discrete"), default="smooth",
                   help="empirical pdQ estimator for data inputs")
    p.add_argument("-m", type=int, default=None,
                   help=f"grid size (default {MODEL_M} for models, {SMOOTH_M} for data)")


def _load_sample(args):
    if args.trim_outliers and not args.wool:
        raise UsageError("--trim-outliers only applies to --wool")
    if args.wool:
        return load_wool(trim_outliers=args.trim_outliers)
    if args.freq:
        return read_frequency_csv(args.freq)
    return read_sample(args.sample)


def _empirical(s, estimator, rule, m):
    m = m or SMOOTH_M
    if estimator == "discrete":
        return empirical_pdq_discrete(s, m)
    return empirical_pdq_smooth(s, None if rule is None else BandwidthRule(rule, s.n), m)


def _grid_from_args(args):
    """(grid density, pointwise model or None) for the selected input."""
    if getattr(args, "family", None):
        model = make_model(args.family, _params(args.params))
        return pdq(model, args.m or MODEL_M), model
    if getattr(args, "lattice", None):
        return lattice_pdq(make_lattice(args.lattice, _params(args.params)), args.m or MODEL_M), None
    return _empirical(_load_sample(args), args.estimator, args.rule, args.m), None


def _source_grid(operand, m):
    """Grid pdQ for a ``distance`` operand such as ``poisson:4`` or ``freq=path``."""
    operand = operand.strip()
    if operand.startswith("sample="):
        return empirical_pdq_smooth(read_sample(operand[7:]), None, m)
    if operand.startswith("freq="):
        return empirical_pdq_smooth(read_frequency_csv(operand[5:]), None, m)
    if operand in ("wool", "wool-trimmed"):
        return empirical_pdq_smooth(load_wool(operand == "wool-trimmed"), None, m)
    name, _, rest = operand.partition(":")
    params = _params(rest)
    if name.lower() in LATTICE_FAMILIES:
        return lattice_pdq(make_lattice(name, params), m)
    return pdq(make_model(name, params), m)


# --- commands -------------------------------------------------------------------------

def cmd_pdq(args):
    g, model = _grid_from_args(args)
    u = midpoints(g.m)
    values = model.pdq(u) if model is not None else g.values
    _write_csv(args.output, "u,pdq", [u, values])


def cmd_fit(args):
    s = _load_sample(args)
    family = args.family_name
    methods = ("hpdq", "ppcc", "mle") if args.method == "all" else (args.method,)
    if args.method == "all" and family.lower() not in ("weibull", "gamma"):
        methods = ("hpdq", "ppcc")
    g = _empirical(s, "smooth", args.rule, args.m)
    kwargs = {"empirical": g}
    if args.coarse:
        c = _params(args.coarse)
        if len(c) != 3:
            raise UsageError("--coarse needs lo,hi,step")
        kwargs["coarse"] = c
    if args.fine_step:
        kwargs["fine_step"] = args.fine_step
    results = [fit(s, family, method, **dict(kwargs)).as_dict() for method in methods]
    _dump_json(results[0] if len(results) == 1 else {"n": s.n, "fits": results}, sys.stdout)


def cmd_symmetry(args):
    g, _ = _grid_from_args(args)
    proj = closest_symmetric(g, args.criterion)
    out = {"criterion": proj.criterion, "value": proj.value}
    if proj.c_opt is not None:
        out["c_opt"] = proj.c_opt
    _dump_json(out, sys.stdout)
    if args.output:
        _write_csv(args.output, "u,pdq,pdq_symm", [g.u, g.values, proj.density.values])


def cmd_tails(args):
    model = make_model(args.family, _params(args.params))
    sides = ("left", "right") if args.side == "both" else (args.side,)
    reports = {side: classify_tail(model, side).as_dict() for side in sides}
    _dump_json(reports[sides[0]] if len(sides) == 1 else reports, sys.stdout)


def cmd_simulate(args):
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(str(exc), args.config) from None
    try:
        cfg = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, args.config, exc.lineno) from None
    if not isinstance(cfg, dict) or "source" not in cfg:
        raise UsageError("simulation config needs a 'source' entry, e.g. \"tukey:-1\"")
    unknown = set(cfg) - {"source", "family", "methods", "n", "replications", "seed"}
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    sources = cfg["source"] if isinstance(cfg["source"], list) else [cfg["source"]]
    seed = int(os.environ.get("PDQ_SEED", cfg.get("seed", 0)))
    chunks = []
    for i, text in enumerate(sources):
        try:
            source = parse_source(text)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        report = run_simulation(source, cfg.get("family"),
                                tuple(cfg.get("methods", ("hpdq", "ppcc"))),
                                int(cfg.get("n", 500)), int(cfg.get("replications", 25)),
                                seed, args.n_jobs)
        csv_text = report.to_csv()
        chunks.append(csv_text if i == 0 else csv_text.split("\n", 1)[1])
    text = "".join(chunks)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_distance(args):
    m = args.m or MODEL_M
    a, b = _source_grid(args.a, m), _source_grid(args.b, m)
    print(_fmt(METRICS[args.metric](a, b)))


# --- parser -----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pdq", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pdq", help="write a pdQ curve as CSV")
    _add_data_args(p)
    p.add_argument("-o", "--output", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_pdq)

    p = sub.add_parser("fit", help="fit a shape family to data")
    _add_data_args(p, model=False)
    p.add_argument("--family", dest="family_name", required=True,
                   help=f"shape family ({', '.join(sorted(DEFAULT_GRIDS))} have default grids)")
    p.add_argument("--method", choices=("hpdq", "ppcc", "mle", "all"), default="hpdq")
    p.add_argument("--coarse", help="coarse grid lo,hi,step")
    p.add_argument("--fine-step", type=float)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("symmetry", help="closest symmetric density")
    _add_data_args(p)
    p.add_argument("--criterion", default="hellinger",
                   choices=CRITERIA + ("kl_a", "kl_b", "j"))
    p.add_argument("-o", "--output", help="CSV path for u,pdq,pdq_symm")
    p.set_defaults(func=cmd_symmetry)

    p = sub.add_parser("tails", help="classify the tails of a model pdQ")
    p.add_argument("--family", required=True)
    p.add_argument("--params")
    p.add_argument("--side", choices=("left", "right", "both"), default="right")
    p.set_defaults(func=cmd_tails)

    p = sub.add_parser("simulate", help="Monte Carlo comparison of fitting methods")
    p.add_argument("config", help="JSON file with source, family, methods, n, "
                                  "replications and seed")
    p.add_argument("-o", "--output", help="CSV path (default stdout)")
    p.add_argument("--n-jobs", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("distance", help="distance between two pdQs")
    p.add_argument("a", help="e.g. poisson:4, normal, tukey:-1, sample=FILE, freq=FILE, wool")
    p.add_argument("b")
    p.add_argument("--metric", choices=sorted(METRICS), default="hellinger")
    p.add_argument("-m", type=int, default=None, help=f"grid size (default {MODEL_M})")
    p.set_defaults(func=cmd_distance)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    with warnings.catch_warnings():
        if not args.verbose:
            warnings.simplefilter("ignore")
        return _run(args)


def _run(args) -> int:
    try:
        args.func(args)
    except (UsageError, UnknownFamily, NonSquareIntegrable) as exc:
        print(f"pdq {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, OSError) as exc:
        print(f"pdq {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PdqError as exc:
        print(f"pdq {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"pdq {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
