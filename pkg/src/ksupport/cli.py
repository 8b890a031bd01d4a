"""Command-line interface: ``ksupport {norm,dualnorm,prox,fit,gridfit,synthetic}``.

Exit codes: 0 success, 2 usage or validation error, 3 I/O error, 4 numeric
failure (solver divergence or a failed split search).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from ._common import DivergenceError, InconsistencyError
from .data import DataFormatError, SyntheticSpec, load_csv, load_svmlight, standardize
from .norms import elastic_dual_norm, elastic_norm, ksup_dual_norm, ksup_norm
from .prox import prox_ksup_sq
from .selection import GridSpec, grid_search, mse, run_synthetic_experiment
from .solver import ElasticNet, FitConfig, KSupport, Lasso, SolverOptions, fit

EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 2, 3, 4


class UsageError(ValueError):
    pass


def fmt(x):
    """12 significant digits, locale independent, no negative zero."""
    s = format(float(x), ".12g")
    return "0" if s == "-0" else s


def parse_vector(text):
    """Comma-separated reals, or ``@path`` to read them from a file."""
    if text.startswith("@"):
        with open(text[1:]) as fh:
            text = fh.read()
    parts = [p for p in text.replace("\n", ",").replace(" ", ",").split(",") if p]
    if not parts:
        raise UsageError("empty vector")
    try:
        return np.array([float(p) for p in parts])
    except ValueError as exc:
        raise UsageError(f"cannot parse vector: {exc}") from None


def parse_exponents(text):
    """``"-15:5"`` (inclusive range) or a comma list of integers."""
    try:
        if ":" in text:
            lo, hi = text.split(":")
            return list(range(int(lo), int(hi) + 1))
        return [int(p) for p in text.split(",") if p]
    except ValueError:
        raise UsageError(f"bad exponent list {text!r}") from None


def _k_arg(args, d, real=False):
    if args.k is None:
        raise UsageError("--k is required")
    k = float(args.k)
    if not real and not k.is_integer():
        raise UsageError(f"k must be an integer, got {args.k}")
    if not 1 <= k <= d:
        raise UsageError(f"k out of range: need 1 <= k <= {d}, got {args.k}")
    return k if real else int(k)


def cmd_norm(args):
    w = parse_vector(args.vector)
    if args.elastic:
        print(fmt(elastic_norm(w, _k_arg(args, w.size, real=True))))
    else:
        b = ksup_norm(w, _k_arg(args, w.size))
        print(f"{fmt(b.value)} r={b.r}")


def cmd_dualnorm(args):
    u = parse_vector(args.vector)
    if args.elastic:
        print(fmt(elastic_dual_norm(u, _k_arg(args, u.size, real=True), tol=args.tol)))
    else:
        print(fmt(ksup_dual_norm(u, _k_arg(args, u.size))))


def cmd_prox(args):
    v = parse_vector(args.vector)
    k = _k_arg(args, v.size)
    if not args.beta > 0:
        raise UsageError("--beta must be positive")
    print(",".join(fmt(x) for x in prox_ksup_sq(v, k, args.beta)))


def _load(path, args):
    if args.format == "svmlight":
        return load_svmlight(path)
    label = args.label_column
    try:
        label = int(label)
    except ValueError:
        pass
    return load_csv(path, has_header=not args.no_header, label_column=label)


def _load_splits(args):
    train = _load(args.train, args)
    val = _load(args.val, args) if args.val else None
    if val is not None and val.d != train.d:
        raise UsageError(f"validation file has {val.d} features, training file {train.d}")
    if args.standardize:
        splits, _ = standardize(train, [val] if val is not None else [])
        train, val = splits[0], (splits[1] if val is not None else None)
    return train, val


def _penalty_from_args(args, d):
    if args.method == "ksupport":
        if args.lam is None:
            raise UsageError("--lambda is required for ksupport")
        return KSupport(_k_arg(args, d), args.lam)
    if args.method == "lasso":
        if args.lam is None:
            raise UsageError("--lambda is required for lasso")
        return Lasso(args.lam)
    if args.lam1 is None or args.lam2 is None:
        raise UsageError("--lambda1 and --lambda2 are required for elastic")
    return ElasticNet(args.lam1, args.lam2)


def _write_json(path, doc):
    text = json.dumps(doc, indent=1, sort_keys=True) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _config_echo(args):
    skip = {"func", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def cmd_fit(args):
    train, val = _load_splits(args)
    penalty = _penalty_from_args(args, train.d)
    try:
        cfg = FitConfig(penalty, max_iters=args.max_iters, rel_tol=args.tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    res = fit(train, cfg)
    trace = res.objective_trace
    doc = {
        "coefficients": [fmt(x) for x in res.w],
        "feature_names": list(train.feature_names) if train.feature_names else None,
        "objective": {"initial": fmt(trace[0]), "final": fmt(trace[-1]),
                      "best": fmt(trace.min()), "length": int(trace.size)},
        "iterations": res.iterations,
        "converged": res.converged,
        "L_used": fmt(res.L_used),
        "train_mse": fmt(mse(res.w, train)),
        "val_mse": fmt(mse(res.w, val)) if val is not None else None,
        "config": _config_echo(args),
    }
    _write_json(args.out, doc)


def cmd_gridfit(args):
    train, val = _load_splits(args)
    if val is None:
        raise UsageError("gridfit needs --val")
    ks = None
    if args.k_values:
        ks = parse_exponents(args.k_values)
    grid = GridSpec(args.method, k_values=ks,
                    lambda_exponents=parse_exponents(args.lambda_exponents),
                    lambda2_exponents=(parse_exponents(args.lambda2_exponents)
                                       if args.lambda2_exponents else None))
    try:
        grid.cells(train.d)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    best, cells = grid_search(train, val, grid,
                              SolverOptions(max_iters=args.max_iters, rel_tol=args.tol))
    chosen = next(c for c in cells if c.params == best)
    doc = {
        "selected": best,
        "val_mse": fmt(chosen.val_error),
        "coefficients": [fmt(x) for x in chosen.w],
        "cells": [{"params": c.params,
                   "val_mse": fmt(c.val_error) if c.error is None else None,
                   "iterations": c.iterations, "error": c.error} for c in cells],
        "config": _config_echo(args),
    }
    _write_json(args.out, doc)


def cmd_synthetic(args):
    if args.reps < 1:
        raise UsageError("--reps must be >= 1")
    try:
        spec = SyntheticSpec(within_group_noise_sd=args.sigma)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    progress = None
    if args.verbose:
        progress = lambda i, n: print(f"replication {i}/{n}", file=sys.stderr)  # noqa: E731
    report = run_synthetic_experiment(
        spec, n_reps=args.reps, master_seed=args.seed,
        solver_cfg=SolverOptions(max_iters=args.max_iters, rel_tol=args.tol),
        n_jobs=args.jobs, progress=progress)
    report.save(args.out_dir)
    print(report.table())


def build_parser():
    p = argparse.ArgumentParser(prog="ksupport", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def vec(sp_):
        sp_.add_argument("--vector", required=True,
                         help="comma-separated reals or @file (use --vector=-1,2 "
                              "when the first entry is negative)")

    s = sub.add_parser("norm", help="k-support norm (or elastic-net norm with --elastic)")
    vec(s)
    s.add_argument("--k", required=True)
    s.add_argument("--elastic", action="store_true")
    s.set_defaults(func=cmd_norm)

    s = sub.add_parser("dualnorm", help="dual of the k-support (or elastic-net) norm")
    vec(s)
    s.add_argument("--k", required=True)
    s.add_argument("--elastic", action="store_true")
    s.add_argument("--tol", type=float, default=1e-10)
    s.set_defaults(func=cmd_dualnorm)

    s = sub.add_parser("prox", help="prox of (beta/2) * squared k-support norm")
    vec(s)
    s.add_argument("--k", required=True)
    s.add_argument("--beta", type=float, required=True)
    s.set_defaults(func=cmd_prox)

    def data_opts(sp_):
        sp_.add_argument("--train", required=True)
        sp_.add_argument("--val")
        sp_.add_argument("--method", choices=("ksupport", "lasso", "elastic"), required=True)
        sp_.add_argument("--format", choices=("csv", "svmlight"), default="csv")
        sp_.add_argument("--label-column", default="-1",
                         help="CSV label column: index or header name (default: last)")
        sp_.add_argument("--no-header", action="store_true")
        sp_.add_argument("--standardize", action="store_true")
        sp_.add_argument("--max-iters", type=int, default=50_000)
        sp_.add_argument("--tol", type=float, default=1e-8)
        sp_.add_argument("--out", default="-")

    s = sub.add_parser("fit", help="fit one model")
    data_opts(s)
    s.add_argument("--k")
    s.add_argument("--lambda", dest="lam", type=float)
    s.add_argument("--lambda1", dest="lam1", type=float)
    s.add_argument("--lambda2", dest="lam2", type=float)
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("gridfit", help="grid search on a validation split")
    data_opts(s)
    s.add_argument("--k-values", help="e.g. 1:40 or 5,10,15 (default 1..d)")
    s.add_argument("--lambda-exponents", default="-15:5",
                   help="lambda = 10**e; lo:hi or a list (write --lambda-exponents=-3:1 "
                        "when the value starts with '-')")
    s.add_argument("--lambda2-exponents", help="elastic net lambda2 exponents (default: same)")
    s.set_defaults(func=cmd_gridfit)

    s = sub.add_parser("synthetic", help="replicate the grouped-feature experiment")
    s.add_argument("--reps", type=int, default=50)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--sigma", type=float, default=0.1,
                   help="within-group feature noise SD")
    s.add_argument("--out-dir", required=True)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--max-iters", type=int, default=50_000)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("-v", "--verbose", action="store_true")
    s.set_defaults(func=cmd_synthetic)
    return p


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (UsageError, DataFormatError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DivergenceError, InconsistencyError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
