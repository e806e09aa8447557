"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
Results go to stdout (or the ``--out`` file); diagnostics go to stderr.
"""
import argparse
import csv
import logging
import os
import sys

import numpy as np

from . import datasets, estimator, experiments, io, sampler
from .baselines import scott_bandwidth
from .errors import CVDEError, DataError
from .geometry import Box, build_generator_table
from .kernels import KernelSpec
from .streams import substream

logger = logging.getLogger("cvde")

DEFAULT_VERSORS = 5000


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _float_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def _int_list(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}") from None


def _bandwidth(text):
    if text == "scott":
        return text
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("bandwidth must be a number or 'scott'") from None
    if not v > 0:
        raise argparse.ArgumentTypeError("bandwidth must be positive")
    return v


def _load(path):
    try:
        return datasets.load_matrix(path)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None


def _resolve_h(h, data):
    return scott_bandwidth(data) if h == "scott" else float(h)


def _write_rows(rows, fields, out):
    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for r in rows:
            w.writerow([repr(float(r[f])) if isinstance(r[f], (float, np.floating)) else r[f]
                        for f in fields])
    finally:
        if out:
            fh.close()


def cmd_gen_data(args):
    gen = datasets.gen_gaussian if args.dist == "gaussian" else datasets.gen_gaussian_mixture
    train = gen(args.n, args.m_train, substream(args.seed, "train"))
    test = gen(args.n, args.m_test, substream(args.seed, "test"))
    paths = [f"{args.out_prefix}_train.csv", f"{args.out_prefix}_test.csv"]
    for p, x in zip(paths, (train, test)):
        datasets.save_matrix(p, x)
    print("\n".join(paths))


def _kernel_from_args(args, n, data):
    box = None
    if args.box is not None:
        box = Box.cube(args.box[0], args.box[1], n)
    if args.kernel == "vde-box":
        if box is None:
            raise UsageError("--kernel vde-box requires --box LO HI")
        return KernelSpec.box_indicator(box)
    h = _resolve_h(args.h, data)
    if args.kernel == "uniform-ball":
        return KernelSpec.uniform_ball(h, n, box)
    return KernelSpec.gaussian(h, n, box)


def cmd_fit(args):
    data = _load(args.train)
    table = build_generator_table(data)
    kernel = _kernel_from_args(args, table.n, data)
    if args.scheme == "independent":
        model = estimator.fit_independent(table, kernel, args.versors, substream(args.seed, "directions"))
        model.meta = estimator.FitMeta(args.versors, args.seed, "independent", model.meta.zero_mass)
    else:
        dirs = estimator.sample_direction_set(args.versors, table.n, substream(args.seed, "directions"))
        model = estimator.fit(table, kernel, dirs)
        model.meta = estimator.FitMeta(args.versors, args.seed, "shared", model.meta.zero_mass)
    io.save_model(model, args.out)
    print(f"{args.out} n={table.n} m={table.m} kernel={kernel.ident} h={kernel.scale!r} "
          f"s={args.versors} zero_mass={len(model.meta.zero_mass)}")


def cmd_score(args):
    model = io.load_model(args.model)
    test = _load(args.test)
    if test.shape[1] != model.n:
        raise DataError(f"test data are {test.shape[1]}-dimensional, model is {model.n}-dimensional")
    mean, bad = estimator.score(model, test)
    print(f"avg_loglik {mean:.6f} k={test.shape[0]} neg_inf={bad}")
    if args.csv:
        new = not os.path.exists(args.csv) or os.path.getsize(args.csv) == 0
        with open(args.csv, "a", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if new:
                w.writerow(["model", "test", "k", "avg_loglik", "neg_inf"])
            w.writerow([args.model, args.test, test.shape[0], f"{mean:.6f}", bad])


def model_directions(model):
    """The direction set a saved model was fitted with (rebuilt from its seed)."""
    s = model.meta.num_versors or DEFAULT_VERSORS
    return estimator.sample_direction_set(s, model.n, substream(model.meta.seed, "directions"))


def cmd_sample(args):
    model = io.load_model(args.model)
    if not isinstance(model, estimator.DensityModel):
        raise DataError("sampling needs a CVDE model")
    if not model.kernel.compact:
        raise DataError("model kernel is not normalizable along unbounded chords (VDE without box)")
    dirs = None if args.fresh_directions else model_directions(model)
    z = sampler.sample(model, dirs, args.k, args.steps, substream(args.seed, "chains"),
                       fresh=args.fresh_directions)
    if args.out:
        datasets.save_matrix(args.out, z)
        print(f"{args.out} k={z.shape[0]} steps={args.steps}")
    else:
        datasets.save_matrix("/dev/stdout", z)


def cmd_benchmark(args):
    train = _load(args.train)
    test = _load(args.test)
    est = [e.strip() for e in args.estimators.split(",") if e.strip()]
    unknown = [e for e in est if e not in experiments.ESTIMATORS]
    if unknown:
        raise UsageError(f"unknown estimator(s): {', '.join(unknown)}")
    rows = experiments.compare_estimators(train, test, est, args.h_grid, args.runs, args.versors,
                                          args.seed, args.subsample)
    _write_rows(rows, ["estimator", "bandwidth", "run", "avg_loglik"], args.out)


def cmd_versor_sweep(args):
    train = _load(args.train)
    h = _resolve_h(args.h, train)
    rows = experiments.versor_sweep(train, h, args.s_grid, args.runs, args.seed)
    _write_rows(rows, ["s", "run", "avg_train_loglik"], args.out)


def build_parser():
    p = _Parser(prog="cvde", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen-data", help="generate synthetic train/test CSVs")
    g.add_argument("--dist", choices=["gaussian", "mixture"], required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m-train", type=int, default=1000)
    g.add_argument("--m-test", type=int, default=1000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out-prefix", required=True)
    g.set_defaults(func=cmd_gen_data)

    f = sub.add_parser("fit", help="fit a CVDE/VDE model")
    f.add_argument("--train", required=True)
    f.add_argument("--kernel", choices=["gaussian", "vde-box", "uniform-ball"], default="gaussian")
    f.add_argument("--h", type=_bandwidth, default="scott")
    f.add_argument("--box", type=float, nargs=2, metavar=("LO", "HI"))
    f.add_argument("--versors", type=int, default=DEFAULT_VERSORS)
    f.add_argument("--scheme", choices=["shared", "independent"], default="shared")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_fit)

    s = sub.add_parser("score", help="average test log-likelihood of a saved model")
    s.add_argument("--model", required=True)
    s.add_argument("--test", required=True)
    s.add_argument("--csv", help="append a result row to this CSV")
    s.set_defaults(func=cmd_score)

    h = sub.add_parser("sample", help="hit-and-run samples from a saved model")
    h.add_argument("--model", required=True)
    h.add_argument("--k", type=int, default=1000)
    h.add_argument("--steps", type=int, default=sampler.DEFAULT_STEPS)
    h.add_argument("--seed", type=int, default=0)
    h.add_argument("--fresh-directions", action="store_true",
                   help="draw a new direction every step instead of using the fitted pool")
    h.add_argument("--out")
    h.set_defaults(func=cmd_sample)

    b = sub.add_parser("benchmark", help="CVDE vs KDE vs AdaKDE over a bandwidth grid")
    b.add_argument("--train", required=True)
    b.add_argument("--test", required=True)
    b.add_argument("--estimators", default="cvde,kde,adakde")
    b.add_argument("--h-grid", type=_float_list, required=True)
    b.add_argument("--runs", type=int, default=5)
    b.add_argument("--versors", type=int, default=DEFAULT_VERSORS)
    b.add_argument("--subsample", type=float, default=0.5)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out")
    b.set_defaults(func=cmd_benchmark)

    v = sub.add_parser("versor-sweep", help="training log-likelihood as the versor count grows")
    v.add_argument("--train", required=True)
    v.add_argument("--h", type=_bandwidth, default="scott")
    v.add_argument("--s-grid", type=_int_list, default=[50, 500, 5000, 10000])
    v.add_argument("--runs", type=int, default=10)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out")
    v.set_defaults(func=cmd_versor_sweep)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"cvde: error: {exc}", file=sys.stderr)
        return 1
    except CVDEError as exc:
        print(f"cvde: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
