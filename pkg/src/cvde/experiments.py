"""Benchmark sweeps: estimator comparison over bandwidths and versor-count stabilization."""
import logging
import math

import numpy as np

from . import estimator
from .baselines import fit_adakde, fit_kde
from .datasets import subsample
from .errors import DataError
from .geometry import build_generator_table
from .kernels import KernelSpec
from .streams import substream

logger = logging.getLogger(__name__)

ESTIMATORS = ("cvde", "kde", "adakde")


def compare_estimators(train, test, estimators=ESTIMATORS, h_grid=(1.0,), runs=5, versors=5000,
                       seed=0, subsample_fraction=0.5, resample=None):
    """Average test log-likelihood for every (estimator, bandwidth, run).

    Each run draws its own training subsample and direction set. ``resample``
    may be a callable ``run -> (train, test)`` replacing the fixed data (fresh
    synthetic draws per run). Returns a list of dict rows.
    """
    bad = [e for e in estimators if e not in ESTIMATORS]
    if bad:
        raise DataError(f"unknown estimator(s): {', '.join(bad)}")
    rows = []
    for run in range(runs):
        if resample is not None:
            tr, te = resample(run)
        else:
            tr, te = train, test
        if subsample_fraction < 1.0:
            tr = subsample(tr, subsample_fraction, substream(seed, "splits", run))
        table = build_generator_table(tr)
        if te.shape[1] != table.n:
            raise DataError("train and test dimensions differ")
        scores = {}
        if "cvde" in estimators:
            dirs = estimator.sample_direction_set(versors, table.n, substream(seed, "directions", run))
            kernels = [KernelSpec.gaussian(h, table.n) for h in h_grid]
            for h, model in zip(h_grid, estimator.fit_many(table, kernels, dirs)):
                scores["cvde", h] = estimator.avg_log_likelihood(model, te)
        for h in h_grid:
            if "kde" in estimators:
                scores["kde", h] = estimator.avg_log_likelihood(fit_kde(table, h), te)
            if "adakde" in estimators:
                scores["adakde", h] = estimator.avg_log_likelihood(fit_adakde(table, h), te)
        for est in estimators:
            for h in h_grid:
                rows.append({"estimator": est, "bandwidth": float(h), "run": run,
                             "avg_loglik": scores[est, h]})
        logger.info("run %d done", run)
    return rows


def versor_sweep(train, h, s_grid, runs=10, seed=0):
    """Average training log-likelihood of the gaussian model as the versor count grows.

    Each run draws max(s_grid) directions; smaller counts use a prefix of the
    same draw. Returns a list of dict rows (s, run, avg_train_loglik).
    """
    table = build_generator_table(train)
    kernel = KernelSpec.gaussian(h, table.n)
    s_grid = [int(s) for s in s_grid]
    rows = []
    for run in range(runs):
        dirs = estimator.sample_direction_set(max(s_grid), table.n, substream(seed, "directions", run))
        path = estimator.log_volume_path(table, kernel, dirs, s_grid)
        for s, lv in zip(s_grid, path):
            model = estimator.DensityModel(table, kernel, lv, estimator.FitMeta(s, seed))
            rows.append({"s": s, "run": run, "avg_train_loglik": estimator.avg_log_likelihood(model, train)})
    return rows


def log_grid(lo, hi, count):
    return [float(v) for v in np.geomspace(lo, hi, count)]


def summarize(rows, key, value):
    """Mean and std of ``value`` grouped by the tuple of ``key`` fields."""
    groups = {}
    for r in rows:
        groups.setdefault(tuple(r[k] for k in key), []).append(r[value])
    out = {}
    for g, vals in groups.items():
        v = np.asarray(vals, dtype=float)
        out[g] = (float(v.mean()), float(v.std(ddof=1)) if v.size > 1 else math.nan)
    return out
