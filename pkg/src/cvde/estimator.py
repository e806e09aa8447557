"""Fitting and evaluating the compactified Voronoi density estimator.

Each cell gets a kernel mass vol_p = integral over C(p) of K(p, y) dy, estimated
by spherical integration around the generator:

    vol_p ~ |S^(n-1)| / s * sum_sigma  integral_0^{l_p(sigma)} K(t) t^(n-1) dt

The density at x is K(p, x) / (m vol_p) with p the nearest generator. All
volumes are kept as logs.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from . import geometry
from .accel import backend
from .errors import DataError
from .geometry import DirectionSet, GeneratorTable
from .kernels import KernelSpec, log_kernel, log_radial_mass, log_radial_mass_interval

logger = logging.getLogger(__name__)

# cap on the number of (generator, direction) entries held at once
_BLOCK_ENTRIES = 1 << 22


def log_sphere_area(n):
    """log of the surface area of the unit sphere in R^n."""
    return math.log(2.0) + 0.5 * n * math.log(math.pi) - math.lgamma(0.5 * n)


@dataclass(frozen=True)
class FitMeta:
    num_versors: int
    seed: Optional[int]
    scheme: str = "shared"
    zero_mass: tuple = ()


@dataclass
class DensityModel:
    table: GeneratorTable
    kernel: KernelSpec
    log_vols: np.ndarray
    meta: FitMeta = field(default_factory=lambda: FitMeta(0, None))

    @property
    def n(self):
        return self.table.n

    @property
    def m(self):
        return self.table.m

    def log_density(self, x):
        return log_density(self, x)


def sample_direction_set(s, n, seed=None) -> DirectionSet:
    """``s`` i.i.d. uniform unit vectors in R^n (normalized standard normals)."""
    if s < 1:
        raise DataError("need at least one direction")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((s, n))
    norms = np.linalg.norm(g, axis=1)
    while np.any(norms == 0.0):
        bad = norms == 0.0
        g[bad] = rng.standard_normal((int(bad.sum()), n))
        norms = np.linalg.norm(g, axis=1)
    return DirectionSet(g / norms[:, None], seed=seed)


def _row_blocks(m, s):
    step = max(1, _BLOCK_ENTRIES // max(s, 1))
    for lo in range(0, m, step):
        yield np.arange(lo, min(m, lo + step))


def _box_capped(table, box, dirs, rows, radii):
    t0, t1 = backend.box_interval(table.points[rows], dirs.dirs, box.lo, box.hi)
    return np.maximum(t0, 0.0), np.minimum(radii, t1)


def _log_ray_masses(kernel, table, dirs, rows, radii):
    if kernel.box is None:
        return log_radial_mass(kernel, radii)
    a, b = _box_capped(table, kernel.box, dirs, rows, radii)
    return log_radial_mass_interval(kernel, a, b)


def log_ray_masses(table: GeneratorTable, kernel: KernelSpec, dirs: DirectionSet, rows=None):
    """m x s matrix of log ray masses log integral K(t) t^(n-1) dt along each (p, sigma)."""
    rows = np.arange(table.m) if rows is None else np.asarray(rows)
    radii = geometry.cell_radii(table, dirs, rows)
    return _log_ray_masses(kernel, table, dirs, rows, radii)


def _check(table, kernel, dirs):
    if dirs.n != table.n:
        raise DataError(f"directions are {dirs.n}-dimensional, generators {table.n}-dimensional")
    if kernel.n != table.n:
        raise DataError(f"kernel is {kernel.n}-dimensional, generators {table.n}-dimensional")


def _finish(table, kernel, log_vols, s, seed, scheme):
    zero = tuple(int(i) for i in np.flatnonzero(log_vols == -np.inf))
    if zero:
        logger.warning("%d cell(s) received zero kernel mass", len(zero))
    return DensityModel(table, kernel, log_vols, FitMeta(s, seed, scheme, zero))


def fit_many(table: GeneratorTable, kernels: Sequence[KernelSpec], dirs: DirectionSet):
    """Fit several kernels on one tessellation, raycasting each cell only once."""
    for k in kernels:
        _check(table, k, dirs)
    s = dirs.s
    out = [np.empty(table.m) for _ in kernels]
    offset = log_sphere_area(table.n) - math.log(s)
    for rows in _row_blocks(table.m, s):
        radii = geometry.cell_radii(table, dirs, rows)
        for k, lv in zip(kernels, out):
            lm = _log_ray_masses(k, table, dirs, rows, radii)
            lv[rows] = offset + logsumexp(lm, axis=1)
    return [_finish(table, k, lv, s, dirs.seed, dirs.scheme) for k, lv in zip(kernels, out)]


def fit(table: GeneratorTable, kernel: KernelSpec, dirs: DirectionSet) -> DensityModel:
    """Estimate every cell's log kernel mass with one direction set shared by all cells."""
    return fit_many(table, [kernel], dirs)[0]


def fit_independent(table: GeneratorTable, kernel: KernelSpec, s, seed=None) -> DensityModel:
    """Like :func:`fit` but with a fresh direction set per generator.

    Costs O(n s m^2) instead of O(n s m + s m^2); meant for variance studies.
    """
    children = np.random.SeedSequence(seed).spawn(table.m)
    log_vols = np.empty(table.m)
    offset = log_sphere_area(table.n) - math.log(s)
    for p, child in enumerate(children):
        d = sample_direction_set(s, table.n, child)
        _check(table, kernel, d)
        log_vols[p] = offset + logsumexp(log_ray_masses(table, kernel, d, [p])[0])
    return _finish(table, kernel, log_vols, s, seed, "independent")


def log_volume_path(table: GeneratorTable, kernel: KernelSpec, dirs: DirectionSet, checkpoints):
    """Log volumes using the first ``c`` directions, for each ``c`` in ``checkpoints``.

    Returns a len(checkpoints) x m array; row i equals ``fit`` on
    ``dirs.dirs[:checkpoints[i]]`` up to summation order.
    """
    _check(table, kernel, dirs)
    cps = np.asarray(checkpoints, dtype=np.int64)
    if cps.min() < 1 or cps.max() > dirs.s:
        raise DataError(f"checkpoints must lie in [1, {dirs.s}]")
    out = np.empty((cps.size, table.m))
    area = log_sphere_area(table.n)
    for rows in _row_blocks(table.m, dirs.s):
        lm = log_ray_masses(table, kernel, dirs, rows)
        with np.errstate(invalid="ignore"):
            acc = np.logaddexp.accumulate(lm, axis=1)
        out[:, rows] = (acc[:, cps - 1] - np.log(cps)[None, :]).T + area
    return out


def log_density(model: DensityModel, x):
    """log f(x) = log K(p, x) - log m - log vol_p with p the nearest generator."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    xx = np.atleast_2d(x)
    if xx.shape[1] != model.n:
        raise DataError(f"query is {xx.shape[1]}-dimensional, model is {model.n}-dimensional")
    idx = geometry.nearest_generator(xx, model.table)
    lv = model.log_vols[idx]
    with np.errstate(invalid="ignore"):
        out = log_kernel(model.kernel, model.table.points[idx], xx) - math.log(model.m) - lv
    out = np.where(lv == -np.inf, -np.inf, out)
    out = np.where(np.isnan(out), -np.inf, out)
    return float(out[0]) if single else out


def score(model, testpoints):
    """(mean log-likelihood, number of points with zero density)."""
    x = np.asarray(testpoints, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise DataError("test set must be a non-empty k x n matrix")
    ll = np.asarray(model.log_density(x), dtype=np.float64)
    bad = int(np.sum(ll == -np.inf))
    if bad:
        logger.warning("%d test point(s) have zero density", bad)
        return -np.inf, bad
    return float(np.mean(ll)), 0


def avg_log_likelihood(model, testpoints) -> float:
    """Mean of log_density over the rows of ``testpoints`` (-inf if any point has zero density)."""
    return score(model, testpoints)[0]


def max_mixture_log_density(table: GeneratorTable, kernel: KernelSpec, x):
    """log(max_p K(p, x)) - log m."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    xx = np.atleast_2d(x)
    lk = log_kernel(kernel, table.points[None, :, :], xx[:, None, :])
    out = lk.max(axis=1) - math.log(table.m)
    return float(out[0]) if single else out
