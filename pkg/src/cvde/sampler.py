"""Hit-and-run sampling from a fitted density model.

Each chain picks a home cell uniformly and stays in it: a step draws a
direction, finds the chord of the cell through the current point (using only
cached inner products <z, q>), and redraws the point from the kernel restricted
to that chord. <z, q> is updated incrementally by t <sigma, q> and re-synced
from scratch every ``RESYNC_EVERY`` steps.
"""
import logging
from dataclasses import dataclass

import numpy as np

from .accel import backend
from .errors import DataError
from .estimator import DensityModel
from .geometry import DirectionSet, cell_radii
from .kernels import open_uniform

logger = logging.getLogger(__name__)

RESYNC_EVERY = 256
DEFAULT_STEPS = 1000
_MAX_RETRIES = 100


@dataclass
class ChainState:
    """View of one chain inside a :class:`Chains` batch."""

    z: np.ndarray
    home: int
    z_gram: np.ndarray
    steps_done: int


class Chains:
    """A batch of independent hit-and-run walkers stored as arrays.

    Attributes:
        z: k x n current positions.
        home: length-k generator index of each chain's cell.
        z_gram: k x m cached inner products <z, q>.
        steps_done: number of steps applied to the batch.
        rng: stream driving direction and position draws.
        degenerate: number of direction redraws caused by zero-length chords.
    """

    def __init__(self, z, home, z_gram, rng):
        self.z = z
        self.home = home
        self.z_gram = z_gram
        self.rng = rng
        self.steps_done = 0
        self.degenerate = 0

    def __len__(self):
        return self.z.shape[0]

    def __getitem__(self, i) -> ChainState:
        return ChainState(self.z[i], int(self.home[i]), self.z_gram[i], self.steps_done)

    def resync(self, points):
        self.z_gram = np.ascontiguousarray(self.z @ points.T)


def _check_samplable(model: DensityModel):
    kernel = model.kernel
    if not kernel.compact:
        raise DataError("uniform kernel without a bounded box is not normalizable; cannot sample")


def _inside_starts(model: DensityModel, rows, dirs: DirectionSet):
    """A point of C(p) inside the box for each generator p in ``rows``.

    Takes the midpoint of the longest in-box segment of the cell along the
    directions of ``dirs``; the segment starts at p, the cell is convex, so
    the midpoint stays in the cell.
    """
    table = model.table
    box = model.kernel.box
    radii = cell_radii(table, dirs, rows)
    t0, t1 = backend.box_interval(table.points[rows], dirs.dirs, box.lo, box.hi)
    a = np.maximum(t0, 0.0)
    b = np.minimum(radii, t1)
    length = np.where(b > a, b - a, -np.inf)
    best = length.argmax(axis=1)
    r = np.arange(len(rows))
    if np.any(length[r, best] == -np.inf):
        raise DataError("a cell with positive mass has no segment inside the box")
    mid = 0.5 * (a[r, best] + b[r, best])
    return table.points[rows] + mid[:, None] * dirs.dirs[best]


def init_chains(model: DensityModel, k, seed=None, dirs: DirectionSet = None) -> Chains:
    """Start ``k`` chains in uniformly chosen cells (cells with zero mass excluded).

    Chains start at their generator. When the kernel carries a box and the
    generator lies outside it, the chain starts at a point of the cell inside
    the box found along ``dirs`` (a fresh set of 2048 directions if omitted).
    """
    if k <= 0:
        raise DataError("number of chains must be positive")
    _check_samplable(model)
    rng = np.random.default_rng(seed)
    table = model.table
    live = np.flatnonzero(model.log_vols > -np.inf)
    if live.size == 0:
        raise DataError("every cell has zero mass")
    if live.size == table.m:
        home = rng.integers(table.m, size=k)
    else:
        home = live[rng.integers(live.size, size=k)]
    home = home.astype(np.int64)
    z = table.points[home].copy()
    zg = np.ascontiguousarray(table.gram[home])
    box = model.kernel.box
    if box is not None:
        used = np.unique(home)
        out = used[~box.contains(table.points[used])]
        if out.size:
            if dirs is None:
                g = rng.standard_normal((2048, table.n))
                dirs = DirectionSet(g / np.linalg.norm(g, axis=1)[:, None])
            starts = _inside_starts(model, out, dirs)
            pos = np.searchsorted(out, home)
            moved = (pos < out.size) & (out[np.minimum(pos, out.size - 1)] == home)
            z[moved] = starts[pos[moved]]
            zg[moved] = z[moved] @ table.points.T
    return Chains(z, home, np.ascontiguousarray(zg), rng)


def _kernel_args(model):
    kern = model.kernel
    box = kern.box
    n = model.n
    blo = box.lo if box is not None else np.full(n, -np.inf)
    bhi = box.hi if box is not None else np.full(n, np.inf)
    return kern.code, float(kern.h), float(kern.radius), blo, bhi, box is not None


def _fresh_directions(rng, k, n):
    g = rng.standard_normal((k, n))
    return g / np.linalg.norm(g, axis=1)[:, None]


def step(chains: Chains, model: DensityModel, dirs: DirectionSet, fresh=False):
    """Advance every chain by one hit-and-run move (in place); returns ``chains``.

    With ``fresh=True`` each chain draws a new uniform direction instead of
    picking one from ``dirs``.
    """
    table = model.table
    kargs = _kernel_args(model)
    rng = chains.rng
    k = len(chains)
    todo = np.arange(k)
    for attempt in range(_MAX_RETRIES):
        kk = todo.size
        if fresh:
            d = _fresh_directions(rng, kk, table.n)
            sg = np.ascontiguousarray(d @ table.points.T)
            idx = np.arange(kk)
        else:
            d = dirs.dirs
            sg = dirs.gram(table)
            idx = rng.integers(dirs.s, size=kk)
        u = open_uniform(rng, kk)
        if kk == k:
            z, zg, home = chains.z, chains.z_gram, chains.home
        else:
            z = chains.z[todo]
            zg = chains.z_gram[todo]
            home = chains.home[todo]
        _, bad = backend.hr_step(z, zg, home, table.points, table.sq_norms, sg, d, idx, u, *kargs)
        if kk != k:
            chains.z[todo] = z
            chains.z_gram[todo] = zg
        bad = bad.astype(bool)
        if not bad.any():
            break
        chains.degenerate += int(bad.sum())
        todo = todo[bad]
    else:
        logger.warning("%d chain(s) kept hitting degenerate chords", todo.size)
    chains.steps_done += 1
    if chains.steps_done % RESYNC_EVERY == 0:
        chains.resync(table.points)
    return chains


def sample(model: DensityModel, dirs: DirectionSet, k, steps=DEFAULT_STEPS, seed=None, fresh=False):
    """Run ``k`` independent chains for ``steps`` moves and return their final positions."""
    if not fresh:
        if dirs.n != model.n:
            raise DataError("direction set dimension does not match the model")
        if not dirs.spans():
            raise DataError("direction set does not span R^n; hit-and-run would not be ergodic")
    chains = init_chains(model, k, seed, dirs)
    for _ in range(steps):
        step(chains, model, dirs, fresh=fresh)
    return chains.z
