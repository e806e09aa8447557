"""Nearest-generator queries and directional radii on a Voronoi tessellation.

Cells are never built explicitly. Everything reduces to rays: from a point
``z`` inside the cell of ``p`` along a unit direction ``sigma``, the bisector
with another generator ``q`` is hit at

    t_q = (<q,q> - <p,p> - 2<z,q> + 2<z,p>) / (2<sigma,q> - 2<sigma,p>)

and the cell boundary is the smallest positive ``t_q``. Inner products with
the generators are precomputed once (:class:`GeneratorTable`, and
:meth:`DirectionSet.gram` for the directions) so each ray costs O(m).
"""
import logging
from dataclasses import dataclass

import numpy as np

from .accel import backend
from .errors import DataError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GeneratorTable:
    """Generators with their Gram matrix and squared norms."""

    points: np.ndarray
    sq_norms: np.ndarray
    gram: np.ndarray
    duplicates_removed: int = 0

    @property
    def m(self):
        return self.points.shape[0]

    @property
    def n(self):
        return self.points.shape[1]


def build_generator_table(points) -> GeneratorTable:
    """Deduplicate ``points`` (first occurrence kept) and precompute inner products."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None] if pts.size else pts.reshape(0, 1)
    if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
        raise DataError("generator set is empty")
    if not np.isfinite(pts).all():
        raise DataError("generator coordinates must be finite")
    _, first = np.unique(pts, axis=0, return_index=True)
    keep = np.sort(first)
    dropped = pts.shape[0] - keep.size
    if dropped:
        logger.warning("removed %d duplicate generator(s)", dropped)
        pts = pts[keep]
    pts = np.ascontiguousarray(pts)
    gram = pts @ pts.T
    sq = np.einsum("ij,ij->i", pts, pts)
    # keep the diagonal bit-identical to the norms
    gram[np.diag_indices_from(gram)] = sq
    close = _unresolvable_pairs(gram, sq)
    if close.size:
        drop = set()
        for i, j in close:
            if i not in drop:
                drop.add(int(j))
        keep = np.array([i for i in range(pts.shape[0]) if i not in drop])
        logger.warning("merged %d generator(s) too close to another to be resolved", len(drop))
        pts = np.ascontiguousarray(pts[keep])
        gram = np.ascontiguousarray(gram[np.ix_(keep, keep)])
        sq = sq[keep]
        dropped += len(drop)
    return GeneratorTable(pts, sq, gram, dropped)


_RESOLVE = 1024 * np.finfo(np.float64).eps


def _unresolvable_pairs(gram, sq, block=1024):
    """Pairs (i < j) whose squared distance is lost to cancellation in the Gram form."""
    m = sq.shape[0]
    out = []
    for lo in range(0, m, block):
        g = gram[lo:lo + block]
        si = sq[lo:lo + block, None]
        d2 = si + sq[None, :] - 2.0 * g
        # relative floor from cancellation, absolute floor so 2 / d2 stays finite
        hit = np.argwhere(d2 <= _RESOLVE * (si + sq[None, :]) + 1e-300)
        hit[:, 0] += lo
        out.append(hit[hit[:, 0] < hit[:, 1]])
    return np.concatenate(out) if out else np.empty((0, 2), dtype=np.int64)


class DirectionSet:
    """A finite set of unit vectors, with <sigma, p> tables cached per generator table."""

    def __init__(self, dirs, seed=None, scheme="shared"):
        dirs = np.ascontiguousarray(dirs, dtype=np.float64)
        if dirs.ndim != 2 or dirs.shape[0] == 0:
            raise DataError("direction set must be a non-empty s x n matrix")
        norms = np.linalg.norm(dirs, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise DataError("directions must have unit norm")
        self.dirs = dirs
        self.dirs.setflags(write=False)
        self.seed = seed
        self.scheme = scheme
        self._grams = {}

    @property
    def s(self):
        return self.dirs.shape[0]

    @property
    def n(self):
        return self.dirs.shape[1]

    def __len__(self):
        return self.s

    def gram(self, table: GeneratorTable) -> np.ndarray:
        """The s x m matrix of <sigma, p>; computed on first use for ``table``."""
        key = id(table)
        hit = self._grams.get(key)
        if hit is None or hit[0] is not table:
            if table.n != self.n:
                raise DataError(f"directions are {self.n}-dimensional, generators {table.n}-dimensional")
            hit = (table, np.ascontiguousarray(self.dirs @ table.points.T))
            self._grams[key] = hit
        return hit[1]

    def spans(self) -> bool:
        """True when the directions linearly span R^n."""
        if self.s < self.n:
            return False
        return int(np.linalg.matrix_rank(self.dirs)) == self.n


@dataclass(frozen=True)
class RadiusPair:
    forward: float
    backward: float


@dataclass(frozen=True)
class Box:
    """Axis-aligned box; bounds may be infinite."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=np.float64).ravel()
        hi = np.asarray(self.hi, dtype=np.float64).ravel()
        if lo.shape != hi.shape or lo.size == 0:
            raise DataError("box bounds must be two vectors of equal length")
        if not np.all(lo < hi):
            raise DataError("box must have lo < hi on every axis")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def cube(cls, lo, hi, n):
        return cls(np.full(n, float(lo)), np.full(n, float(hi)))

    @property
    def n(self):
        return self.lo.size

    @property
    def bounded(self):
        return bool(np.isfinite(self.lo).all() and np.isfinite(self.hi).all())

    @property
    def volume(self):
        return float(np.prod(self.hi - self.lo))

    def contains(self, x):
        x = np.asarray(x, dtype=np.float64)
        return np.all((x >= self.lo) & (x <= self.hi), axis=-1)


def nearest_generator(x, table: GeneratorTable):
    """Index of the generator closest to ``x`` (lowest index on ties).

    Accepts a single n-vector (returns an int) or a k x n matrix (returns an
    index array).
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    xx = np.atleast_2d(x)
    if xx.shape[1] != table.n:
        raise DataError(f"query is {xx.shape[1]}-dimensional, generators are {table.n}-dimensional")
    idx = backend.nearest(np.ascontiguousarray(xx), table.points)
    return int(idx[0]) if single else idx


def directional_radius_from_generator(p_idx, sigma_idx, table: GeneratorTable, dirs: DirectionSet) -> float:
    """l_p(sigma) for the ray leaving generator ``p_idx``; inf if the ray never exits."""
    sg = dirs.gram(table)[sigma_idx]
    g = table.gram[p_idx]
    num = table.sq_norms - 2.0 * g + table.sq_norms[p_idx]
    den = 2.0 * sg - 2.0 * sg[p_idx]
    ok = den != 0.0
    ok[p_idx] = False
    lq = num[ok] / den[ok]
    lq = lq[lq > 0.0]
    return float(lq.min()) if lq.size else np.inf


def directional_radius_from_point(z, p_idx, z_gram_row, sigma_idx, table: GeneratorTable,
                                  dirs: DirectionSet) -> RadiusPair:
    """Forward/backward distance from ``z`` (inside the cell of ``p_idx``) to the cell boundary.

    ``z_gram_row`` is <z, q> for every generator q; ``z`` itself is only kept
    in the signature for callers that want to pass it along.
    """
    zg = np.asarray(z_gram_row, dtype=np.float64)
    sg = dirs.gram(table)[sigma_idx]
    sq = table.sq_norms
    num = sq - sq[p_idx] - 2.0 * zg + 2.0 * zg[p_idx]
    den = 2.0 * sg - 2.0 * sg[p_idx]
    ok = den != 0.0
    ok[p_idx] = False
    lq = num[ok] / den[ok]
    pos = lq > 0.0
    fwd = float(lq[pos].min()) if pos.any() else np.inf
    bwd = float((-lq[~pos]).min()) if (~pos).any() else np.inf
    return RadiusPair(fwd, bwd)


def ray_box_exit(z, sigma, box: Box) -> float:
    """Distance along ``sigma`` from ``z`` (inside ``box``) to the box boundary."""
    z = np.asarray(z, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    if not box.contains(z):
        raise DataError("ray origin lies outside the box")
    with np.errstate(divide="ignore", invalid="ignore"):
        up = np.where(sigma > 0, (box.hi - z) / sigma, np.inf)
        down = np.where(sigma < 0, (box.lo - z) / sigma, np.inf)
    return float(min(up.min(), down.min()))


def cell_radii(table: GeneratorTable, dirs: DirectionSet, rows=None) -> np.ndarray:
    """Matrix of l_p(sigma) for generators ``rows`` (default all) and every direction."""
    rows = np.arange(table.m) if rows is None else np.asarray(rows, dtype=np.int64)
    return backend.cell_radii(table.gram, table.sq_norms, dirs.gram(table), rows)
