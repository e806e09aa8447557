"""Brute-force references for testing the estimator.

Nothing here imports from the rest of the package: kernels are read as plain
attribute bags (``family``, ``h``, ``radius``, ``box`` with ``lo``/``hi``) and
every quantity is recomputed from first principles: grid sums over the plane,
ray marching, and adaptive Gauss-Legendre quadrature.
"""
import math

import numpy as np

_CHUNK = 1 << 20


def _bounds(box):
    if hasattr(box, "lo"):
        lo, hi = np.asarray(box.lo, float), np.asarray(box.hi, float)
    else:
        arr = np.asarray(box, float)
        lo, hi = arr[:, 0], arr[:, 1]
    return lo, hi


def _log_k(kernel, d2, y):
    fam = kernel.family
    if fam == "gaussian":
        out = -d2 / (2.0 * kernel.h ** 2)
    elif fam == "uniform_ball":
        out = np.where(d2 <= kernel.radius ** 2, 0.0, -np.inf)
    elif fam == "box_indicator":
        out = np.zeros_like(d2)
    else:
        raise ValueError(f"unknown kernel family {fam!r}")
    kb = getattr(kernel, "box", None)
    if kb is not None:
        lo, hi = _bounds(kb)
        inside = np.all((y >= lo) & (y <= hi), axis=1)
        out = np.where(inside, out, -np.inf)
    return out


def _grid_axes(box, resolution):
    lo, hi = _bounds(box)
    if lo.size != 2:
        raise ValueError("grid oracles are planar (n = 2)")
    if resolution < 100:
        raise ValueError("grid resolution below 100 per side is too coarse for an oracle")
    xs = lo[0] + (np.arange(resolution) + 0.5) * (hi[0] - lo[0]) / resolution
    ys = lo[1] + (np.arange(resolution) + 0.5) * (hi[1] - lo[1]) / resolution
    area = (hi[0] - lo[0]) * (hi[1] - lo[1]) / resolution ** 2
    return xs, ys, area


def _grid_chunks(box, resolution):
    xs, ys, area = _grid_axes(box, resolution)
    rows = max(1, _CHUNK // resolution)
    for i0 in range(0, resolution, rows):
        gx, gy = np.meshgrid(xs[i0:i0 + rows], ys, indexing="ij")
        yield np.column_stack([gx.ravel(), gy.ravel()]), area


def _owner(points, y):
    d2 = ((y[:, None, :] - points[None, :, :]) ** 2).sum(axis=2)
    own = d2.argmin(axis=1)
    return own, d2[np.arange(y.shape[0]), own]


def grid_cell_masses(points, kernel, box, grid_resolution=2001):
    """Midpoint-rule mass of K(p, .) over every planar Voronoi cell inside ``box``."""
    pts = np.asarray(points, float)
    out = np.zeros(pts.shape[0])
    for y, area in _grid_chunks(box, grid_resolution):
        own, d2 = _owner(pts, y)
        w = np.exp(_log_k(kernel, d2, y)) * area
        out += np.bincount(own, weights=w, minlength=pts.shape[0])
    return out


def grid_cell_mass(points, p_idx, kernel, box, grid_resolution=2001):
    """Midpoint-rule mass of K(p, .) over the planar Voronoi cell of ``p_idx``."""
    return float(grid_cell_masses(points, kernel, box, grid_resolution)[p_idx])


def grid_integral(log_f, box, grid_resolution=2001):
    """Midpoint-rule integral of exp(log_f) over a planar box; ``log_f`` maps k x 2 to k."""
    total = 0.0
    for y, area in _grid_chunks(box, grid_resolution):
        total += float(np.exp(log_f(y)).sum()) * area
    return total


def grid_histogram_mass(log_f, box, bins, sub=8):
    """Mass of exp(log_f) in each of bins x bins rectangles (sub x sub midpoints per bin)."""
    lo, hi = _bounds(box)
    res = bins * sub
    xs = lo[0] + (np.arange(res) + 0.5) * (hi[0] - lo[0]) / res
    ys = lo[1] + (np.arange(res) + 0.5) * (hi[1] - lo[1]) / res
    area = (hi[0] - lo[0]) * (hi[1] - lo[1]) / res ** 2
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    vals = np.exp(log_f(np.column_stack([gx.ravel(), gy.ravel()]))).reshape(res, res) * area
    return vals.reshape(bins, sub, bins, sub).sum(axis=(1, 3))


def _nearest(points, x):
    return int(((points - x) ** 2).sum(axis=1).argmin())


def line_first_exit(points, z, sigma, step=1e-3, t_max=1e6):
    """First t > 0 at which the nearest generator of z + t sigma changes.

    Cells are convex, so a ray leaves once: check the far end against
    ``t_max``, march at resolution ``step`` until the owner changes, then
    bisect the bracketing interval to 1e-10.
    """
    pts = np.asarray(points, float)
    z = np.asarray(z, float)
    sigma = np.asarray(sigma, float)
    home = _nearest(pts, z)
    if _nearest(pts, z + t_max * sigma) == home:
        return math.inf
    t0 = 0.0
    block = 4096
    while True:
        ts = t0 + step * np.arange(1, block + 1)
        y = z[None, :] + ts[:, None] * sigma[None, :]
        d2 = ((y[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
        moved = np.flatnonzero(d2.argmin(axis=1) != home)
        if moved.size:
            hi = ts[moved[0]]
            lo = hi - step
            break
        t0 = ts[-1]
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if _nearest(pts, z + mid * sigma) == home:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


def _gl(f, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return half * float(np.dot(_GL_W, f(mid + half * _GL_X)))


def _adaptive(f, a, b, tol, depth=0):
    whole = _gl(f, a, b)
    m = 0.5 * (a + b)
    left = _gl(f, a, m)
    right = _gl(f, m, b)
    if abs(left + right - whole) <= tol or depth > 40:
        return left + right
    return _adaptive(f, a, m, 0.5 * tol, depth + 1) + _adaptive(f, m, b, 0.5 * tol, depth + 1)


def quad_radial_mass(kernel, l, n, rel_tol=1e-12):
    """Adaptive quadrature of the integral of K(t) t^(n-1) dt over [0, l]."""
    fam = kernel.family
    if fam == "gaussian":
        h = kernel.h
        if math.isinf(l):
            l = h * (math.sqrt(max(n - 1, 0)) + 40.0)

        def f(t):
            return np.exp(-t * t / (2.0 * h * h)) * t ** (n - 1)
    elif fam in ("uniform_ball", "box_indicator"):
        if fam == "uniform_ball":
            l = min(l, kernel.radius)
        if math.isinf(l):
            return math.inf

        def f(t):
            return t ** (n - 1)
    else:
        raise ValueError(f"unknown kernel family {fam!r}")
    if l <= 0:
        return 0.0
    edges = np.linspace(0.0, l, 17)
    rough = sum(_gl(f, a, b) for a, b in zip(edges[:-1], edges[1:]))
    tol = rel_tol * abs(rough) / 16.0
    return sum(_adaptive(f, a, b, tol) for a, b in zip(edges[:-1], edges[1:]))
