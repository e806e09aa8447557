"""Pure-numpy twins of the compiled kernels in ``_nb`` (selected with CVDE_NUMBA=0)."""
import numpy as np
from scipy import special

GAUSSIAN, UNIFORM_BALL, BOX = 0, 1, 2

_EPS = 2.0 ** -52
_TINY = 1e-300
_CHUNK = 1 << 22


def cell_radii(gram, sq, sg, rows):
    m = sq.shape[0]
    s = sg.shape[0]
    out = np.empty((len(rows), s))
    step = max(1, _CHUNK // max(m, 1))
    for i, p in enumerate(rows):
        dist2 = sq - 2.0 * gram[p] + sq[p]
        w = np.zeros(m)
        mask = np.arange(m) != p
        w[mask] = 2.0 / dist2[mask]
        for j0 in range(0, s, step):
            blk = sg[j0:j0 + step]
            best = np.maximum(((blk - blk[:, p:p + 1]) * w).max(axis=1), 0.0)
            with np.errstate(divide="ignore"):
                out[i, j0:j0 + step] = np.where(best > 0.0, 1.0 / best, np.inf)
    return out


def box_interval(origins, dirs, lo, hi):
    b, n = origins.shape
    s = dirs.shape[0]
    t0 = np.empty((b, s))
    t1 = np.empty((b, s))
    pos = dirs > 0.0
    neg = dirs < 0.0
    zero = ~(pos | neg)
    safe = np.where(zero, 1.0, dirs)
    for i in range(b):
        o = origins[i]
        ta = (lo - o) / safe
        tb = (hi - o) / safe
        enter = np.where(pos, ta, np.where(neg, tb, -np.inf))
        leave = np.where(pos, tb, np.where(neg, ta, np.inf))
        a = enter.max(axis=1)
        c = leave.min(axis=1)
        outside = ((o < lo) | (o > hi))[None, :] & zero
        blocked = outside.any(axis=1)
        a[blocked] = np.inf
        c[blocked] = -np.inf
        t0[i] = a
        t1[i] = c
    return t0, t1


def nearest(x, points):
    k = x.shape[0]
    m = points.shape[0]
    out = np.empty(k, dtype=np.int64)
    step = max(1, _CHUNK // max(m * x.shape[1], 1))
    for i0 in range(0, k, step):
        diff = x[i0:i0 + step, None, :] - points[None, :, :]
        out[i0:i0 + step] = np.einsum("kmd,kmd->km", diff, diff).argmin(axis=1)
    return out


def log_gammainc_lower(a, x):
    x = np.asarray(x, dtype=np.float64)
    flat = x.ravel()
    out = np.empty_like(flat)
    a = float(a)
    lga = special.gammaln(a)
    out[flat <= 0.0] = -np.inf
    out[flat == np.inf] = 0.0
    ser = (flat > 0.0) & (flat < a + 1.0)
    cf = (flat >= a + 1.0) & (flat < np.inf)

    xs = flat[ser]
    if xs.size:
        ap = np.full_like(xs, a)
        term = np.full_like(xs, 1.0 / a)
        total = term.copy()
        live = np.ones(xs.shape, dtype=bool)
        for _ in range(100000):
            ap[live] += 1.0
            term[live] *= xs[live] / ap[live]
            total[live] += term[live]
            live &= ~(term < total * _EPS)
            if not live.any():
                break
        out[ser] = a * np.log(xs) - xs - lga + np.log(total)

    xc = flat[cf]
    if xc.size:
        bb = xc + 1.0 - a
        c = np.full_like(xc, 1.0 / _TINY)
        d = 1.0 / bb
        h = d.copy()
        live = np.ones(xc.shape, dtype=bool)
        for i in range(1, 100000):
            an = -i * (i - a)
            bb = bb + 2.0
            d_new = an * d + bb
            d_new = np.where(np.abs(d_new) < _TINY, _TINY, d_new)
            c_new = bb + an / c
            c_new = np.where(np.abs(c_new) < _TINY, _TINY, c_new)
            d_new = 1.0 / d_new
            delta = d_new * c_new
            d = np.where(live, d_new, d)
            c = np.where(live, c_new, c)
            h = np.where(live, h * delta, h)
            live &= ~(np.abs(delta - 1.0) < _EPS)
            if not live.any():
                break
        log_q = a * np.log(xc) - xc - lga + np.log(h)
        out[cf] = np.log1p(-np.exp(log_q))
    return out.reshape(x.shape)


def _trunc_std(a, b, u):
    flip = a > 0.0
    a, b = np.where(flip, -b, a), np.where(flip, -a, b)
    u = np.where(flip, 1.0 - u, u)
    x = np.empty_like(a)
    deep = b < -5.0
    if deep.any():
        la = special.log_ndtr(a[deep])
        lb = special.log_ndtr(b[deep])
        x[deep] = special.ndtri_exp(lb + np.log(u[deep] + (1.0 - u[deep]) * np.exp(la - lb)))
    rest = ~deep
    if rest.any():
        pa = special.ndtr(a[rest])
        pb = special.ndtr(b[rest])
        x[rest] = special.ndtri(pa + u[rest] * (pb - pa))
    x = np.minimum(np.maximum(x, a), b)
    return np.where(flip, -x, x)


def truncnorm(mu, h, lo, hi, u):
    mu, h, lo, hi, u = (np.asarray(v, dtype=np.float64).ravel().copy()
                        for v in np.broadcast_arrays(mu, h, lo, hi, u))
    with np.errstate(invalid="ignore", divide="ignore"):
        x = _trunc_std((lo - mu) / h, (hi - mu) / h, u)
    return np.minimum(np.maximum(mu + h * x, lo), hi)


def hr_step(z, zg, home, points, sq, sg, dirs, idx, u, family, h, radius, blo, bhi, has_box):
    k, n = z.shape
    m = sq.shape[0]
    rows = np.arange(k)
    sgc = sg[idx]
    sp = sgc[rows, home]
    zp = zg[rows, home]
    den = 2.0 * (sgc - sp[:, None])
    num = np.maximum(sq[None, :] - 2.0 * zg + (2.0 * zp - sq[home])[:, None], 0.0)
    valid = (den != 0.0)
    valid[rows, home] = False
    with np.errstate(divide="ignore", invalid="ignore"):
        lq = np.where(valid, num / np.where(valid, den, 1.0), np.nan)
    fwd = np.where(valid & (lq > 0.0), lq, np.inf).min(axis=1) if m else np.full(k, np.inf)
    bwd = np.where(valid & ~(lq > 0.0), -lq, np.inf).min(axis=1) if m else np.full(k, np.inf)
    lo = -bwd
    hi = fwd
    d = dirs[idx]
    sz = np.einsum("kd,kd->k", d, z)
    if has_box:
        pos = d > 0.0
        neg = d < 0.0
        safe = np.where(pos | neg, d, 1.0)
        with np.errstate(invalid="ignore"):
            ta = (blo[None, :] - z) / safe
            tb = (bhi[None, :] - z) / safe
        lo = np.maximum(lo, np.where(pos, ta, np.where(neg, tb, -np.inf)).max(axis=1))
        hi = np.minimum(hi, np.where(pos, tb, np.where(neg, ta, np.inf)).min(axis=1))
    mu = sp - sz
    if family == UNIFORM_BALL:
        zz = np.einsum("kd,kd->k", z, z)
        disc = radius * radius - (zz - 2.0 * zp + sq[home] - mu * mu)
        half = np.sqrt(np.maximum(disc, 0.0))
        ok = disc > 0.0
        lo = np.where(ok, np.maximum(lo, mu - half), lo)
        hi = np.where(ok, np.minimum(hi, mu + half), lo)
    degenerate = ~(hi > lo)
    t = np.zeros(k)
    move = ~degenerate
    if family == GAUSSIAN:
        t[move] = truncnorm(mu[move], h, lo[move], hi[move], u[move])
    else:
        t[move] = lo[move] + u[move] * (hi[move] - lo[move])
    z += t[:, None] * d
    zg += t[:, None] * sgc
    return t, degenerate.astype(np.uint8)
