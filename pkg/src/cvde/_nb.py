"""Compiled kernels. Each public function has a same-signature twin in ``_np``."""
import math
import os

import numba
import numpy as np
from numba import njit, prange

if "NUMBA_THREADING_LAYER" not in os.environ:
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

if os.environ.get("CVDE_THREADS"):
    numba.set_num_threads(max(1, min(int(os.environ["CVDE_THREADS"]), numba.config.NUMBA_NUM_THREADS)))

GAUSSIAN, UNIFORM_BALL, BOX = 0, 1, 2

_EPS = 2.0 ** -52
_TINY = 1e-300
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_SQRT2 = math.sqrt(2.0)


# ---------------------------------------------------------------- raycasting

@njit(fastmath=True, cache=True)
def _scaled_rowmax(a, sp, w):
    # max_q (a[q] - sp) * w[q], four accumulators to break the dependency chain
    m = a.shape[0]
    b0 = 0.0
    b1 = 0.0
    b2 = 0.0
    b3 = 0.0
    q = 0
    while q + 4 <= m:
        b0 = max(b0, (a[q] - sp) * w[q])
        b1 = max(b1, (a[q + 1] - sp) * w[q + 1])
        b2 = max(b2, (a[q + 2] - sp) * w[q + 2])
        b3 = max(b3, (a[q + 3] - sp) * w[q + 3])
        q += 4
    while q < m:
        b0 = max(b0, (a[q] - sp) * w[q])
        q += 1
    return max(max(b0, b1), max(b2, b3))


@njit(parallel=True, cache=True)
def cell_radii(gram, sq, sg, rows):
    """Directional radii l_p(sigma) for generators ``rows`` and every direction.

    Uses 1/l = max_q 2<sigma, q - p> / |q - p|^2 over q != p, which is the
    Gram-table form of the bisector distance with the division hoisted out of
    the inner loop. Non-positive maxima mean the ray never leaves the cell.
    """
    m = sq.shape[0]
    s = sg.shape[0]
    b = rows.shape[0]
    out = np.empty((b, s))
    for i in prange(b):
        p = rows[i]
        w = np.empty(m)
        for q in range(m):
            if q == p:
                w[q] = 0.0
            else:
                w[q] = 2.0 / (sq[q] - 2.0 * gram[p, q] + sq[p])
        for j in range(s):
            best = _scaled_rowmax(sg[j], sg[j, p], w)
            out[i, j] = 1.0 / best if best > 0.0 else np.inf
    return out


@njit(parallel=True, cache=True)
def box_interval(origins, dirs, lo, hi):
    """Parameter interval [t0, t1] where origin + t*dir lies in the box (slab method)."""
    b, n = origins.shape
    s = dirs.shape[0]
    t0 = np.empty((b, s))
    t1 = np.empty((b, s))
    for i in prange(b):
        for j in range(s):
            a = -np.inf
            c = np.inf
            for d in range(n):
                sd = dirs[j, d]
                od = origins[i, d]
                if sd > 0.0:
                    a = max(a, (lo[d] - od) / sd)
                    c = min(c, (hi[d] - od) / sd)
                elif sd < 0.0:
                    a = max(a, (hi[d] - od) / sd)
                    c = min(c, (lo[d] - od) / sd)
                elif od < lo[d] or od > hi[d]:
                    a = np.inf
                    c = -np.inf
            t0[i, j] = a
            t1[i, j] = c
    return t0, t1


@njit(parallel=True, cache=True)
def nearest(x, points):
    """Index of the nearest row of ``points`` for each row of ``x``; lowest index on ties."""
    k, n = x.shape
    m = points.shape[0]
    out = np.empty(k, dtype=np.int64)
    for i in prange(k):
        best = np.inf
        arg = 0
        for q in range(m):
            acc = 0.0
            for d in range(n):
                diff = x[i, d] - points[q, d]
                acc += diff * diff
            if acc < best:
                best = acc
                arg = q
        out[i] = arg
    return out


# ---------------------------------------------------------- special functions

@njit(cache=True)
def _log_gammainc_scalar(a, x):
    if x <= 0.0:
        return -np.inf
    if x == np.inf:
        return 0.0
    lga = math.lgamma(a)
    if x < a + 1.0:
        ap = a
        term = 1.0 / a
        total = term
        for _ in range(100000):
            ap += 1.0
            term *= x / ap
            total += term
            if term < total * _EPS:
                break
        return a * math.log(x) - x - lga + math.log(total)
    # modified Lentz continued fraction for the upper tail
    bb = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / bb
    h = d
    for i in range(1, 100000):
        an = -i * (i - a)
        bb += 2.0
        d = an * d + bb
        if abs(d) < _TINY:
            d = _TINY
        c = bb + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    log_q = a * math.log(x) - x - lga + math.log(h)
    return math.log1p(-math.exp(log_q))


@njit(parallel=True, cache=True)
def _log_gammainc_flat(a, x):
    out = np.empty(x.shape[0])
    for i in prange(x.shape[0]):
        out[i] = _log_gammainc_scalar(a, x[i])
    return out


def log_gammainc_lower(a, x):
    """log of the regularized lower incomplete gamma P(a, x), elementwise over ``x``."""
    x = np.asarray(x, dtype=np.float64)
    return _log_gammainc_flat(float(a), x.ravel()).reshape(x.shape)


# ------------------------------------------------------ truncated normal draws

@njit(cache=True)
def _ndtr(x):
    if x < 0.0:
        return 0.5 * math.erfc(-x / _SQRT2)
    return 1.0 - 0.5 * math.erfc(x / _SQRT2)


@njit(cache=True)
def _log_ndtr(x):
    if x > 0.0:
        return math.log1p(-0.5 * math.erfc(x / _SQRT2))
    if x > -37.0:
        return math.log(0.5 * math.erfc(-x / _SQRT2))
    r = 1.0 / (x * x)
    series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)))
    return -0.5 * x * x - math.log(-x) - _LOG_SQRT_2PI + math.log(series)


@njit(cache=True)
def _ndtri(p):
    # Acklam's rational approximation followed by one Halley step on erfc
    if p <= 0.0:
        return -np.inf
    if p >= 1.0:
        return np.inf
    if p < 0.02425:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((-7.784894002430293e-03 * q - 3.223964580411365e-01) * q - 2.400758277161838e+00) * q
               - 2.549732539343734e+00) * q + 4.374664141464968e+00) * q + 2.938163982698783e+00) / \
            ((((7.784695709041462e-03 * q + 3.224671290700398e-01) * q + 2.445134137142996e+00) * q
              + 3.754408661907416e+00) * q + 1.0)
    elif p <= 1.0 - 0.02425:
        q = p - 0.5
        r = q * q
        x = (((((-3.969683028665376e+01 * r + 2.209460984245205e+02) * r - 2.759285104469687e+02) * r
               + 1.383577518672690e+02) * r - 3.066479806614716e+01) * r + 2.506628277459239e+00) * q / \
            (((((-5.447609879822406e+01 * r + 1.615858368580409e+02) * r - 1.556989798598866e+02) * r
               + 6.680131188771972e+01) * r - 1.328068155288572e+01) * r + 1.0)
    else:
        q = math.sqrt(-2.0 * math.log1p(-p))
        x = -(((((-7.784894002430293e-03 * q - 3.223964580411365e-01) * q - 2.400758277161838e+00) * q
                - 2.549732539343734e+00) * q + 4.374664141464968e+00) * q + 2.938163982698783e+00) / \
            ((((7.784695709041462e-03 * q + 3.224671290700398e-01) * q + 2.445134137142996e+00) * q
              + 3.754408661907416e+00) * q + 1.0)
    if p < 0.5:
        e = 0.5 * math.erfc(-x / _SQRT2) - p
    else:
        e = (1.0 - p) - 0.5 * math.erfc(x / _SQRT2)
    u = e * math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


@njit(cache=True)
def _ndtri_log(logp):
    # inverse of _log_ndtr on the lower half-line
    if logp > -650.0:
        x = _ndtri(math.exp(logp))
        if logp > -30.0:
            return x
    else:
        t = -2.0 * logp
        x = -math.sqrt(t - math.log(t) - math.log(2.0 * math.pi))
    for _ in range(50):
        lc = _log_ndtr(x)
        # d/dx log Phi(x) = phi(x) / Phi(x)
        g = math.exp(-0.5 * x * x - _LOG_SQRT_2PI - lc)
        step = (lc - logp) / g
        x -= step
        if abs(step) <= 1e-15 * abs(x):
            break
    return x


@njit(cache=True)
def _trunc_std(a, b, u):
    # standard normal restricted to [a, b], inverse-CDF at u in (0, 1)
    flip = a > 0.0
    if flip:
        a, b = -b, -a
        u = 1.0 - u
    if b < -5.0:
        la = _log_ndtr(a)
        lb = _log_ndtr(b)
        x = _ndtri_log(lb + math.log(u + (1.0 - u) * math.exp(la - lb)))
    else:
        pa = _ndtr(a)
        pb = _ndtr(b)
        x = _ndtri(pa + u * (pb - pa))
    x = min(max(x, a), b)
    return -x if flip else x


@njit(cache=True)
def _truncnorm_scalar(mu, h, lo, hi, u):
    x = _trunc_std((lo - mu) / h, (hi - mu) / h, u)
    return min(max(mu + h * x, lo), hi)


@njit(parallel=True, cache=True)
def _truncnorm_flat(mu, h, lo, hi, u):
    out = np.empty(mu.shape[0])
    for i in prange(mu.shape[0]):
        out[i] = _truncnorm_scalar(mu[i], h[i], lo[i], hi[i], u[i])
    return out


def truncnorm(mu, h, lo, hi, u):
    """Inverse-CDF draws from N(mu, h^2) restricted to [lo, hi], one per uniform ``u``."""
    mu, h, lo, hi, u = (np.array(v, dtype=np.float64).ravel()
                        for v in np.broadcast_arrays(mu, h, lo, hi, u))
    return _truncnorm_flat(mu, h, lo, hi, u)


# --------------------------------------------------------------- hit-and-run

@njit(parallel=True, cache=True)
def hr_step(z, zg, home, points, sq, sg, dirs, idx, u, family, h, radius, blo, bhi, has_box):
    """One hit-and-run move for every chain, updating ``z`` and ``zg`` in place.

    ``sg[idx[c]]`` holds <sigma, q> for the direction of chain ``c``; the chord
    through ``z`` is bounded by the cell (cached inner products only), then by
    the box and the kernel support. Returns the step lengths and a flag per
    chain set when the chord was degenerate (no move made).
    """
    k, n = z.shape
    m = sq.shape[0]
    t_out = np.zeros(k)
    degenerate = np.zeros(k, dtype=np.uint8)
    for c in prange(k):
        p = home[c]
        j = idx[c]
        sp = sg[j, p]
        zp = zg[c, p]
        base = 2.0 * zp - sq[p]
        fwd = np.inf
        bwd = np.inf
        for q in range(m):
            if q == p:
                continue
            den = 2.0 * (sg[j, q] - sp)
            if den == 0.0:
                continue
            num = max(sq[q] - 2.0 * zg[c, q] + base, 0.0)
            lq = num / den
            if lq > 0.0:
                fwd = min(fwd, lq)
            else:
                bwd = min(bwd, -lq)
        lo = -bwd
        hi = fwd
        sz = 0.0
        for d in range(n):
            sz += dirs[j, d] * z[c, d]
        if has_box:
            for d in range(n):
                sd = dirs[j, d]
                if sd > 0.0:
                    lo = max(lo, (blo[d] - z[c, d]) / sd)
                    hi = min(hi, (bhi[d] - z[c, d]) / sd)
                elif sd < 0.0:
                    lo = max(lo, (bhi[d] - z[c, d]) / sd)
                    hi = min(hi, (blo[d] - z[c, d]) / sd)
        mu = sp - sz
        if family == UNIFORM_BALL:
            zz = 0.0
            for d in range(n):
                zz += z[c, d] * z[c, d]
            off2 = zz - 2.0 * zp + sq[p] - mu * mu
            disc = radius * radius - off2
            if disc > 0.0:
                half = math.sqrt(disc)
                lo = max(lo, mu - half)
                hi = min(hi, mu + half)
            else:
                hi = lo
        if not hi > lo:
            degenerate[c] = 1
            continue
        if family == GAUSSIAN:
            t = _truncnorm_scalar(mu, h, lo, hi, u[c])
        else:
            t = lo + u[c] * (hi - lo)
        t_out[c] = t
        for d in range(n):
            z[c, d] += t * dirs[j, d]
        for q in range(m):
            zg[c, q] += t * sg[j, q]
    return t_out, degenerate
