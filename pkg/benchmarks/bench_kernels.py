"""Time the compiled kernels against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--m 500] [--n 10] [--s 2000] [--chains 1000]

Both backends are imported directly, so no environment flag is needed. The
first compiled call is excluded (JIT warm-up / cache load).
"""
import argparse
import time

import numpy as np

from cvde import _np

try:
    from cvde import _nb
except ImportError:  # numba missing
    _nb = None


def best_of(fn, repeat):
    fn()
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(m, n, s, k, rng):
    pts = rng.standard_normal((m, n))
    g = rng.standard_normal((s, n))
    dirs = g / np.linalg.norm(g, axis=1)[:, None]
    gram = pts @ pts.T
    sq = np.einsum("ij,ij->i", pts, pts)
    sg = np.ascontiguousarray(dirs @ pts.T)
    rows = np.arange(m)
    home = rng.integers(m, size=k).astype(np.int64)
    idx = rng.integers(s, size=k).astype(np.int64)
    u = rng.random(k) + 2.0 ** -54
    lo, hi = np.full(n, -np.inf), np.full(n, np.inf)
    x = rng.standard_normal((k, n))
    mu = rng.standard_normal(k)
    a = rng.standard_normal(k)
    b = a + rng.exponential(size=k)
    z = np.geomspace(1e-3, 100, k)

    def hr(mod):
        zz = pts[home].copy()
        zg = np.ascontiguousarray(gram[home])
        return lambda: mod.hr_step(zz, zg, home, pts, sq, sg, dirs, idx, u, 0, 1.0, 0.0, lo, hi, False)

    return {
        f"cell_radii m={m} s={s}": (lambda mod: lambda: mod.cell_radii(gram, sq, sg, rows), m * m * s),
        f"hr_step k={k} m={m}": (hr, k * m),
        f"nearest k={k} m={m}": (lambda mod: lambda: mod.nearest(x, pts), k * m),
        f"truncnorm k={k}": (lambda mod: lambda: mod.truncnorm(mu, 1.0, a, b, u), k),
        f"log_gammainc k={k}": (lambda mod: lambda: mod.log_gammainc_lower(n / 2, z), k),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=500)
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--s", type=int, default=2000)
    ap.add_argument("--chains", type=int, default=1000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    mods = [("numpy", _np)] + ([("numba", _nb)] if _nb is not None else [])
    print(f"{'kernel':<28} " + " ".join(f"{name:>12}" for name, _ in mods) + f" {'speedup':>9}")
    for label, (make, ops) in cases(args.m, args.n, args.s, args.chains, rng).items():
        times = [best_of(make(mod), args.repeat) for _, mod in mods]
        cells = " ".join(f"{t * 1e3:9.3f} ms" for t in times)
        ratio = f"{times[0] / times[-1]:8.1f}x" if len(times) > 1 else ""
        print(f"{label:<28} {cells} {ratio}   ({times[-1] / ops * 1e9:.2f} ns/op)")


if __name__ == "__main__":
    main()
