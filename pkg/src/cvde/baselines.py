"""Gaussian KDE and adaptive-bandwidth KDE, plus Scott's rule."""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .errors import DataError, NumericError
from .geometry import GeneratorTable

_BLOCK = 1 << 22


@dataclass
class KdeModel:
    """Gaussian KDE; ``local_scales`` present means AdaKDE with h_p = h * lambda_p."""

    table: GeneratorTable
    h: float
    local_scales: Optional[np.ndarray] = None

    @property
    def n(self):
        return self.table.n

    @property
    def m(self):
        return self.table.m

    @property
    def bandwidths(self):
        if self.local_scales is None:
            return np.full(self.m, self.h)
        return self.h * self.local_scales

    def log_density(self, x):
        return kde_log_density(self, x)


def fit_kde(table: GeneratorTable, h) -> KdeModel:
    if not h > 0:
        raise DataError("bandwidth must be positive")
    return KdeModel(table, float(h))


def _sq_dists(x, points, sq_norms):
    d2 = (x * x).sum(axis=1)[:, None] - 2.0 * x @ points.T + sq_norms[None, :]
    return np.maximum(d2, 0.0)


def kde_log_density(model: KdeModel, x):
    """log of (1/m) sum_p N(x; p, h_p^2 I), computed with log-sum-exp."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    xx = np.atleast_2d(x)
    if xx.shape[1] != model.n:
        raise DataError(f"query is {xx.shape[1]}-dimensional, model is {model.n}-dimensional")
    n, m = model.n, model.m
    hp = model.bandwidths
    log_norm = -0.5 * n * np.log(2.0 * np.pi * hp * hp) - math.log(m)
    inv = 1.0 / (2.0 * hp * hp)
    out = np.empty(xx.shape[0])
    step = max(1, _BLOCK // max(m, 1))
    for i0 in range(0, xx.shape[0], step):
        d2 = _sq_dists(xx[i0:i0 + step], model.table.points, model.table.sq_norms)
        out[i0:i0 + step] = logsumexp(log_norm[None, :] - d2 * inv[None, :], axis=1)
    return float(out[0]) if single else out


def fit_adakde(table: GeneratorTable, h) -> KdeModel:
    """Adaptive KDE: lambda_p = (g / f(p))^(1/2) with f the pilot KDE at ``h``
    and g the geometric mean of the pilot over the generators."""
    pilot = kde_log_density(fit_kde(table, h), table.points)
    if not np.all(np.isfinite(pilot)):
        raise NumericError("pilot density vanished at a generator")
    log_g = pilot.mean()
    lam = np.exp(0.5 * (log_g - pilot))
    return KdeModel(table, float(h), lam)


def scott_bandwidth(data) -> float:
    """Scott's rule h = mean per-axis std * k^(-1/(n+4))."""
    x = np.asarray(data, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    k, n = x.shape
    if k < 2:
        raise DataError("Scott's rule needs at least two points")
    sigma = x.std(axis=0, ddof=1).mean()
    if not sigma > 0:
        raise NumericError("data have zero variance in every dimension")
    return float(sigma * k ** (-1.0 / (n + 4)))
