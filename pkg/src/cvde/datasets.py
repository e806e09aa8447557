"""Synthetic generators, numeric table I/O, PCA and the split/subsample protocol."""
import logging
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DataError

logger = logging.getLogger(__name__)

MIXTURE_OFFSET = 0.5
MIXTURE_SIGMAS = (0.1, 100.0)


@dataclass(frozen=True)
class DatasetSpec:
    source: str
    n: int
    m_train: int
    m_test: int
    seed: Optional[int] = None
    path: Optional[str] = None
    pca_dims: Optional[int] = None

    def __post_init__(self):
        if self.source not in ("gaussian", "gaussian_mixture", "file"):
            raise DataError(f"unknown dataset source {self.source!r}")
        if self.m_train <= 0 or self.m_test <= 0:
            raise DataError("sample counts must be positive")
        if self.pca_dims is not None and self.pca_dims > self.n:
            raise DataError("pca_dims exceeds the ambient dimension")


def gen_gaussian(n, m, seed=None):
    """m i.i.d. standard normal points in R^n."""
    return np.random.default_rng(seed).standard_normal((m, n))


def gen_gaussian_mixture(n, m, seed=None, alternate=False):
    """Equal-weight mixture of N(mu_1, 0.1^2 I) and N(mu_2, 100^2 I), mu_{1,2} = (-+0.5, 0, ..., 0).

    With ``alternate=True`` rows cycle through the components instead of being
    assigned at random.
    """
    rng = np.random.default_rng(seed)
    if alternate:
        labels = np.arange(m) % 2
    else:
        labels = rng.integers(2, size=m)
    means = np.zeros((2, n))
    means[0, 0] = -MIXTURE_OFFSET
    means[1, 0] = MIXTURE_OFFSET
    sig = np.asarray(MIXTURE_SIGMAS)[labels]
    return means[labels] + sig[:, None] * rng.standard_normal((m, n))


_SPLIT = re.compile(r"[,\s]+")


def _is_number(tok):
    try:
        float(tok)
    except ValueError:
        return False
    return True


def load_matrix(path):
    """Read a comma- or whitespace-delimited numeric matrix.

    A first line made only of non-numeric tokens is taken as a header and
    skipped. Blank lines are ignored.
    """
    rows = []
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            toks = [t for t in _SPLIT.split(text) if t]
            if not rows and width is None and not any(_is_number(t) for t in toks):
                width = len(toks)
                continue
            try:
                vals = [float(t) for t in toks]
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric field") from None
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise DataError(f"{path}:{lineno}: expected {width} fields, found {len(vals)}")
            rows.append(vals)
    if not rows:
        raise DataError(f"{path}: no data rows")
    out = np.array(rows, dtype=np.float64)
    logger.info("loaded %s: %d rows x %d columns", path, *out.shape)
    return out


def save_matrix(path, data, header=True):
    """Write ``data`` as CSV with 17 significant digits (round-trips exactly)."""
    data = np.atleast_2d(np.asarray(data, dtype=np.float64))
    with open(path, "w") as fh:
        if header:
            fh.write(",".join(f"x{j}" for j in range(data.shape[1])) + "\n")
        for row in data:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


@dataclass(frozen=True)
class PcaTransform:
    mean: np.ndarray
    basis: np.ndarray
    variances: np.ndarray
    total_variance: float

    @property
    def explained_ratio(self):
        return self.variances / self.total_variance


def fit_pca(data, target_dims) -> PcaTransform:
    """Top principal directions from the eigendecomposition of the sample covariance."""
    x = np.asarray(data, dtype=np.float64)
    k, n = x.shape
    if k < 2:
        raise DataError("PCA needs at least two rows")
    if not 1 <= target_dims <= n:
        raise DataError(f"target dimension must lie in [1, {n}]")
    mean = x.mean(axis=0)
    cov = np.cov(x - mean, rowvar=False).reshape(n, n)
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals)[::-1]
    vals = np.maximum(vals[order], 0.0)
    vecs = vecs[:, order]
    rank = int(np.sum(vals > vals[0] * n * np.finfo(float).eps)) if vals[0] > 0 else 0
    if target_dims > rank:
        raise DataError(f"target dimension {target_dims} exceeds data rank {rank}")
    basis = vecs[:, :target_dims].T.copy()
    return PcaTransform(mean, basis, vals[:target_dims].copy(), float(vals.sum()))


def apply_pca(t: PcaTransform, data):
    return (np.asarray(data, dtype=np.float64) - t.mean) @ t.basis.T


def subsample(data, fraction, seed=None):
    """Random subset of round(fraction * k) rows, order preserved."""
    x = np.asarray(data)
    if not 0 < fraction <= 1:
        raise DataError("subsample fraction must lie in (0, 1]")
    keep = int(round(fraction * x.shape[0]))
    if keep == 0:
        raise DataError("subsample is empty")
    idx = np.sort(np.random.default_rng(seed).choice(x.shape[0], size=keep, replace=False))
    return x[idx]


def split_and_subsample(data, test_fraction, subsample_fraction, seed=None, split_seed=None):
    """Hold out ``test_fraction`` of rows, then keep ``subsample_fraction`` of the rest.

    The held-out split is drawn from ``split_seed`` (defaults to ``seed``) so
    repeated runs can share one split while re-subsampling the training part.
    """
    x = np.asarray(data)
    if not (0 < test_fraction < 1 and 0 < subsample_fraction < 1):
        raise DataError("fractions must lie in (0, 1)")
    k = x.shape[0]
    n_test = int(round(test_fraction * k))
    if n_test == 0 or n_test == k:
        raise DataError("split leaves an empty train or test set")
    perm = np.random.default_rng(seed if split_seed is None else split_seed).permutation(k)
    test_idx = np.sort(perm[:n_test])
    train_idx = np.sort(perm[n_test:])
    train = subsample(x[train_idx], subsample_fraction, seed)
    return train, x[test_idx]
