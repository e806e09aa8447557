"""Radial kernels, their mass along a ray, and the special functions behind it."""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .accel import backend
from .errors import DataError
from .geometry import Box

FAMILIES = ("gaussian", "uniform_ball", "box_indicator")
FAMILY_CODE = {"gaussian": 0, "uniform_ball": 1, "box_indicator": 2}


@dataclass(frozen=True)
class KernelSpec:
    """Kernel descriptor.

    ``gaussian`` uses bandwidth ``h``; ``uniform_ball`` uses ``radius``;
    ``box_indicator`` is the characteristic function of ``box`` (the VDE).
    A gaussian or uniform_ball kernel may also carry a ``box``, in which case
    it is multiplied by the box indicator.
    """

    family: str
    n: int
    h: float = 1.0
    radius: float = 1.0
    box: Optional[Box] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DataError(f"unknown kernel family {self.family!r}")
        if self.n < 1:
            raise DataError("kernel dimension must be >= 1")
        if self.family == "gaussian" and not (self.h > 0 and math.isfinite(self.h)):
            raise DataError("gaussian bandwidth must be positive and finite")
        if self.family == "uniform_ball" and not (self.radius > 0 and math.isfinite(self.radius)):
            raise DataError("uniform_ball radius must be positive and finite")
        if self.family == "box_indicator" and self.box is None:
            raise DataError("box_indicator kernel needs a box")
        if self.box is not None and self.box.n != self.n:
            raise DataError("box dimension does not match kernel dimension")

    @classmethod
    def gaussian(cls, h, n, box=None):
        return cls("gaussian", n, h=float(h), box=box)

    @classmethod
    def uniform_ball(cls, radius, n, box=None):
        return cls("uniform_ball", n, radius=float(radius), box=box)

    @classmethod
    def box_indicator(cls, box):
        return cls("box_indicator", box.n, box=box)

    @property
    def code(self):
        return FAMILY_CODE[self.family]

    @property
    def scale(self):
        """The family's length parameter (h, radius, or 0 for the box)."""
        return {"gaussian": self.h, "uniform_ball": self.radius, "box_indicator": 0.0}[self.family]

    @property
    def ident(self):
        """Short kernel identifier used in model files."""
        if self.family == "box_indicator":
            return "vde-box"
        base = "gaussian" if self.family == "gaussian" else "uniform-ball"
        return base + "-box" if self.box is not None else base

    @property
    def compact(self):
        """True when every chord of every cell has finite kernel support."""
        if self.family == "gaussian":
            return True
        if self.family == "uniform_ball":
            return True
        return self.box.bounded

    def with_bandwidth(self, h):
        return KernelSpec(self.family, self.n, h=float(h), radius=self.radius, box=self.box)


def log_kernel(spec: KernelSpec, p, x):
    """log K(p, x), broadcasting over leading axes of ``p`` and ``x``."""
    p = np.asarray(p, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    d2 = np.sum((x - p) ** 2, axis=-1)
    if spec.family == "gaussian":
        out = -d2 / (2.0 * spec.h ** 2)
    elif spec.family == "uniform_ball":
        out = np.where(d2 <= spec.radius ** 2, 0.0, -np.inf)
    else:
        out = np.zeros_like(d2)
    if spec.box is not None:
        out = np.where(spec.box.contains(x), out, -np.inf)
    return out


def kernel_eval(spec: KernelSpec, p, x):
    """K(p, x)."""
    out = np.exp(log_kernel(spec, p, x))
    return float(out) if np.ndim(out) == 0 else out


def reg_lower_incomplete_gamma(a, z):
    """Regularized lower incomplete gamma P(a, z) = gamma(a, z) / Gamma(a).

    Lower series for z < a + 1, Lentz continued fraction for the upper tail
    otherwise; works in log space so minute values do not underflow early.
    """
    if not a > 0:
        raise DataError("reg_lower_incomplete_gamma needs a > 0")
    z = np.asarray(z, dtype=np.float64)
    if np.any(z < 0):
        raise DataError("reg_lower_incomplete_gamma needs z >= 0")
    out = np.exp(backend.log_gammainc_lower(a, z))
    return float(out) if out.ndim == 0 else out


def log_reg_lower_incomplete_gamma(a, z):
    if not a > 0:
        raise DataError("incomplete gamma needs a > 0")
    out = backend.log_gammainc_lower(a, np.asarray(z, dtype=np.float64))
    return float(out) if np.ndim(out) == 0 else out


def log_full_radial_mass(spec: KernelSpec, n=None):
    """log of the ray mass out to infinity (gaussian only)."""
    n = spec.n if n is None else n
    return 0.5 * n * math.log(2.0 * spec.h ** 2) + math.lgamma(0.5 * n) - math.log(2.0)


def log_radial_mass(spec: KernelSpec, l, n=None):
    """log of the integral of K(t) t^(n-1) dt over [0, l].

    For the gaussian kernel this is (2h^2)^(n/2) Gamma(n/2)/2 P(n/2, l^2/(2h^2));
    for the uniform ball min(l, R)^n / n; for the box indicator l^n / n with the
    box cap applied by the caller.
    """
    n = spec.n if n is None else n
    l = np.asarray(l, dtype=np.float64)
    if np.any(l < 0):
        raise DataError("ray length must be non-negative")
    with np.errstate(divide="ignore"):
        if spec.family == "gaussian":
            x = l * l / (2.0 * spec.h ** 2)
            out = log_full_radial_mass(spec, n) + backend.log_gammainc_lower(0.5 * n, x)
            # below this x the kernel is flat on [0, l]; also survives x underflowing to 0
            tiny = (x < 1e-30) & (l > 0)
            if np.any(tiny):
                out = np.where(tiny, n * np.log(np.where(tiny, l, 1.0)) - math.log(n), out)
        elif spec.family == "uniform_ball":
            out = n * np.log(np.minimum(l, spec.radius)) - math.log(n)
        else:
            out = n * np.log(l) - math.log(n)
    return float(out) if out.ndim == 0 else out


def log_radial_mass_interval(spec: KernelSpec, a, b, n=None):
    """log of the ray mass over [a, b] with 0 <= a; -inf where the interval is empty."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    a = np.maximum(a, 0.0)
    empty = ~(b > a)
    hi = log_radial_mass(spec, np.where(empty, 1.0, b), n)
    lo = log_radial_mass(spec, np.where(empty, 0.0, a), n)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = hi + np.log1p(-np.exp(lo - hi))
    out = np.where(a > 0.0, out, hi)
    return np.where(empty, -np.inf, out)


def open_uniform(rng, size=None):
    """Uniform draws on the open interval (0, 1)."""
    return rng.random(size) + 2.0 ** -54


def sample_line_truncated(spec: KernelSpec, mu, lo, hi, rng, half_chord=np.inf):
    """Draw t in [lo, hi] from the kernel restricted to a chord.

    gaussian: N(mu, h^2) truncated to [lo, hi] by inverse CDF.
    uniform_ball / box_indicator: uniform on [lo, hi] intersected with
    [mu - half_chord, mu + half_chord] (the ball's chord, when given).
    """
    if not lo < hi:
        raise DataError("sample_line_truncated needs lo < hi")
    if spec.family == "gaussian":
        return float(backend.truncnorm(mu, spec.h, lo, hi, open_uniform(rng, 1))[0])
    a = max(lo, mu - half_chord)
    b = min(hi, mu + half_chord)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DataError("uniform kernel on an infinite chord is not normalizable")
    if not a < b:
        raise DataError("chord misses the kernel support")
    return float(a + open_uniform(rng) * (b - a))
