"""Binary model container.

Layout: one ASCII header line terminated by ``\\n``, then the m x n generator
matrix and any per-generator vector, all little-endian float64, row-major::

    CVDE v1 n=<n> m=<m> kernel=<id> h=<h> s=<s> seed=<seed> [box_lo=.. box_hi=..] [scheme=..]
    <points> <log_vols>

    KDE v1 n=<n> m=<m> h=<h>
    <points>

    ADAKDE v1 n=<n> m=<m> h=<h>
    <points> <lambda>
"""
import numpy as np

from .baselines import KdeModel
from .errors import DataError
from .estimator import DensityModel, FitMeta
from .geometry import Box, build_generator_table
from .kernels import KernelSpec

_LE = "<f8"


def _fmt(v):
    return repr(float(v))


def _fmt_vec(v):
    v = np.asarray(v, dtype=np.float64)
    if np.all(v == v[0]):
        return _fmt(v[0])
    return ",".join(_fmt(x) for x in v)


def _parse_vec(text, n):
    vals = [float(t) for t in text.split(",")]
    if len(vals) == 1:
        return np.full(n, vals[0])
    if len(vals) != n:
        raise DataError(f"box bound has {len(vals)} entries, expected {n}")
    return np.array(vals)


def _kernel_from(ident, h, n, box):
    if ident == "gaussian":
        return KernelSpec.gaussian(h, n)
    if ident == "gaussian-box":
        return KernelSpec.gaussian(h, n, box)
    if ident == "uniform-ball":
        return KernelSpec.uniform_ball(h, n)
    if ident == "uniform-ball-box":
        return KernelSpec.uniform_ball(h, n, box)
    if ident == "vde-box":
        return KernelSpec.box_indicator(box)
    raise DataError(f"unknown kernel id {ident!r}")


def dumps(model) -> bytes:
    """Serialize a DensityModel or KdeModel."""
    t = model.table
    if isinstance(model, DensityModel):
        k = model.kernel
        seed = "none" if model.meta.seed is None else str(model.meta.seed)
        head = (f"CVDE v1 n={t.n} m={t.m} kernel={k.ident} h={_fmt(k.scale)} "
                f"s={model.meta.num_versors} seed={seed}")
        if k.box is not None:
            head += f" box_lo={_fmt_vec(k.box.lo)} box_hi={_fmt_vec(k.box.hi)}"
        if model.meta.scheme != "shared":
            head += f" scheme={model.meta.scheme}"
        tail = model.log_vols
    elif isinstance(model, KdeModel):
        kind = "KDE" if model.local_scales is None else "ADAKDE"
        head = f"{kind} v1 n={t.n} m={t.m} h={_fmt(model.h)}"
        tail = model.local_scales
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    body = np.ascontiguousarray(t.points, dtype=_LE).tobytes()
    if tail is not None:
        body += np.ascontiguousarray(tail, dtype=_LE).tobytes()
    return (head + "\n").encode("ascii") + body


def loads(blob: bytes):
    """Inverse of :func:`dumps`."""
    nl = blob.find(b"\n")
    if nl < 0:
        raise DataError("model file has no header line")
    try:
        head = blob[:nl].decode("ascii").split()
    except UnicodeDecodeError:
        raise DataError("model header is not ASCII") from None
    if len(head) < 2 or head[1] != "v1" or head[0] not in ("CVDE", "KDE", "ADAKDE"):
        raise DataError("unrecognized model header")
    kind = head[0]
    try:
        fields = dict(tok.split("=", 1) for tok in head[2:])
        n, m = int(fields["n"]), int(fields["m"])
        h = float(fields["h"])
    except (KeyError, ValueError):
        raise DataError("malformed model header") from None
    body = blob[nl + 1:]
    vec = 0 if kind == "KDE" else m
    if len(body) != 8 * (m * n + vec):
        raise DataError(f"model body has {len(body)} bytes, expected {8 * (m * n + vec)}")
    arr = np.frombuffer(body, dtype=_LE).astype(np.float64)
    points = arr[:m * n].reshape(m, n)
    table = build_generator_table(points)
    if table.m != m:
        raise DataError("model file contains duplicate generators")
    if kind == "KDE":
        return KdeModel(table, h)
    if kind == "ADAKDE":
        return KdeModel(table, h, arr[m * n:].copy())
    box = None
    if "box_lo" in fields:
        box = Box(_parse_vec(fields["box_lo"], n), _parse_vec(fields["box_hi"], n))
    kernel = _kernel_from(fields.get("kernel", ""), h, n, box)
    seed = None if fields.get("seed", "none") == "none" else int(fields["seed"])
    log_vols = arr[m * n:].copy()
    zero = tuple(int(i) for i in np.flatnonzero(log_vols == -np.inf))
    meta = FitMeta(int(fields.get("s", 0)), seed, fields.get("scheme", "shared"), zero)
    return DensityModel(table, kernel, log_vols, meta)


def save_model(model, path):
    with open(path, "wb") as fh:
        fh.write(dumps(model))


def load_model(path):
    try:
        with open(path, "rb") as fh:
            return loads(fh.read())
    except OSError as exc:
        raise DataError(f"cannot read model {path}: {exc}") from None
