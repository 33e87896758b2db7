"""Binary and text file formats.

T3B tensor file::

    b"LRT1" | u64 n1 | u64 n2 | u64 n3 | n1*n2*n3 float64    (little endian)

Masks use the same layout with values 0.0/1.0.

MLP checkpoint (LRM1)::

    b"LRM1" | u64 count | per matrix: u64 rows | u64 cols | float64 payload

Model file (LRF1)::

    b"LRF1" | u64 r1 | u64 r2 | u64 r3 | core payload
    | three LRM1 checkpoints (x, y, z)
    | 6 float64 domain bounds (lo1, hi1, lo2, hi2, lo3, hi3)
    | 3 float64 omega0 | 3 u64 depths

Every writer goes through a temporary file in the target directory and an
atomic rename.
"""

import io
import os
import struct
import tempfile

import numpy as np

from .errors import FormatError
from .mlp import Mlp
from .model import LrtfrModel

__all__ = [
    "save_tensor",
    "load_tensor",
    "save_mask",
    "load_mask",
    "save_model",
    "load_model",
    "save_points",
    "load_points",
    "save_hpo_axes",
    "load_hpo_axes",
    "atomic_write",
]

TENSOR_MAGIC = b"LRT1"
MLP_MAGIC = b"LRM1"
MODEL_MAGIC = b"LRF1"
_F64 = np.dtype("<f8")
# Refuse headers whose payload would exceed this many elements.
MAX_ELEMENTS = 1 << 34


def atomic_write(path, data):
    """Write ``data`` (bytes or str) to ``path`` via temp file + rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    mode = "wb" if isinstance(data, (bytes, bytearray)) else "w"
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"encoding": "utf-8", "newline": "\n"})) as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class _Reader:
    def __init__(self, data, source):
        self.buf = memoryview(data)
        self.pos = 0
        self.source = source

    def take(self, n):
        if self.pos + n > len(self.buf):
            raise FormatError(f"{self.source}: truncated payload (needed {n} bytes at offset {self.pos})")
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def magic(self, expected):
        got = bytes(self.take(len(expected)))
        if got != expected:
            raise FormatError(f"{self.source}: bad magic {got!r}, expected {expected!r}")

    def u64(self, count=1):
        vals = struct.unpack(f"<{count}Q", self.take(8 * count))
        return vals if count > 1 else vals[0]

    def f64(self, count):
        if count > MAX_ELEMENTS:
            raise FormatError(f"{self.source}: element count {count} overflows")
        return np.frombuffer(self.take(8 * count), dtype=_F64).astype(np.float64)

    def done(self):
        if self.pos != len(self.buf):
            raise FormatError(f"{self.source}: {len(self.buf) - self.pos} trailing bytes")


def _checked_dims(dims, source):
    total = 1
    for d in dims:
        if d == 0 or d > MAX_ELEMENTS:
            raise FormatError(f"{source}: invalid dimension {d}")
        total *= d
        if total > MAX_ELEMENTS:
            raise FormatError(f"{source}: dims {dims} overflow")
    return total


def _tensor_body(t):
    t = np.ascontiguousarray(t, dtype=np.float64)
    if t.ndim != 3:
        raise FormatError(f"expected a third-order tensor, got shape {t.shape}")
    return struct.pack("<3Q", *t.shape) + t.astype(_F64).tobytes()


def _mlp_bytes(mlp):
    out = [MLP_MAGIC, struct.pack("<Q", len(mlp.weights))]
    for w in mlp.weights:
        out.append(struct.pack("<2Q", *w.shape))
        out.append(np.ascontiguousarray(w, dtype=_F64).tobytes())
    return b"".join(out)


def _read_mlp_weights(r):
    r.magic(MLP_MAGIC)
    count = r.u64()
    if count < 2 or count > 1024:
        raise FormatError(f"{r.source}: implausible layer count {count}")
    weights = []
    for _ in range(count):
        rows, cols = r.u64(2)
        n = _checked_dims((rows, cols), r.source)
        weights.append(r.f64(n).reshape(rows, cols))
    return weights


def tensor_to_bytes(t):
    return TENSOR_MAGIC + _tensor_body(t)


def tensor_from_bytes(data, source="<bytes>"):
    r = _Reader(data, source)
    r.magic(TENSOR_MAGIC)
    dims = r.u64(3)
    n = _checked_dims(dims, source)
    t = r.f64(n).reshape(dims)
    r.done()
    return t


def save_tensor(t, path):
    atomic_write(path, tensor_to_bytes(t))


def load_tensor(path):
    with open(path, "rb") as fh:
        return tensor_from_bytes(fh.read(), os.fspath(path))


def save_mask(m, path):
    m = np.asarray(m, dtype=np.float64)
    if not np.all((m == 0.0) | (m == 1.0)):
        raise FormatError("mask values must be 0.0 or 1.0")
    save_tensor(m, path)


def load_mask(path):
    m = load_tensor(path)
    if not np.all((m == 0.0) | (m == 1.0)):
        raise FormatError(f"{path}: mask values must be 0.0 or 1.0")
    return m


def model_to_bytes(model):
    parts = [MODEL_MAGIC, struct.pack("<3Q", *model.core.shape),
             np.ascontiguousarray(model.core, dtype=_F64).tobytes()]
    parts.extend(_mlp_bytes(m) for m in model.mlps)
    parts.append(struct.pack("<6d", *(b for pair in model.domain for b in pair)))
    parts.append(struct.pack("<3d", *(m.omega0 for m in model.mlps)))
    parts.append(struct.pack("<3Q", *(m.depth for m in model.mlps)))
    return b"".join(parts)


def model_from_bytes(data, source="<bytes>"):
    r = _Reader(data, source)
    r.magic(MODEL_MAGIC)
    ranks = r.u64(3)
    core = r.f64(_checked_dims(ranks, source)).reshape(ranks)
    weights = [_read_mlp_weights(r) for _ in range(3)]
    bounds = struct.unpack("<6d", r.take(48))
    omegas = struct.unpack("<3d", r.take(24))
    depths = r.u64(3)
    r.done()
    for w, d in zip(weights, depths):
        if len(w) != d:
            raise FormatError(f"{source}: depth record {d} does not match {len(w)} stored matrices")
    try:
        mlps = [Mlp(w, om) for w, om in zip(weights, omegas)]
        domain = (bounds[0:2], bounds[2:4], bounds[4:6])
        return LrtfrModel(core, mlps, domain)
    except ValueError as exc:
        raise FormatError(f"{source}: inconsistent model record: {exc}") from exc


def save_model(model, path):
    atomic_write(path, model_to_bytes(model))


def load_model(path):
    with open(path, "rb") as fh:
        return model_from_bytes(fh.read(), os.fspath(path))


def points_to_text(points):
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 3:
        raise FormatError(f"points must be n x 3, got {points.shape}")
    buf = io.StringIO()
    for x, y, z in points:
        buf.write(f"{float(x)!r} {float(y)!r} {float(z)!r}\n")
    return buf.getvalue()


def points_from_text(text, source="<text>"):
    rows = []
    for lineno, line in enumerate(text.split("\n"), 1):
        if not line.strip():
            continue
        fields = line.split(" ")
        if len(fields) != 3:
            raise FormatError(f"{source}:{lineno}: expected three space-separated values")
        try:
            rows.append([float(f) for f in fields])
        except ValueError as exc:
            raise FormatError(f"{source}:{lineno}: {exc}") from exc
    if not rows:
        raise FormatError(f"{source}: no points")
    pts = np.array(rows)
    if not np.all(np.isfinite(pts)):
        raise FormatError(f"{source}: non-finite coordinate")
    return pts


def save_points(points, path):
    atomic_write(path, points_to_text(points))


def load_points(path):
    with open(path, encoding="utf-8") as fh:
        return points_from_text(fh.read(), os.fspath(path))


def save_hpo_axes(axis1, axis2, path):
    text = ",".join(repr(float(v)) for v in axis1) + "\n" + ",".join(repr(float(v)) for v in axis2) + "\n"
    atomic_write(path, text)


def load_hpo_axes(path):
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().split("\n") if ln.strip()]
    if len(lines) != 2:
        raise FormatError(f"{path}: expected two lines of axis values, got {len(lines)}")
    try:
        return tuple(np.array([float(v) for v in ln.split(",")]) for ln in lines)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
