"""File output: 17-digit CSV/JSON, atomic writes and the binary snapshot format."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile

import numpy as np

SNAPSHOT_MAGIC = "NLS2"


def fmt(x) -> str:
    """Round-trip-exact text for a float (17 significant digits)."""
    return f"{float(x):.17g}"


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    close = " " * (indent * level)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(obj[k], indent, level + 1)}"
                 for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + close + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + close + "]"
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return fmt(x)
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot encode {type(obj).__name__} as JSON")


def dumps_json(obj) -> str:
    """JSON with sorted keys and every float written with 17 significant digits."""
    return _encode(obj, 1, 0) + "\n"


def atomic_write(path, data) -> str:
    """Write ``data`` (str or bytes) to ``path`` via a temp file and rename."""
    path = os.fspath(path)
    d = os.path.dirname(path) or "."
    os.makedirs(d, exist_ok=True)
    mode = "wb" if isinstance(data, (bytes, bytearray)) else "w"
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_json(path, obj) -> str:
    return atomic_write(path, dumps_json(obj))


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_csv(path, header, rows) -> str:
    return atomic_write(path, csv_text(header, rows))


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def snapshot_bytes(state, omega: float) -> bytes:
    """Header ``NLS2 N L t omega`` then ``N`` records of four little-endian
    float64 values (Re u, Im u, Re v, Im v)."""
    g = state.grid
    head = f"{SNAPSHOT_MAGIC} {g.N} {fmt(g.L)} {fmt(state.t)} {fmt(omega)}\n".encode()
    body = np.empty((g.N, 4), dtype="<f8")
    body[:, 0], body[:, 1] = state.u.real, state.u.imag
    body[:, 2], body[:, 3] = state.v.real, state.v.imag
    return head + body.tobytes()


def write_snapshot(path, state, omega: float) -> str:
    return atomic_write(path, snapshot_bytes(state, omega))


def read_snapshot(path):
    """Return ``(state, omega)`` from a snapshot file."""
    from .grid import Grid
    from .simulate import SimState

    with open(path, "rb") as fh:
        head = fh.readline().decode().split()
        if len(head) != 5 or head[0] != SNAPSHOT_MAGIC:
            raise ValueError(f"{path}: not a {SNAPSHOT_MAGIC} snapshot")
        n, L, t, omega = int(head[1]), float(head[2]), float(head[3]), float(head[4])
        body = np.frombuffer(fh.read(), dtype="<f8")
    if body.size != 4 * n:
        raise ValueError(f"{path}: expected {4 * n} values, found {body.size}")
    body = body.reshape(n, 4)
    state = SimState(Grid(L, n), t, body[:, 0] + 1j * body[:, 1], body[:, 2] + 1j * body[:, 3])
    return state, omega


__all__ = ["fmt", "dumps_json", "atomic_write", "write_json", "write_csv", "csv_text",
           "sha256_file", "snapshot_bytes", "write_snapshot", "read_snapshot"]
