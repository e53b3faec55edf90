"""Atomic file output and checksums."""

from __future__ import annotations

import hashlib
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..errors import OutputError


def atomic_write_text(path: Path, text: str) -> str:
    """Write via a temporary file in the same directory and rename; return sha256."""
    path = Path(path)
    data = text.encode()
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


def csv_text(header_comments: Sequence[str], columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    """CSV with ``#`` comment lines, a header row, and full-precision floats."""
    buf = io.StringIO()
    for line in header_comments:
        buf.write(f"# {line}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def read_csv(path: Path) -> dict[str, np.ndarray]:
    """Columns of a file written by :func:`csv_text`, keyed by header name.

    Numeric columns become float arrays, anything else an array of strings.
    """
    lines = [l for l in Path(path).read_text().splitlines() if l and not l.startswith("#")]
    cols = lines[0].split(",")
    rows = [l.split(",") for l in lines[1:]]
    out = {}
    for i, name in enumerate(cols):
        vals = [r[i] for r in rows]
        out[name] = np.array([float(v) for v in vals]) if all(map(_isfloat, vals)) else np.array(vals)
    return out


def _isfloat(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False
