"""Matrix JSON files and CSV/JSON table output."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np


class MatrixFormatError(ValueError):
    pass


def matrix_to_dict(M) -> dict:
    A = np.asarray(M, dtype=complex)
    if A.ndim == 1:
        A = A[:, None]
    rows, cols = A.shape
    return {
        "rows": rows,
        "cols": cols,
        "data": [[float(z.real), float(z.imag)] for z in A.ravel()],
    }


def matrix_from_dict(obj: Mapping[str, Any]) -> np.ndarray:
    """Parse ``{"rows": n, "cols": m, "data": [[re, im], ...]}`` (row-major)."""
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise MatrixFormatError(f"matrix object needs rows, cols and data: {exc}") from None
    if rows < 1 or cols < 1:
        raise MatrixFormatError(f"rows and cols must be positive, got {rows}x{cols}")
    if len(data) != rows * cols:
        raise MatrixFormatError(f"data has {len(data)} entries, expected {rows}x{cols}={rows * cols}")
    try:
        vals = np.array([complex(float(re), float(im)) for re, im in data])
    except (TypeError, ValueError):
        raise MatrixFormatError("each data entry must be a [re, im] pair of numbers") from None
    if not np.all(np.isfinite(vals)):
        raise MatrixFormatError("matrix has non-finite entries")
    return vals.reshape(rows, cols)


def load_matrix(path) -> np.ndarray:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FileNotFoundError(f"cannot read matrix file {path}: {exc.strerror}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixFormatError(f"malformed JSON in {path}: {exc}") from None
    return matrix_from_dict(obj)


def save_matrix(path, M) -> None:
    Path(path).write_text(json.dumps(matrix_to_dict(M)) + "\n")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def render_table(
    rows: Sequence[Mapping[str, Any]],
    columns: Sequence[str],
    *,
    fmt: str = "csv",
    config: Mapping[str, Any] | None = None,
    notes: Iterable[str] = (),
) -> str:
    """Render rows as CSV (with ``#`` header lines) or as a JSON document.

    Floats are written with ``repr`` so values round-trip exactly.
    """
    if fmt == "json":
        doc = {
            "config": dict(config or {}),
            "notes": list(notes),
            "columns": list(columns),
            "rows": [{c: _jsonable(r.get(c)) for c in columns} for r in rows],
        }
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(dict(config or {}), sort_keys=True) + "\n")
    for note in notes:
        buf.write(f"# note: {note}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    return x
