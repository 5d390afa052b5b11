"""Data interchange: CSV matrices (one sample per column), 1-based label
files, JSON reports. All writes go through a write-temp-rename so partially
written files never replace good ones."""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

__all__ = [
    "DataError",
    "load_matrix",
    "save_matrix",
    "load_labels",
    "save_labels",
    "save_json",
    "atomic_write_text",
]


class DataError(ValueError):
    """Malformed input data (CLI exit code 3)."""


def atomic_write_text(path: str, content: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_matrix(path: str) -> np.ndarray:
    """Read a D x N matrix from CSV, one sample per column.

    Lines starting with '#' are comments. A single leading non-numeric row is
    treated as a header and skipped. Ragged rows are rejected with the
    offending location.
    """
    rows = []
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split(",")
            try:
                values = [float(tok) for tok in tokens]
            except ValueError:
                if not rows:
                    continue  # header row
                bad = next(t for t in tokens if not _is_float(t))
                raise DataError(
                    f"{path}:{lineno}: cannot parse {bad.strip()!r} as a number"
                ) from None
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise DataError(
                    f"{path}:{lineno}: row has {len(values)} columns, expected {width}"
                )
            rows.append(values)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return np.asarray(rows, dtype=float)


def _is_float(tok: str) -> bool:
    try:
        float(tok)
        return True
    except ValueError:
        return False


def save_matrix(path: str, Y: np.ndarray) -> None:
    """Write with 17 significant digits so round-trips are exact."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    lines = [f"# D={Y.shape[0]} N={Y.shape[1]}"]
    for row in Y:
        lines.append(",".join(f"{v:.17g}" for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_labels(path: str) -> np.ndarray:
    labels = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                value = int(line)
            except ValueError:
                raise DataError(f"{path}:{lineno}: {line!r} is not an integer") from None
            if value < 1:
                raise DataError(f"{path}:{lineno}: labels are 1-based, got {value}")
            labels.append(value)
    if not labels:
        raise DataError(f"{path}: no labels")
    return np.asarray(labels, dtype=int)


def save_labels(path: str, labels: np.ndarray) -> None:
    atomic_write_text(path, "\n".join(str(int(v)) for v in labels) + "\n")


def save_json(path: str, payload: dict) -> None:
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
