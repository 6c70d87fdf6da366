"""Dataset, point-list and config file formats used by the CLI.

Dataset CSV: header ``y,x1,...,xd``, y in {0, 1}, one row per observation.
Point CSV: header ``x1,...,xd``.  Density CSV: header ``x,density``.
Config: ``key = value`` per line, ``#`` starts a comment.
"""
from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .errors import ParseError

FLOAT_FMT = ".17g"


def fmt(x: float) -> str:
    return format(float(x), FLOAT_FMT)


def _read_rows(path) -> tuple[list[str], list[tuple[int, list[str]]]]:
    p = Path(path)
    if not p.is_file():
        raise ParseError(f"{p}: file not found")
    text = p.read_text(encoding="utf-8")
    reader = csv.reader(io.StringIO(text))
    rows = [(i + 1, r) for i, r in enumerate(reader) if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError(f"{p}: empty file")
    header = [h.strip() for h in rows[0][1]]
    return header, rows[1:]


def _floats(path, lineno: int, cells: list[str], width: int) -> list[float]:
    if len(cells) != width:
        raise ParseError(f"{path}:{lineno}: expected {width} fields, got {len(cells)}")
    try:
        vals = [float(c) for c in cells]
    except ValueError:
        raise ParseError(f"{path}:{lineno}: non-numeric field in {cells!r}") from None
    if not all(np.isfinite(vals)):
        raise ParseError(f"{path}:{lineno}: non-finite value")
    return vals


def read_dataset(path) -> tuple[np.ndarray, np.ndarray]:
    """Return (majority, minority) feature arrays from a labelled CSV."""
    header, rows = _read_rows(path)
    if "y" not in header:
        raise ParseError(f"{path}:1: missing label column 'y'")
    if header[0] != "y":
        raise ParseError(f"{path}:1: label column 'y' must come first")
    feats = header[1:]
    if not feats or feats != [f"x{i + 1}" for i in range(len(feats))]:
        raise ParseError(f"{path}:1: feature columns must be named x1..xd, got {feats!r}")
    maj, mino = [], []
    for lineno, cells in rows:
        vals = _floats(path, lineno, cells, len(header))
        if vals[0] not in (0.0, 1.0):
            raise ParseError(f"{path}:{lineno}: label must be 0 or 1, got {cells[0]!r}")
        (mino if vals[0] == 1.0 else maj).append(vals[1:])
    d = len(feats)
    return np.array(maj, float).reshape(-1, d), np.array(mino, float).reshape(-1, d)


def write_dataset(path, majority, minority) -> None:
    maj = np.atleast_2d(np.asarray(majority, float))
    mino = np.atleast_2d(np.asarray(minority, float))
    d = maj.shape[1]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(["y"] + [f"x{i + 1}" for i in range(d)]) + "\n")
        for label, block in ((0, maj), (1, mino)):
            for row in block:
                fh.write(",".join([str(label)] + [fmt(v) for v in row]) + "\n")


def read_points(path) -> np.ndarray:
    header, rows = _read_rows(path)
    if header != [f"x{i + 1}" for i in range(len(header))]:
        raise ParseError(f"{path}:1: point columns must be named x1..xd, got {header!r}")
    pts = [_floats(path, lineno, cells, len(header)) for lineno, cells in rows]
    if not pts:
        raise ParseError(f"{path}: no points")
    return np.array(pts, float)


def read_density_table(path) -> tuple[np.ndarray, np.ndarray]:
    header, rows = _read_rows(path)
    if header != ["x", "density"]:
        raise ParseError(f"{path}:1: density file header must be 'x,density'")
    tab = np.array([_floats(path, lineno, cells, 2) for lineno, cells in rows], float)
    if len(tab) < 3:
        raise ParseError(f"{path}: need at least 3 tabulated points")
    if np.any(np.diff(tab[:, 0]) <= 0):
        raise ParseError(f"{path}: x values must be strictly increasing")
    if np.any(tab[:, 1] < 0):
        raise ParseError(f"{path}: density values must be non-negative")
    return tab[:, 0], tab[:, 1]


def read_config(path) -> dict[str, str]:
    p = Path(path)
    if not p.is_file():
        raise ParseError(f"{p}: config file not found")
    out: dict[str, str] = {}
    for lineno, line in enumerate(p.read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"{p}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ParseError(f"{p}:{lineno}: empty key")
        out[key.replace("-", "_")] = value
    return out


def parse_vector(text: str, name: str) -> np.ndarray:
    try:
        v = np.array([float(t) for t in str(text).split(",") if t.strip()], float)
    except ValueError:
        raise ParseError(f"--{name}: expected comma-separated numbers, got {text!r}") from None
    if v.size == 0:
        raise ParseError(f"--{name}: empty value")
    return v


def parse_matrix(text: str, name: str) -> np.ndarray:
    rows = [parse_vector(r, name) for r in str(text).split(";") if r.strip()]
    if not rows or any(len(r) != len(rows) for r in rows):
        raise ParseError(f"--{name}: expected a square matrix like '1,0.5;0.5,2'")
    return np.array(rows)


def parse_int_list(text: str, name: str) -> list[int]:
    try:
        vals = [int(float(t)) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise ParseError(f"--{name}: expected comma-separated integers") from None
    if not vals or any(v < 1 for v in vals):
        raise ParseError(f"--{name}: values must be positive integers")
    return vals
