"""Plain-text matrix files.

Line 1 holds ``rows cols``; each following line holds one matrix row as
``re im`` pairs separated by single spaces. Floats are written with
Python's shortest round-trip repr, so write/read is bit-exact.
"""
from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch


def dumps_matrix(a) -> str:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {a.shape}")
    rows, cols = a.shape
    lines = [f"{rows} {cols}"]
    for i in range(rows):
        parts = []
        for j in range(cols):
            z = a[i, j]
            parts.append(repr(float(z.real)))
            parts.append(repr(float(z.imag)))
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def loads_matrix(text: str) -> np.ndarray:
    tokens = text.split()
    if len(tokens) < 2:
        raise DimensionMismatch("matrix text is missing the header line")
    try:
        rows, cols = int(tokens[0]), int(tokens[1])
    except ValueError as exc:
        raise DimensionMismatch(f"bad matrix header: {tokens[:2]}") from exc
    body = tokens[2:]
    if len(body) != 2 * rows * cols:
        raise DimensionMismatch(
            f"matrix body has {len(body)} numbers, expected {2 * rows * cols}"
        )
    vals = np.array([float(t) for t in body], dtype=np.float64)
    re = vals[0::2].reshape(rows, cols)
    im = vals[1::2].reshape(rows, cols)
    return re + 1j * im


def write_matrix(path, a) -> None:
    if isinstance(path, io.TextIOBase):
        path.write(dumps_matrix(a))
        return
    Path(path).write_text(dumps_matrix(a))


def read_matrix(path) -> np.ndarray:
    if isinstance(path, io.TextIOBase):
        return loads_matrix(path.read())
    return loads_matrix(Path(path).read_text())
