"""Golden-file CSV format for matrices and weight vectors.

Layout::

    rows,cols
    v00,v01,...
    v10,v11,...

One matrix row per line.  Values use Python's shortest round-trip repr, so
reading a written file gives back the same doubles bit for bit.  Vectors are
stored as a single column.
"""

from pathlib import Path

import numpy as np

from .bias import RelativeBias1D, RelativeBias2D
from .errors import GoldenFormatError

__all__ = [
    "write_matrix",
    "read_matrix",
    "format_matrix",
    "parse_matrix",
    "write_vector",
    "read_vector",
    "save_bias1d",
    "load_bias1d",
    "save_bias2d",
    "load_bias2d",
]


def format_matrix(a):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"golden files hold 2-D data, got shape {a.shape}")
    lines = [f"{a.shape[0]},{a.shape[1]}"]
    lines.extend(",".join(repr(float(x)) for x in row) for row in a)
    return "\n".join(lines) + "\n"


def parse_matrix(text):
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise GoldenFormatError("missing header", line=1)
    header = lines[0].split(",")
    try:
        rows, cols = (int(h) for h in header)
    except ValueError:
        raise GoldenFormatError(f"malformed header {lines[0]!r}, expected 'rows,cols'", line=1)
    if rows < 0 or cols < 0:
        raise GoldenFormatError(f"negative shape in header {lines[0]!r}", line=1)

    body = lines[1:]
    # tolerate a single trailing blank line
    while body and not body[-1].strip():
        body.pop()
    out = np.empty((rows, cols))
    for i, line in enumerate(body):
        lineno = i + 2
        if i >= rows:
            raise GoldenFormatError(f"header declares {rows} rows but more follow", line=lineno)
        fields = line.split(",")
        if len(fields) != cols:
            raise GoldenFormatError(f"expected {cols} values, found {len(fields)}", line=lineno)
        try:
            out[i] = [float(f) for f in fields]
        except ValueError as exc:
            raise GoldenFormatError(f"unparseable value ({exc})", line=lineno)
    if len(body) < rows:
        raise GoldenFormatError(
            f"header declares {rows} rows, only {len(body)} present", line=len(body) + 2
        )
    return out


def write_matrix(path, a):
    Path(path).write_text(format_matrix(a))


def read_matrix(path):
    return parse_matrix(Path(path).read_text())


def write_vector(path, v):
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    write_matrix(path, v[:, None])


def read_vector(path):
    a = read_matrix(path)
    if a.shape[1] != 1:
        raise GoldenFormatError(f"expected a single column, found {a.shape[1]}", line=1)
    return a[:, 0]


def save_bias1d(path, bias):
    write_vector(path, bias.weights)


def load_bias1d(path):
    w = read_vector(path)
    return RelativeBias1D((w.shape[0] + 1) // 2, w)


def save_bias2d(path, bias):
    """Shared biases store one column; separate biases store (v, h) columns."""
    if bias.shared:
        write_vector(path, bias.weights_h)
    else:
        write_matrix(path, np.stack([bias.weights_v, bias.weights_h], axis=1))


def load_bias2d(path):
    a = read_matrix(path)
    side = (a.shape[0] + 1) // 2
    if a.shape[1] == 1:
        return RelativeBias2D(side, a[:, 0])
    if a.shape[1] == 2:
        return RelativeBias2D(side, a[:, 1], a[:, 0], shared=False)
    raise GoldenFormatError(f"2D bias file needs 1 or 2 columns, found {a.shape[1]}", line=1)
