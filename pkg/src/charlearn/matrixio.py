"""Matrix containers: CSV and the KLCM binary format.

Conventions shared by the whole package:

* a dataset matrix stores one realization per column (rows are components);
* CSV files are comma-separated, one matrix row per line, with an optional
  leading block of ``#``-prefixed comment lines and an optional header row;
* the binary single-matrix format ("KLCM") has a 16-byte header -- magic
  ``b"KLCM"``, ``u32 rows``, ``u32 cols``, ``u32 reserved`` -- followed by
  ``rows * cols`` little-endian float64 values in row-major order;
* a multi-section container ("KLCS") concatenates named KLCM blobs and is
  used to serialize fitted models.
"""

import io
import struct

import numpy as np

MAGIC_MATRIX = b"KLCM"
MAGIC_SECTIONS = b"KLCS"

_HEADER = struct.Struct("<4sIII")


class FormatError(ValueError):
    """Raised when a container file cannot be parsed."""


def save_matrix_csv(path, matrix, comments=()):
    """Write a matrix as CSV, one row per line, with optional comment lines."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    with open(path, "w", newline="\n") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        for row in matrix:
            fh.write(",".join(_fmt(v) for v in row))
            fh.write("\n")


def load_matrix_csv(path):
    """Read a CSV matrix, skipping comment lines and an optional header row."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            cells = line.split(",")
            try:
                rows.append([float(c) for c in cells])
            except ValueError:
                if rows:
                    raise FormatError(f"non-numeric row in {path!s}: {line!r}")
                continue  # header row
    if not rows:
        raise FormatError(f"no numeric data in {path!s}")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise FormatError(f"ragged rows in {path!s}")
    return np.asarray(rows, dtype=float)


def _fmt(value):
    # %.17g round-trips float64 exactly, keeping artifacts byte-stable.
    return format(float(value), ".17g")


def _pack_matrix(matrix):
    matrix = np.ascontiguousarray(np.atleast_2d(np.asarray(matrix, dtype="<f8")))
    rows, cols = matrix.shape
    return _HEADER.pack(MAGIC_MATRIX, rows, cols, 0) + matrix.tobytes()


def _unpack_matrix(buf, offset=0):
    magic, rows, cols, _ = _HEADER.unpack_from(buf, offset)
    if magic != MAGIC_MATRIX:
        raise FormatError(f"bad matrix magic {magic!r}")
    start = offset + _HEADER.size
    nbytes = rows * cols * 8
    if start + nbytes > len(buf):
        raise FormatError("truncated matrix payload")
    data = np.frombuffer(buf, dtype="<f8", count=rows * cols, offset=start)
    return data.reshape(rows, cols).copy(), start + nbytes


def save_matrix(path, matrix):
    """Write a single matrix in the KLCM binary format."""
    with open(path, "wb") as fh:
        fh.write(_pack_matrix(matrix))


def load_matrix(path):
    """Read a single KLCM binary matrix."""
    with open(path, "rb") as fh:
        buf = fh.read()
    matrix, _ = _unpack_matrix(buf)
    return matrix


def save_sections(path, sections):
    """Write named matrices as a KLCS container.

    ``sections`` maps str names to arrays; insertion order is preserved.
    """
    out = io.BytesIO()
    out.write(_HEADER.pack(MAGIC_SECTIONS, len(sections), 0, 0))
    for name, matrix in sections.items():
        raw = name.encode("utf-8")
        out.write(struct.pack("<I", len(raw)))
        out.write(raw)
        out.write(_pack_matrix(matrix))
    with open(path, "wb") as fh:
        fh.write(out.getvalue())


def load_sections(path):
    """Read a KLCS container into an ordered ``{name: matrix}`` dict."""
    with open(path, "rb") as fh:
        buf = fh.read()
    magic, count, _, _ = _HEADER.unpack_from(buf, 0)
    if magic != MAGIC_SECTIONS:
        raise FormatError(f"bad container magic {magic!r}")
    offset = _HEADER.size
    sections = {}
    for _ in range(count):
        (name_len,) = struct.unpack_from("<I", buf, offset)
        offset += 4
        name = buf[offset : offset + name_len].decode("utf-8")
        offset += name_len
        sections[name], offset = _unpack_matrix(buf, offset)
    return sections


def load_any(path):
    """Load a matrix from CSV or KLCM, sniffing the binary magic."""
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == MAGIC_MATRIX:
        return load_matrix(path)
    return load_matrix_csv(path)
