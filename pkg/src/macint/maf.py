"""Reader/writer for the MAF1 field file format.

Layout: one ASCII header line ``MAF1 <kind> <n>`` terminated by ``\\n``,
followed by little-endian float64 samples, row-major, components concatenated
in declared order.  ``kind`` is one of ``scalar`` (1 component), ``vector2``
(c1, c2), ``symmat`` (m11, m12, m22) or ``displacement`` (4 floats of the
linear part, row-major, then the periodic c1, c2).
"""
from __future__ import annotations

import os

import numpy as np

from .fields import DisplacementField, Grid, ScalarField, SymMatrixField, VectorField2

_DTYPE = np.dtype("<f8")


def _kind_and_blocks(field):
    if isinstance(field, ScalarField):
        return "scalar", [field.values]
    if isinstance(field, VectorField2):
        return "vector2", [field.c1.values, field.c2.values]
    if isinstance(field, SymMatrixField):
        return "symmat", [c.values for c in field.components()]
    if isinstance(field, DisplacementField):
        return "displacement", [field.linear.reshape(-1), field.periodic.c1.values,
                                field.periodic.c2.values]
    raise TypeError(f"cannot serialise {type(field).__name__}")


def dumps(field) -> bytes:
    kind, blocks = _kind_and_blocks(field)
    header = f"MAF1 {kind} {field.grid.n}\n".encode("ascii")
    body = b"".join(np.ascontiguousarray(b, dtype=_DTYPE).tobytes() for b in blocks)
    return header + body


def loads(data: bytes):
    nl = data.index(b"\n")
    parts = data[:nl].decode("ascii").split()
    if len(parts) != 3 or parts[0] != "MAF1":
        raise ValueError(f"not a MAF1 header: {data[:nl]!r}")
    kind, n = parts[1], int(parts[2])
    grid = Grid(n)
    flat = np.frombuffer(data[nl + 1:], dtype=_DTYPE).astype(np.float64)
    size = n * n
    counts = {"scalar": 1, "vector2": 2, "symmat": 3, "displacement": 2}
    if kind not in counts:
        raise ValueError(f"unknown MAF1 kind {kind!r}")
    extra = 4 if kind == "displacement" else 0
    if flat.size != extra + counts[kind] * size:
        raise ValueError(f"MAF1 payload has {flat.size} floats, expected {extra + counts[kind] * size}")
    comps = [ScalarField(grid, flat[extra + i * size: extra + (i + 1) * size].reshape(n, n))
             for i in range(counts[kind])]
    if kind == "scalar":
        return comps[0]
    if kind == "vector2":
        return VectorField2(*comps)
    if kind == "symmat":
        return SymMatrixField(*comps)
    return DisplacementField(flat[:4].reshape(2, 2), VectorField2(*comps))


def save(path: str | os.PathLike, field) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps(field))


def load(path: str | os.PathLike):
    with open(path, "rb") as fh:
        return loads(fh.read())
