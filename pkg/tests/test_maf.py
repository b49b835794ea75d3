import struct

import numpy as np
import pytest

from macint import maf
from macint.fields import DisplacementField, Grid, ScalarField, SymMatrixField, VectorField2

from conftest import band_limited


@pytest.fixture
def fields(grid64, rng):
    s = band_limited(grid64, rng)
    v = VectorField2(band_limited(grid64, rng), band_limited(grid64, rng))
    m = SymMatrixField(s, s * 2.0, s * 3.0)
    d = DisplacementField(np.array([[1.0, 2.0], [3.0, 4.0]]), v)
    return {"scalar": s, "vector2": v, "symmat": m, "displacement": d}


@pytest.mark.parametrize("kind", ["scalar", "vector2", "symmat", "displacement"])
def test_round_trip(fields, kind, tmp_path):
    f = fields[kind]
    path = tmp_path / f"{kind}.maf"
    maf.save(path, f)
    g = maf.load(path)
    assert type(g) is type(f)
    assert maf.dumps(g) == maf.dumps(f)
    assert path.read_bytes().startswith(f"MAF1 {kind} 64\n".encode())


def test_layout_is_little_endian_row_major():
    g = Grid(32)
    arr = np.arange(32 * 32, dtype=float).reshape(32, 32)
    data = maf.dumps(ScalarField(g, arr))
    body = data[data.index(b"\n") + 1:]
    assert struct.unpack("<3d", body[:24]) == (0.0, 1.0, 2.0)
    assert struct.unpack("<d", body[8 * 32: 8 * 33])[0] == 32.0  # second row starts with arr[1, 0]


def test_displacement_prepends_linear_part(fields):
    body = maf.dumps(fields["displacement"])
    body = body[body.index(b"\n") + 1:]
    assert struct.unpack("<4d", body[:32]) == (1.0, 2.0, 3.0, 4.0)


def test_bad_inputs():
    with pytest.raises(ValueError):
        maf.loads(b"MAF2 scalar 32\n")
    with pytest.raises(ValueError):
        maf.loads(b"MAF1 tensor 32\n")
    with pytest.raises(ValueError):
        maf.loads(b"MAF1 scalar 32\n" + b"\0" * 16)
    with pytest.raises(TypeError):
        maf.dumps(np.zeros((4, 4)))
