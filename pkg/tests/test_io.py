import csv
import json

import numpy as np
import pytest

from zkblowup.grid import Field2D, Profile1D, make_grid
from zkblowup.io import (FieldFormatError, field_from_bytes, field_to_bytes, read_field,
                         write_field, write_field_csv, write_json, write_profiles_csv)


def test_round_trip_bitwise(tmp_path, rng):
    g = make_grid(32, 16, 3.5, 1.25)
    f = Field2D(g, rng.standard_normal(g.shape))
    p = write_field(tmp_path / "f.zkf", f)
    h = read_field(p)
    assert h.grid == g
    assert h.values.tobytes() == f.values.tobytes()


def test_size_512():
    g = make_grid(512, 512, 20.0, 20.0)
    assert len(field_to_bytes(Field2D(g, np.zeros(g.shape)))) == 2_097_180


def test_header_layout():
    g = make_grid(8, 16, 1.0, 2.0)
    b = field_to_bytes(Field2D(g, np.arange(128.0).reshape(16, 8)))
    assert b[:4] == b"ZKF1"
    assert int.from_bytes(b[4:8], "little") == 8
    assert int.from_bytes(b[8:12], "little") == 16
    # x fastest: second value is the x-neighbour of the first
    vals = np.frombuffer(b[28:], dtype="<f8")
    assert vals[1] == 1.0 and vals[8] == 8.0


@pytest.mark.parametrize("mutate", [
    lambda b: b"XKF1" + b[4:],
    lambda b: b[:-8],
    lambda b: b[:10],
    lambda b: b[:4] + (1 << 20).to_bytes(4, "little") + (1 << 20).to_bytes(4, "little") + b[12:],
    lambda b: b[:4] + (12).to_bytes(4, "little") + b[8:],
])
def test_corrupted(mutate):
    g = make_grid(8, 8, 1.0, 1.0)
    b = field_to_bytes(Field2D(g, np.ones(g.shape)))
    with pytest.raises(FieldFormatError):
        field_from_bytes(mutate(b))


def test_non_finite_refused(tmp_path):
    g = make_grid(8, 8, 1.0, 1.0)
    with pytest.raises(ValueError):
        write_field(tmp_path / "x.zkf", Field2D(g, np.full(g.shape, np.inf)))


def test_csv_and_json(tmp_path):
    g = make_grid(8, 8, 1.0, 1.0)
    f = Field2D.from_function(g, lambda x, y: x * y)
    with open(write_field_csv(tmp_path / "f.csv", f)) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "y", "value"] and len(rows) == 65
    p = Profile1D(1.0, np.arange(4.0))
    with pytest.raises(ValueError):
        write_profiles_csv(tmp_path / "bad.csv", {"a": np.zeros(3), "b": np.zeros(4)})
    write_profiles_csv(tmp_path / "p.csv", {"y": p.coords, "v": p.values})
    assert json.loads(write_json(tmp_path / "d.json", {"a": 1}).read_text()) == {"a": 1}
