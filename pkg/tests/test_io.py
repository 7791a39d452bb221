import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from biharmonic_rp.io import (
    config_hash,
    file_sha256,
    load_field,
    read_csv,
    read_json,
    read_raw,
    save_field,
    write_csv,
    write_json,
    write_manifest,
    write_raw,
)
from biharmonic_rp.randfield import StrengthProfile, grid_for_box, sample_field

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(st.lists(finite, min_size=1, max_size=20))
def test_csv_round_trip_is_exact(tmp_path_factory, vals):
    path = tmp_path_factory.mktemp("csv") / "v.csv"
    write_csv(path, ["a", "b"], [np.array(vals), np.arange(len(vals))])
    header, data = read_csv(path)
    assert header == ["a", "b"]
    assert np.array_equal(data["a"], np.array(vals))
    assert np.array_equal(data["b"], np.arange(len(vals)))


def test_raw_round_trip(tmp_path, rng):
    a = rng.standard_normal((4, 5))
    write_raw(tmp_path / "a.f64", a)
    assert np.array_equal(read_raw(tmp_path / "a.f64", (4, 5)), a)


def test_json_is_canonical(tmp_path):
    a = write_json(tmp_path / "a.json", {"b": np.float64(1.5), "a": np.arange(3)})
    b = write_json(tmp_path / "b.json", {"a": [0, 1, 2], "b": 1.5})
    assert a.read_bytes() == b.read_bytes()
    assert read_json(a) == {"a": [0, 1, 2], "b": 1.5}
    assert config_hash({"x": 1, "y": [2]}) == config_hash({"y": [2], "x": 1})
    with pytest.raises(TypeError):
        write_json(tmp_path / "c.json", {"f": object()})


def test_manifest_records_file_hashes(tmp_path):
    f = write_csv(tmp_path / "t.csv", ["x"], [np.ones(3)])
    man = read_json(write_manifest(tmp_path, "stage", {"k": 1}, [f], seeds=[5], extra={"n": 3}))
    assert man["files"] == {"t.csv": file_sha256(f)}
    assert man["seeds"] == [5] and man["n"] == 3
    assert man["config_hash"] == config_hash({"k": 1})


@pytest.mark.parametrize("fmt", ["raw", "csv"])
def test_field_round_trip(tmp_path, fmt):
    box = ((-0.5, -0.5), (0.5, 0.5))
    mu = StrengthProfile.bumps([(0.0, 0.0)], [0.3], [1.0], box)
    f = sample_field(mu, 1.5, grid_for_box(*box, 1.0 / 8), seed=4)
    back = load_field(save_field(f, tmp_path, fmt=fmt))
    assert np.array_equal(back.values, f.values)
    assert back.seed == f.seed and back.order_m == f.order_m
    assert back.profile == f.profile
    assert back.grid.to_dict() == f.grid.to_dict()
    with pytest.raises(ValueError):
        save_field(f, tmp_path, fmt="hdf5")
