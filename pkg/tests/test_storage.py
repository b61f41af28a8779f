import numpy as np
import pytest

from rydchain import storage
from rydchain.errors import ConfigurationError


def test_float_formatting():
    assert storage.format_value(0.1) == "0.10000000000000001"
    assert storage.format_value(float("nan")) == "nan"
    assert storage.format_value(-np.inf) == "-inf"
    assert storage.format_value(np.int64(3)) == "3"
    assert storage.format_value(True) == "true"
    assert storage.format_value(None) == ""


def test_columns_round_trip_exactly(tmp_path):
    rng = np.random.default_rng(0)
    cols = {"t_natural": rng.random(50), "fidelity": rng.random(50) ** 7}
    path = tmp_path / "s.csv"
    storage.write_columns(path, cols)
    back = storage.read_csv(path)
    for k in cols:
        np.testing.assert_array_equal(back[k], cols[k])
    raw = path.read_bytes()
    assert b"\r" not in raw and raw.startswith(b"t_natural,fidelity\n")
    assert storage.series_text(cols) == raw.decode()


def test_text_columns_stay_strings(tmp_path):
    path = tmp_path / "m.csv"
    storage.write_csv(path, ("a", "label"), [(1.0, "x"), (2.0, "y")])
    back = storage.read_csv(path)
    assert back["label"] == ["x", "y"]
    np.testing.assert_array_equal(back["a"], [1.0, 2.0])


def test_json_is_deterministic_and_nan_free():
    a = storage.dumps({"b": np.float64("nan"), "a": np.arange(3), "c": np.bool_(True)})
    assert a == storage.dumps({"c": True, "a": [0, 1, 2], "b": None})
    assert "NaN" not in a


def test_missing_files_are_configuration_errors(tmp_path):
    with pytest.raises(ConfigurationError):
        storage.read_csv(tmp_path / "absent.csv")
    with pytest.raises(ConfigurationError):
        storage.read_json(tmp_path / "absent.json")


def test_cell_dirname():
    assert storage.cell_dirname(9, 0.45) == "d9.0_w0.45"
