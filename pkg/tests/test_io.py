from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given

from dilatekit.instances import complex_gaussian
from dilatekit.io import (
    MatrixFormatError,
    load_matrix,
    matrix_from_dict,
    matrix_to_dict,
    render_table,
    save_matrix,
)

from .strategies import rngs, small_dims


@given(rngs(), small_dims, small_dims)
def test_dict_roundtrip_is_exact(rng, r, c):
    M = complex_gaussian(rng, (r, c))
    assert np.array_equal(matrix_from_dict(json.loads(json.dumps(matrix_to_dict(M)))), M)


def test_length_mismatch_rejected():
    with pytest.raises(MatrixFormatError):
        matrix_from_dict({"rows": 2, "cols": 2, "data": [[1, 0]] * 3})


def test_bad_entry_rejected():
    with pytest.raises(MatrixFormatError):
        matrix_from_dict({"rows": 1, "cols": 1, "data": [[1, 0, 0]]})


def test_missing_file_names_path(tmp_path):
    path = tmp_path / "absent.json"
    with pytest.raises(FileNotFoundError, match="absent.json"):
        load_matrix(path)


def test_malformed_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(MatrixFormatError, match="malformed JSON"):
        load_matrix(path)


def test_save_load(tmp_path):
    M = np.array([[1 + 2j, -0.5]])
    save_matrix(tmp_path / "m.json", M)
    assert np.array_equal(load_matrix(tmp_path / "m.json"), M)


class TestRenderTable:
    rows = [{"a": 1, "b": 0.1 + 0.2, "c": None}]

    def test_csv_header_and_precision(self):
        text = render_table(self.rows, ["a", "b", "c"], config={"z": 1, "k": "v"}, notes=["hi"])
        lines = text.splitlines()
        assert lines[0] == '# config: {"k": "v", "z": 1}'
        assert lines[1] == "# note: hi"
        assert lines[2] == "a,b,c"
        assert lines[3] == "1,0.30000000000000004,"

    def test_json(self):
        doc = json.loads(render_table(self.rows, ["a", "b", "c"], fmt="json", config={"x": 2}))
        assert doc["config"] == {"x": 2}
        assert doc["rows"][0]["b"] == 0.1 + 0.2
        assert doc["rows"][0]["c"] is None

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            render_table(self.rows, ["a"], fmt="xml")
