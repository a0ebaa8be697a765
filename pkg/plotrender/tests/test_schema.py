import json

import pytest

from plotrender import SchemaError, load_samples, load_segments

from conftest import COLUMNS, make_row, write_csv


def test_loaded_rows_are_typed(cloud_csv):
    rows = load_samples(cloud_csv)
    assert len(rows) == 7
    first = rows[0]
    assert first["j1"] == 1 and isinstance(first["j1"], int)
    assert first["degeneracy"] == 4 and isinstance(first["degeneracy"], int)
    assert first["boundary"] == "obc" and first["engine"] == "ed"
    assert first["alpha"] == 0.0 and isinstance(first["alpha"], float)
    assert first["seg_lo"] == -1.0 and first["seg_hi"] == 1.0


def test_empty_cells_become_none(cloud_csv):
    rows = load_samples(cloud_csv)
    assert all(r["D"] is None for r in rows)
    assert all(r["trunc_weight"] is None for r in rows)
    assert rows[2]["seg_lo"] is None


def test_missing_columns_are_all_listed(tmp_path):
    cols = [c for c in COLUMNS if c not in ("x3", "D")]
    path = write_csv(tmp_path / "bad.csv", [], columns=cols)
    with pytest.raises(SchemaError) as err:
        load_samples(path)
    assert set(err.value.missing) == {"x3", "D"}
    assert "x3" in str(err.value) and "D" in str(err.value)


def test_header_only_csv_loads_as_empty(tmp_path):
    path = write_csv(tmp_path / "empty.csv", [])
    assert load_samples(path) == []


def test_segments_round_trip(segments_json):
    segs = load_segments(segments_json)
    assert len(segs) == 1
    assert segs[0]["axis"] == "x3"
    assert segs[0]["lo"] == -1.0 and segs[0]["hi"] == 1.0


def test_segments_require_all_keys(tmp_path):
    path = tmp_path / "segs.json"
    path.write_text(json.dumps([{"j1": 1, "axis": "x3"}]))
    with pytest.raises(SchemaError) as err:
        load_segments(str(path))
    assert "lo" in err.value.missing and "hi" in err.value.missing


def test_segments_must_be_a_list(tmp_path):
    path = tmp_path / "segs.json"
    path.write_text(json.dumps({"j1": 1}))
    with pytest.raises(SchemaError):
        load_segments(str(path))


def test_extra_csv_columns_are_tolerated(tmp_path):
    cols = COLUMNS + ["comment"]
    rows = [make_row() + ["hello"]]
    path = write_csv(tmp_path / "extra.csv", rows, columns=cols)
    loaded = load_samples(path)
    assert len(loaded) == 1
    assert "comment" not in loaded[0]
