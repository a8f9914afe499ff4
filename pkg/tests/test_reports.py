import json
import math

import numpy as np

from cloudgap.reports import fmt_cell, write_csv, write_json


class TestFmtCell:
    def test_floats_round_trip_or_compact(self):
        assert fmt_cell(12.33) == "12.33"
        assert fmt_cell(10.0) == "10"
        assert fmt_cell(np.float64(0.8)) == "0.8"
        assert fmt_cell(14.355231143552308) == "14.355231143552308"

    def test_specials(self):
        assert fmt_cell(math.inf) == "inf"
        assert fmt_cell(-math.inf) == "-inf"
        assert fmt_cell(math.nan) == "nan"
        assert fmt_cell(None) == ""
        assert fmt_cell(True) == "true"
        assert fmt_cell(False) == "false"
        assert fmt_cell("NA") == "NA"


class TestWriters:
    def test_csv_always_has_header(self, tmp_path):
        path = write_csv(tmp_path / "x.csv", ["a", "b"], [])
        assert path.read_text() == "a,b\n"

    def test_json_carries_schema_version_and_survives_inf(self, tmp_path):
        path = write_json(tmp_path / "x.json", {"ratio": math.inf, "v": 1.5})
        doc = json.loads(path.read_text())
        assert doc["schema_version"] == 1
        assert doc["ratio"] == "inf"
        assert doc["v"] == 1.5

    def test_json_key_order_stable(self, tmp_path):
        a = write_json(tmp_path / "a.json", {"b": 1, "a": 2}).read_text()
        b = write_json(tmp_path / "b.json", {"a": 2, "b": 1}).read_text()
        assert a == b
