import json

import numpy as np
import pytest

from tailcut.errors import MalformedInput
from tailcut.io import read_json_values, read_table, read_timed_pairs, read_values, sniff_delimiter


class TestDelimited:
    @pytest.mark.parametrize(
        "lines,expected",
        [(["a,b", "1,2"], ","), (["a;b", "1;2"], ";"), (["a\tb", "1\t2"], "\t"), (["1", "2"], ",")],
    )
    def test_sniff(self, lines, expected):
        assert sniff_delimiter(lines) == expected

    def test_header_detection(self):
        table = read_table("id;loss\n1;2.5\n2;3.5\n")
        assert table.header
        assert list(table.frame.columns) == ["id", "loss"]
        assert table.line_numbers == [2, 3]

        table = read_table("1,2.5\n\n2,3.5\n")
        assert not table.header
        assert table.line_numbers == [1, 3]

    def test_empty(self):
        with pytest.raises(MalformedInput) as ctx:
            read_table("\n  \n")
        ctx.match("empty")

    def test_read_values_last_column(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("id,loss\n1,2.5\n2,3.5\n3,10\n", encoding="utf-8")
        np.testing.assert_array_equal(read_values(path), [2.5, 3.5, 10.0])

    @pytest.mark.parametrize("column", ["id", "0"])
    def test_read_values_column(self, tmp_path, column):
        path = tmp_path / "data.tsv"
        path.write_text("id\tloss\n1\t2.5\n2\t3.5\n", encoding="utf-8")
        np.testing.assert_array_equal(read_values(path, column), [1.0, 2.0])

    def test_unknown_column(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("id,loss\n1,2.5\n", encoding="utf-8")
        with pytest.raises(MalformedInput) as ctx:
            read_values(path, "amount")
        ctx.match("no column 'amount'")

    def test_bad_value_reports_line(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("loss\n1.5\n\nabc\n", encoding="utf-8")
        with pytest.raises(MalformedInput) as ctx:
            read_values(path)
        assert ctx.value.line == 4
        ctx.match("not a finite number")

    def test_not_utf8(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_bytes(b"\xff\xfe\x00\x81")
        with pytest.raises(MalformedInput):
            read_values(path)


class TestJson:
    def test_default_path(self):
        np.testing.assert_array_equal(read_json_values([1, 2.5, 3]), [1.0, 2.5, 3.0])

    def test_path(self):
        document = {"claims": [{"amount": 10}, {"amount": 20.5}, {"other": 1}]}
        np.testing.assert_array_equal(read_json_values(document, "$.claims[*].amount"), [10, 20.5])

    @pytest.mark.parametrize(
        "document,path,message",
        [
            ([1, "x"], "$[*]", "not a number"),
            ([True], "$[*]", "not a number"),
            ({"a": 1}, "$.b", "matched no values"),
            ([1], "$[", "invalid JSONPath"),
        ],
    )
    def test_invalid(self, document, path, message):
        with pytest.raises(MalformedInput) as ctx:
            read_json_values(document, path)
        ctx.match(message)

    def test_read_values(self, tmp_path):
        path = tmp_path / "claims.json"
        path.write_text(json.dumps({"x": [3, 4]}), encoding="utf-8")
        np.testing.assert_array_equal(read_values(path, "$.x[*]"), [3.0, 4.0])

    def test_broken_json(self, tmp_path):
        path = tmp_path / "claims.json"
        path.write_text('{"x": [3, 4\n', encoding="utf-8")
        with pytest.raises(MalformedInput):
            read_values(path)


class TestTimedPairs:
    def test_numeric(self, tmp_path):
        path = tmp_path / "losses.csv"
        path.write_text("time,loss\n2.0,5\n1.0,3\n", encoding="utf-8")
        times, losses = read_timed_pairs(path)
        np.testing.assert_array_equal(times, [2.0, 1.0])
        np.testing.assert_array_equal(losses, [5.0, 3.0])

    def test_iso_timestamps(self, tmp_path):
        path = tmp_path / "losses.csv"
        path.write_text(
            "2020-01-01T00:00:00Z;1.5\n2020-01-01T00:01:00Z;2.5\n", encoding="utf-8"
        )
        times, losses = read_timed_pairs(path)
        assert times[1] - times[0] == 60.0
        np.testing.assert_array_equal(losses, [1.5, 2.5])

    def test_bad_timestamp(self, tmp_path):
        path = tmp_path / "losses.csv"
        path.write_text("time,loss\n2020-01-01,1\nyesterday,2\n", encoding="utf-8")
        with pytest.raises(MalformedInput) as ctx:
            read_timed_pairs(path)
        assert ctx.value.line == 3

    def test_non_positive_loss(self, tmp_path):
        path = tmp_path / "losses.csv"
        path.write_text("1,2\n2,0\n", encoding="utf-8")
        with pytest.raises(MalformedInput) as ctx:
            read_timed_pairs(path)
        assert ctx.value.line == 2
        ctx.match("not positive")

    def test_wrong_width(self, tmp_path):
        path = tmp_path / "losses.csv"
        path.write_text("1,2,3\n", encoding="utf-8")
        with pytest.raises(MalformedInput) as ctx:
            read_timed_pairs(path)
        ctx.match("two columns")
