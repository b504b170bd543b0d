"""
Reading observations from delimited text or JSON documents.

Delimited files may use a comma, semicolon or tab, with or without a header row; the delimiter
is sniffed from the first lines. In JSON documents the column is a JSONPath expression.
"""
import csv
import io
import json
import logging
from dataclasses import dataclass
from json import JSONDecodeError
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd
from jsonpath_ng.exceptions import JsonPathLexerError, JsonPathParserError
from jsonpath_ng.ext import parse

from tailcut.errors import MalformedInput

LOG = logging.getLogger(__name__)

DELIMITERS = ",;\t"
SNIFF_LINES = 20
DEFAULT_JSON_PATH = "$[*]"


@dataclass(frozen=True)
class Table:
    frame: pd.DataFrame
    line_numbers: list[int]
    header: bool


def sniff_delimiter(lines: list[str]) -> str:
    sample = "\n".join(lines[:SNIFF_LINES])
    if not any(d in sample for d in DELIMITERS):
        return ","
    try:
        return csv.Sniffer().sniff(sample, delimiters=DELIMITERS).delimiter
    except csv.Error:
        counts = {d: sample.count(d) for d in DELIMITERS}
        return max(counts, key=counts.get)


def _is_number(value: str) -> bool:
    try:
        float(value)
    except (TypeError, ValueError):
        return False
    return True


def read_table(text: str) -> Table:
    """Parse delimited text into string cells, keeping the source line of every row."""
    numbered = [(i, line) for i, line in enumerate(text.splitlines(), start=1) if line.strip()]
    if not numbered:
        raise MalformedInput("input is empty")
    line_numbers = [i for i, _ in numbered]
    lines = [line for _, line in numbered]
    delimiter = sniff_delimiter(lines)
    try:
        frame = pd.read_csv(
            io.StringIO("\n".join(lines)),
            sep=delimiter,
            header=None,
            dtype=str,
            keep_default_na=False,
            skipinitialspace=True,
        )
    except pd.errors.ParserError as e:
        raise MalformedInput(f"inconsistent number of fields: {e}")

    header = not _is_number(str(frame.iloc[0, -1]).strip())
    if header:
        frame.columns = [str(c).strip() for c in frame.iloc[0]]
        frame = frame.iloc[1:].reset_index(drop=True)
        line_numbers = line_numbers[1:]
    LOG.debug(f"read {len(frame)} rows with delimiter {delimiter!r} (header: {header})")
    return Table(frame=frame, line_numbers=line_numbers, header=header)


def _numeric_column(table: Table, column, what: str) -> np.ndarray:
    cells = table.frame[column].fillna("").astype(str).str.strip()
    values = pd.to_numeric(cells, errors="coerce").to_numpy(dtype=float)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        row = int(bad[0])
        raise MalformedInput(
            f"{what} {cells.iloc[row]!r} is not a finite number", table.line_numbers[row]
        )
    return values


def _select_column(table: Table, column: Optional[str]):
    columns = list(table.frame.columns)
    if column is None:
        return columns[-1]
    if column in columns:
        return column
    if column.isdigit() and int(column) < len(columns):
        return columns[int(column)]
    raise MalformedInput(f"no column {column!r} in input (columns: {columns})")


def read_json_values(document, path: str = DEFAULT_JSON_PATH) -> np.ndarray:
    try:
        expression = parse(path)
    except (JsonPathLexerError, JsonPathParserError) as e:
        raise MalformedInput(f"invalid JSONPath {path!r}: {e}")
    values = []
    for match in expression.find(document):
        value = match.value
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise MalformedInput(f"value {value!r} at {match.full_path} is not a number")
        values.append(float(value))
    if not values:
        raise MalformedInput(f"JSONPath {path!r} matched no values")
    return np.array(values)


def _is_json(path: Path, text: str) -> bool:
    return path.suffix.lower() == ".json" or text.lstrip()[:1] in ("{", "[")


def read_values(path: Union[str, Path], column: Optional[str] = None) -> np.ndarray:
    """
    Observations from a file.

    :param path: delimited text or JSON file
    :param column: header name or 0-based index for delimited text (last column by default);
        JSONPath expression for JSON (``$[*]`` by default)
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise MalformedInput(f"input is not UTF-8 text: {e}")
    if _is_json(path, text):
        try:
            document = json.loads(text)
        except JSONDecodeError as e:
            raise MalformedInput(e.msg, e.lineno)
        return read_json_values(document, column or DEFAULT_JSON_PATH)
    table = read_table(text)
    return _numeric_column(table, _select_column(table, column), "value")


def read_timed_pairs(path: Union[str, Path]) -> tuple[np.ndarray, np.ndarray]:
    """
    Two-column (time, loss) data. Times are numeric or ISO-8601 timestamps (converted to seconds
    since the epoch); losses must be positive.
    """
    table = read_table(Path(path).read_text(encoding="utf-8"))
    if table.frame.shape[1] != 2:
        raise MalformedInput(f"expected two columns (time, loss), got {table.frame.shape[1]}")
    time_cells = table.frame.iloc[:, 0].fillna("").astype(str).str.strip()
    numeric_times = pd.to_numeric(time_cells, errors="coerce")
    if numeric_times.notna().all():
        times = numeric_times.to_numpy(dtype=float)
    else:
        stamps = pd.to_datetime(time_cells, errors="coerce", format="ISO8601", utc=True)
        bad = np.flatnonzero(stamps.isna().to_numpy())
        if bad.size:
            row = int(bad[0])
            raise MalformedInput(
                f"time {time_cells.iloc[row]!r} is neither numeric nor ISO-8601",
                table.line_numbers[row],
            )
        times = (stamps - pd.Timestamp(0, tz="UTC")).dt.total_seconds().to_numpy(dtype=float)

    losses = _numeric_column(table, table.frame.columns[1], "loss")
    non_positive = np.flatnonzero(losses <= 0)
    if non_positive.size:
        row = int(non_positive[0])
        raise MalformedInput(f"loss {losses[row]!r} is not positive", table.line_numbers[row])
    return times, losses
