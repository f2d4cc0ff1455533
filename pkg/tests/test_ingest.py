"""CSV ingestion: both schemas, both error channels."""

from __future__ import annotations

import io
from pathlib import Path

import pytest

from abstat.ingest import (
    COUNT_COLUMNS,
    RATE_COLUMNS,
    RowError,
    SchemaError,
    parse_experiments,
    parse_experiments_text,
)

DATA = Path(__file__).resolve().parent.parent / "data"

COUNTS_HEADER = ",".join(COUNT_COLUMNS)
RATES_HEADER = ",".join(RATE_COLUMNS)


def test_counts_file():
    rows = parse_experiments(DATA / "corners_counts.csv")
    assert [s.label for s in rows] == ["bac", "seaworld", "obsbygg", "obs"]
    bac = rows[0]
    assert (bac.control.n, bac.control.x) == (445, 32)
    assert (bac.treatment.n, bac.treatment.x) == (474, 53)
    assert not bac.reconstructed


def test_rates_file_reconstructs_counts():
    by_label = {s.label: s for s in parse_experiments(DATA / "corners_rates.csv")}
    counts = {s.label: s for s in parse_experiments(DATA / "corners_counts.csv")}
    for label, summary in by_label.items():
        assert summary.reconstructed
        assert summary.control == counts[label].control
        assert summary.treatment == counts[label].treatment


def test_rates_row_reconstruction_rule():
    rows = parse_experiments_text(
        f"{RATES_HEADER}\nseaworld,1448041,0.4713,1448066,0.4721\n"
    )
    assert rows[0].control.x == 682462
    assert rows[0].treatment.x == 683632


def test_accepts_open_stream():
    stream = io.StringIO(f"{COUNTS_HEADER}\na,10,1,12,2\n")
    rows = parse_experiments(stream)
    assert rows[0].label == "a"


def test_header_only_is_empty():
    assert parse_experiments_text(f"{COUNTS_HEADER}\n") == []


def test_missing_header():
    with pytest.raises(SchemaError, match="header"):
        parse_experiments_text("")


def test_unknown_column_named():
    with pytest.raises(SchemaError, match="bogus"):
        parse_experiments_text("label,n_control,bogus\n")


def test_mixed_schema_rejected():
    header = "label,n_control,x_control,n_treatment,rate_treatment"
    with pytest.raises(SchemaError):
        parse_experiments_text(f"{header}\na,10,1,12,0.5\n")


def test_duplicate_header_column():
    with pytest.raises(SchemaError, match="duplicate"):
        parse_experiments_text("label,n_control,n_control,n_treatment,x_treatment\n")


def test_conversions_above_arm_size():
    with pytest.raises(RowError, match="line 2"):
        parse_experiments_text(f"{COUNTS_HEADER}\na,100,200,100,5\n")


def test_row_errors_carry_line_numbers():
    text = f"{COUNTS_HEADER}\na,10,1,12,2\nb,10,1,12,badx\n"
    with pytest.raises(RowError, match="line 3"):
        parse_experiments_text(text)


def test_non_integer_counts():
    with pytest.raises(RowError, match="n_control"):
        parse_experiments_text(f"{COUNTS_HEADER}\na,10.5,1,12,2\n")


def test_rate_out_of_range():
    with pytest.raises(RowError, match="rate_control"):
        parse_experiments_text(f"{RATES_HEADER}\na,10,1.5,12,0.5\n")


def test_short_and_long_rows():
    with pytest.raises(RowError, match="fewer fields"):
        parse_experiments_text(f"{COUNTS_HEADER}\na,10,1,12\n")
    with pytest.raises(RowError, match="more fields"):
        parse_experiments_text(f"{COUNTS_HEADER}\na,10,1,12,2,9\n")


def test_duplicate_label():
    text = f"{COUNTS_HEADER}\nsame,10,1,12,2\nsame,20,2,21,3\n"
    with pytest.raises(RowError, match="duplicate label"):
        parse_experiments_text(text)


def test_empty_label():
    with pytest.raises(RowError, match="label"):
        parse_experiments_text(f"{COUNTS_HEADER}\n,10,1,12,2\n")


def test_whitespace_tolerated():
    rows = parse_experiments_text(f"{COUNTS_HEADER}\n a , 10 , 1 , 12 , 2 \n")
    assert rows[0].label == "a"
    assert rows[0].control.n == 10
