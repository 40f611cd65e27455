import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from irradsim.errors import InvalidInputError, ParseError
from irradsim.ingest import (
    DEFAULT_SEASONS,
    DailySeries,
    IrradianceSample,
    SchemaConfig,
    Season,
    check_seasons,
    decompose_time,
    find_gaps,
    parse_dataset,
    season_of,
    write_series,
)


@pytest.mark.parametrize("t, expected", [(0, (0, 0)), (1440, (1, 0)), (1440 * 90 + 700, (90, 700))])
def test_decompose_time(t, expected):
    assert decompose_time(t) == expected


def test_decompose_time_negative():
    with pytest.raises(InvalidInputError):
        decompose_time(-1)


@given(st.integers(0, 400), st.integers(0, 1439))
def test_decompose_round_trip(d, m):
    assert decompose_time(1440 * d + m) == (d, m)


@pytest.mark.parametrize("d, sid", [(35, 1), (124, 1), (125, 2), (219, 3), (309, 3), (310, 4), (34, 4), (0, 4)])
def test_season_of_table_boundaries(d, sid):
    assert season_of(d) == sid


def test_default_seasons_partition_year():
    check_seasons(DEFAULT_SEASONS)
    for s in DEFAULT_SEASONS:
        days = range(s.from_day, s.to_day + 1) if s.from_day <= s.to_day else \
            list(range(s.from_day, 365)) + list(range(0, s.to_day + 1))
        assert {season_of(d) for d in days} == {s.id}


def test_overlapping_seasons_rejected():
    with pytest.raises(InvalidInputError):
        check_seasons([Season(1, 0, 200), Season(2, 150, 364)])


def test_day_366_wraps():
    assert season_of(365 + 40) == season_of(40)


def test_sample_invariants():
    with pytest.raises(InvalidInputError):
        IrradianceSample(100, 0, 99, 1.0)
    with pytest.raises(InvalidInputError):
        IrradianceSample(10, 0, 10, -1.0)


def test_three_row_file():
    src = io.StringIO("t_min,irradiance_wm2\n600,100\n610,120\n620,130\n")
    ds = parse_dataset(src)
    assert len(ds.days) == 1
    assert len(ds.days[0]) == 3
    assert ds.rejected == []
    assert len(ds.sha256) == 64


def test_negative_row_rejected_and_parse_continues():
    src = io.StringIO("t_min,irradiance_wm2\n600,100\n610,-5\n620,130\n")
    ds = parse_dataset(src)
    assert len(ds.days[0]) == 2
    assert len(ds.rejected) == 1
    assert ds.rejected[0].line == 3


def test_malformed_and_duplicate_rows():
    src = io.StringIO("day,minute,irradiance_wm2\n0,600,1\n0,600,2\n0,abc,3\n0,610\n0,620,4\n")
    ds = parse_dataset(src)
    assert [r.line for r in ds.rejected] == [3, 4, 5]
    np.testing.assert_array_equal(ds.days[0].irradiance, [1.0, 4.0])


def test_midnight_split():
    src = io.StringIO("t_min,irradiance_wm2\n1430,0\n1440,0\n1450,0\n")
    ds = parse_dataset(src)
    assert [s.d for s in ds.days] == [0, 1]
    np.testing.assert_array_equal(ds.days[1].minutes, [0, 10])


def test_empty_and_header_errors():
    with pytest.raises(ParseError):
        parse_dataset(io.StringIO(""))
    with pytest.raises(ParseError):
        parse_dataset(io.StringIO("t_min,irradiance_wm2\n"))
    with pytest.raises(ParseError):
        parse_dataset(io.StringIO("time,ghi\n1,2\n"))


def test_unreadable_path(tmp_path):
    with pytest.raises(ParseError):
        parse_dataset(tmp_path / "missing.csv")


def test_day_offset():
    ds = parse_dataset(io.StringIO("day,minute,irradiance_wm2\n3,0,1\n"), SchemaConfig(day_offset=10))
    assert ds.days[0].d == 13


def test_gap_detection():
    m = np.array([0, 10, 20, 60, 70], dtype=float)
    gaps = find_gaps([DailySeries(5, m, np.ones(5))], 10.0)
    assert len(gaps) == 1
    g = gaps[0]
    assert (g.day, g.first_missing_minute, g.last_missing_minute) == (5, 30, 50)


def test_series_round_trip(tmp_path):
    days = [DailySeries(d, np.arange(0, 1440, 10.0), np.linspace(0, 5, 144) * (d + 1)) for d in range(3)]
    path = tmp_path / "s.csv"
    write_series(days, path)
    back = parse_dataset(path)
    for a, b in zip(days, back.days):
        assert a.d == b.d
        np.testing.assert_allclose(a.irradiance, b.irradiance, atol=1e-6)


@given(st.lists(st.tuples(st.integers(0, 3 * 1440), st.floats(-50, 1500, allow_nan=False)), max_size=40))
def test_parsed_samples_respect_invariants(rows):
    text = "t_min,irradiance_wm2\n" + "".join(f"{t},{e}\n" for t, e in rows)
    try:
        ds = parse_dataset(io.StringIO(text))
    except ParseError:
        assert all(e < 0 for _, e in rows) or not rows
        return
    for s in ds.days:
        assert np.all(s.irradiance >= 0)
        assert np.all((s.minutes >= 0) & (s.minutes < 1440))
        assert np.all(np.diff(s.minutes) > 0)
