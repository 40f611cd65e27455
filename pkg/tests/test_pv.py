import numpy as np
import pytest

from irradsim.errors import InvalidInputError, StatisticsError
from irradsim.pv import (
    S60PC_250,
    PanelSpec,
    charge_statistics,
    daily_charge,
    iv_current,
    iv_residual,
    mpp,
    read_statistics,
    write_statistics,
)


def grid_mpp(g, diode, n=10_000):
    v = np.linspace(0, S60PC_250.v_oc_v * 1.05, n)
    p = v * iv_current(v, np.full(n, g), diode)
    k = np.argmax(p)
    return v[k], p[k], v, p


def test_anchors(diode):
    assert iv_current(0.0, 1000.0, diode) == pytest.approx(8.71, rel=1e-3)
    assert abs(iv_current(36.3, 1000.0, diode)) <= 1e-3 * 8.71
    v, i, p = mpp(1000.0, diode)
    assert p == pytest.approx(250.0, rel=0.02)
    assert v == pytest.approx(30.6, rel=0.01)
    assert i == pytest.approx(8.17, rel=0.01)


def test_parameters_positive(diode):
    for name in ("i_ph_ref", "i_0", "n", "r_s", "r_sh"):
        assert getattr(diode, name) > 0


def test_invalid_spec():
    with pytest.raises(InvalidInputError):
        PanelSpec(250, 226, 45, 150, 15, 60, i_mp_a=9.0, v_mp_v=30.6, i_sc_a=8.71, v_oc_v=36.3)
    with pytest.raises(InvalidInputError):
        PanelSpec(250, 226, 45, 150, 15, 60, i_mp_a=8.17, v_mp_v=37.0, i_sc_a=8.71, v_oc_v=36.3)


def test_spec_file_round_trip(tmp_path):
    S60PC_250.save(tmp_path / "p.json")
    assert PanelSpec.load(tmp_path / "p.json") == S60PC_250
    (tmp_path / "bad.json").write_text('{"stc_power_w": 1}')
    with pytest.raises(InvalidInputError):
        PanelSpec.load(tmp_path / "bad.json")


def test_dark_panel(diode):
    assert iv_current(0.0, 0.0, diode) == pytest.approx(0.0, abs=1e-12)
    v = np.linspace(0, 36, 50)
    assert np.all(iv_current(v, np.zeros(50), diode) <= 0)
    with pytest.raises(InvalidInputError):
        iv_current(0.0, -1.0, diode)


def test_implicit_equation_residual(diode):
    g = np.array([50.0, 200.0, 500.0, 800.0, 1000.0, 1200.0])
    for frac in (0.0, 0.5, 0.8, 0.95, 1.0):
        v = frac * 36.3 * np.ones_like(g)
        i = iv_current(v, g, diode)
        assert np.all(np.abs(iv_residual(v, i, g, diode)) <= 1e-9)


@pytest.mark.parametrize("g", [100.0, 500.0, 1000.0])
def test_mpp_against_fine_grid(diode, g):
    v_grid, p_grid, _, _ = grid_mpp(g, diode)
    v, _, p = mpp(g, diode)
    assert p >= p_grid - 1e-9
    assert p == pytest.approx(p_grid, rel=1e-6)
    assert v == pytest.approx(v_grid, abs=36.3 * 1.05 / 10_000 * 2)


def test_half_sun_power(diode):
    _, _, p = mpp(500.0, diode)
    assert 0.40 * 250 <= p <= 0.55 * 250


def test_power_monotone_in_irradiance(diode):
    g = np.linspace(50, 1000, 96)
    _, _, p = mpp(g, diode)
    assert np.all(np.diff(p) >= 0)


def test_power_curve_unimodal(diode):
    _, _, _, p = grid_mpp(1000.0, diode)
    p = p[: np.searchsorted(np.linspace(0, 36.3 * 1.05, 10_000), 36.3)]
    slope_sign = np.sign(np.diff(p))
    assert np.count_nonzero(np.diff(slope_sign[slope_sign != 0])) == 1


def test_low_light_linearity(diode):
    _, i1, _ = mpp(np.array([50.0, 100.0]), diode)
    _, i2, _ = mpp(np.array([100.0, 200.0]), diode)
    np.testing.assert_allclose(i2 / i1, 2.0, rtol=0.05)


def test_zero_irradiance_mpp(diode):
    assert mpp(0.0, diode) == (0.0, 0.0, 0.0)
    v, i, p = mpp(np.array([0.0, 1000.0]), diode)
    assert p[0] == 0 and p[1] > 0


def test_charge_cases(diode):
    m = np.arange(0.0, 1440.0, 10.0)
    assert daily_charge(m, np.zeros(m.size), diode) == 0.0
    hour = np.linspace(0.0, 60.0, 61)
    q = daily_charge(hour, np.full(61, 1000.0), diode)
    assert q == pytest.approx(8.17, rel=0.02)
    two_hours = np.linspace(0.0, 120.0, 121)
    assert daily_charge(two_hours, np.full(121, 1000.0), diode) == pytest.approx(2 * q, rel=1e-9)
    with pytest.raises(InvalidInputError):
        daily_charge(hour, np.full(61, 1000.0), diode, n_series=0)


def test_charge_rows(diode):
    m = np.arange(0.0, 1440.0, 10.0)
    E = np.vstack([np.clip(900 * np.sin(np.pi * (m - 360) / 720), 0, None) * s for s in (0.5, 1.0)])
    q = daily_charge(m, E, diode)
    assert q.shape == (2,)
    assert q[0] == pytest.approx(daily_charge(m, E[0], diode))


def test_statistics_quartiles():
    s = charge_statistics([1, 2, 3, 4, 5], day=3)
    assert (s.q1, s.median, s.q3) == (2.0, 3.0, 4.0)
    assert (s.whisker_low, s.whisker_high) == (1.0, 5.0)
    assert s.n_outliers == 0 and s.day == 3


def test_statistics_equal_and_outlier():
    s = charge_statistics([7.0] * 10)
    assert s.q1 == s.q3 == 7.0 and s.n_outliers == 0
    s = charge_statistics([1, 2, 3, 4, 5, 30])
    assert s.outliers == [30.0]
    assert s.whisker_high == 30.0
    assert s.q1 <= s.median <= s.q3
    with pytest.raises(StatisticsError):
        charge_statistics([1, 2, 3])


def test_statistics_csv(tmp_path):
    stats = [charge_statistics(np.arange(10.0) + d, d) for d in range(3)]
    write_statistics(stats, tmp_path / "s.csv")
    header = (tmp_path / "s.csv").read_text().splitlines()[0]
    assert header == "day,q1,median,q3,whisker_low,whisker_high,n_outliers"
    back = read_statistics(tmp_path / "s.csv")
    assert [b.median for b in back] == pytest.approx([s.median for s in stats])


from hypothesis import given  # noqa: E402
from hypothesis import strategies as st  # noqa: E402


@given(st.lists(st.floats(0, 100, allow_nan=False), min_size=4, max_size=60))
def test_statistics_order_invariants(xs):
    s = charge_statistics(xs)
    assert s.whisker_low <= s.q1 <= s.median <= s.q3 <= s.whisker_high
    assert all(o < s.q1 or o > s.q3 for o in s.outliers)
