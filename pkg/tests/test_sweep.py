import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qmoment.errors import IncompleteSweepError, InvalidArgumentError, InvalidDataError
from qmoment.psf import TransferModel
from qmoment.sweep import (CoefficientRow, SweepConfig, compare_tables, default_grid, fit_rows,
                           format_table, loglog_fit, make_report, run_sweep, stability_check)

GAUSS = TransferModel("gaussian")
RECT = TransferModel("rect")


def test_exact_power_law():
    fit = loglog_fit((d, 3 * d ** 4) for d in (0.1, 0.2, 0.5, 1.0))
    assert fit.prefactor_log10 == pytest.approx(math.log10(3), abs=1e-12)
    assert fit.exponent == pytest.approx(4.0, abs=1e-12)
    assert fit.rms_residual == pytest.approx(0.0, abs=1e-12)


def test_two_points_interpolate():
    fit = loglog_fit([(0.1, 2.0), (0.4, 5.0)])
    assert fit.rms_residual == pytest.approx(0.0, abs=1e-14)
    assert fit.prefactor * 0.4 ** fit.exponent == pytest.approx(5.0)


@pytest.mark.parametrize("points", [[(0.1, 1.0)], [(0.1, 0.0), (0.2, 1.0)], [(0.1, -1), (0.2, 1)],
                                    [(0.1, 1.0), (0.1, 2.0)]])
def test_bad_fit_input(points):
    with pytest.raises(InvalidDataError):
        loglog_fit(points)


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(-8, 8),
       st.lists(st.floats(0.01, 2.0), min_size=3, max_size=12, unique=True))
def test_fit_recovers_any_power_law(log_c, k, deltas):
    if np.ptp(np.log10(deltas)) < 1e-3:
        return
    fit = loglog_fit((d, 10 ** log_c * d ** k) for d in deltas)
    assert fit.exponent == pytest.approx(k, abs=1e-8)
    assert fit.prefactor_log10 == pytest.approx(log_c, abs=1e-8)


def test_default_grid():
    g = default_grid()
    assert len(g) == 20
    assert g[0] == pytest.approx(0.1) and g[-1] == pytest.approx(0.8)
    assert np.allclose(np.diff(np.log(g)), np.log(8) / 19)


@pytest.mark.parametrize("kwargs", [dict(deltas=()), dict(deltas=(0.2, 0.1)), dict(deltas=(-1.0,)),
                                    dict(mus=(-1,)), dict(kind="bogus"), dict(p=1, fixed_total=True)])
def test_invalid_config(kwargs):
    with pytest.raises(InvalidArgumentError):
        SweepConfig(**kwargs)


def test_single_point_row():
    rows = run_sweep(SweepConfig(model=GAUSS, deltas=(0.1,), mus=(0,)))
    assert len(rows) == 1
    r = rows[0]
    assert r.helstrom == pytest.approx(0.999, abs=1e-3)
    assert r.spade_error == pytest.approx(0.999, abs=1e-3)
    assert r.ratio == pytest.approx(1.0, abs=0.01)


def test_rows_ordered_and_deterministic():
    cfg = SweepConfig(model=RECT, deltas=(0.1, 0.2, 0.4), mus=(3, 0, 5))
    rows = run_sweep(cfg)
    assert [(r.delta, r.mu) for r in rows] == [(d, m) for d in cfg.deltas for m in cfg.mus]
    assert rows == run_sweep(cfg)


def test_workers_do_not_change_rows():
    cfg = SweepConfig(model=GAUSS, deltas=default_grid(points=6), mus=(0, 4, 7))
    assert run_sweep(cfg, workers=3) == run_sweep(cfg, workers=1)


def test_ratio_at_least_one():
    rows = run_sweep(SweepConfig(model=RECT, deltas=default_grid(0.05, 1.0, 8)))
    assert all(r.ratio >= 1 - 1e-6 for r in rows)


def test_fourth_moment_gap_small_object():
    row = run_sweep(SweepConfig(model=GAUSS, deltas=(0.1,), mus=(4,)))[0]
    assert row.ratio == pytest.approx(2.1, rel=0.15)


def test_simple_kind_has_no_spade_column():
    rows = run_sweep(SweepConfig(model=GAUSS, deltas=(0.2,), mus=(2,), kind="simple"))
    assert math.isnan(rows[0].spade_error)
    assert rows[0].helstrom > 0


def test_second_moment_exponent():
    fits = fit_rows(run_sweep(SweepConfig(model=GAUSS, mus=(2,))))
    assert fits[2][0].exponent == pytest.approx(2.0, abs=0.1)


def test_report_layout():
    cfg = SweepConfig(model=GAUSS, deltas=default_grid(points=5), mus=(0, 1, 2))
    table = make_report(cfg, fit_rows(run_sweep(cfg)))
    assert [r.mu for r in table] == [0, 1, 2]
    assert table[2].ratio == pytest.approx(table[2].E0 / table[2].H0)
    text = format_table(table)
    lines = text.splitlines()
    assert [line.split("|")[0].strip() for line in lines] == ["mu", "H0", "E0", "E0/H0", "H1", "E1"]
    assert text.endswith("\n")


def test_report_missing_orders():
    cfg = SweepConfig(model=GAUSS, deltas=(0.1, 0.2), mus=(0, 1))
    fits = fit_rows(run_sweep(SweepConfig(model=GAUSS, deltas=(0.1, 0.2), mus=(0,))))
    with pytest.raises(IncompleteSweepError):
        make_report(cfg, fits)
    with pytest.raises(IncompleteSweepError):
        make_report(cfg, {})


@pytest.mark.parametrize("value,text", [(0.9578, "0.96"), (36.4, "36"), (204.6, "200"),
                                        (3420.7, "3400"), (1.0, "1.0"), (2.04, "2.0"), (5.96, "6.0")])
def test_two_significant_figures(value, text):
    row = CoefficientRow(mu=0, H0=value, E0=value, ratio=1.0, H1=0.0, E1=0.0)
    assert format_table([row]).splitlines()[1].split("|")[1].strip() == text


def test_exponents_one_decimal():
    row = CoefficientRow(mu=0, H0=1.0, E0=1.0, ratio=1.0, H1=-0.021, E1=5.96)
    lines = format_table([row]).splitlines()
    assert lines[4].split("|")[1].strip() == "0.0"
    assert lines[5].split("|")[1].strip() == "6.0"


def test_stability_noop():
    cfg = SweepConfig(model=RECT, deltas=default_grid(points=4), mus=(0, 3))
    assert stability_check(cfg, p=10, q=6).max_change == 0.0


def test_compare_tables_metric():
    a = [CoefficientRow(0, 1.0, 2.0, 2.0, 0.02, 4.0)]
    b = [CoefficientRow(0, 1.01, 2.0, 2.0, 0.03, 4.2)]
    ch = compare_tables(a, b).changes
    assert ch[(0, "H0")] == pytest.approx(0.01)
    assert ch[(0, "H1")] == pytest.approx(0.01)  # measured against max(|e|, 1)
    assert ch[(0, "E1")] == pytest.approx(0.05)
