import csv
import io
import json

import pytest

from qmoment.cli import (COEFFICIENT_COLUMNS, EXIT_IO, EXIT_NUMERICAL, EXIT_USAGE, SWEEP_COLUMNS,
                         UsageError, main, parse_args, render)
from qmoment.sweep import SweepRow


def test_bound_defaults():
    cfg = parse_args(["bound", "--model", "gaussian", "--delta", "0.1", "--mu", "2"])
    assert (cfg.subcommand, cfg.model, cfg.delta, cfg.mu) == ("bound", "gaussian", 0.1, 2)
    assert (cfg.p, cfg.q, cfg.moment_kind, cfg.total, cfg.seed, cfg.output_format) == \
        (10, 6, "generalized", 1.0, 0, "csv")


def test_reproduce_picks_model_from_table():
    cfg = parse_args(["reproduce", "--table", "rect"])
    assert cfg.model == "rect"
    sc = cfg.sweep_config()
    assert (sc.p, sc.q, sc.mus, len(sc.deltas)) == (10, 6, tuple(range(8)), 20)


@pytest.mark.parametrize("argv,field", [
    (["bound", "--delta", "-1", "--mu", "2"], "delta"),
    (["bound", "--mu", "2"], "delta"),
    (["bound", "--delta", "0.1"], "mu"),
    (["bound", "--delta", "0.1", "--mu", "2", "--p", "40"], "p"),
    (["mc", "--delta", "0.1", "--mu", "2", "--trials", "0"], "trials"),
    (["sweep", "--delta-min", "0.5", "--delta-max", "0.2"], "delta-min"),
    (["spade", "--delta", "0.1", "--mu", "2", "--moment-kind", "simple"], "moment-kind"),
])
def test_usage_errors_name_field(argv, field):
    with pytest.raises(UsageError, match=field):
        parse_args(argv)


def test_unknown_flag():
    with pytest.raises(UsageError):
        parse_args(["bound", "--delta", "0.1", "--mu", "1", "--colour", "red"])


def test_config_file_overridden_by_flags(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"delta": 0.3, "mu": 4, "p": 8, "model": "rect"}))
    cfg = parse_args(["bound", "--config", str(path), "--p", "12"])
    assert (cfg.delta, cfg.mu, cfg.p, cfg.model) == (0.3, 4, 12, "rect")


def test_config_file_unknown_key(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"detla": 0.3}))
    with pytest.raises(UsageError, match="detla"):
        parse_args(["bound", "--config", str(path)])


def _row(**kw):
    base = dict(delta=0.1, mu=2, helstrom=0.013291206516843751, spade_error=0.013313351178908034,
                ratio=1.0016661437)
    base.update(kw)
    return SweepRow(**base)


def test_csv_single_row():
    text = render([_row()], SWEEP_COLUMNS)
    lines = text.split("\n")
    assert lines[0] == "delta,mu,helstrom,spade_error,ratio"
    assert len(lines) == 3 and lines[2] == ""
    assert "\r" not in text
    back = next(csv.DictReader(io.StringIO(text)))
    assert float(back["helstrom"]) == _row().helstrom


def test_json_round_trip():
    rows = [_row(), _row(mu=3, spade_error=float("nan"))]
    data = json.loads(render(rows, SWEEP_COLUMNS, "json"))
    assert data[0]["helstrom"] == rows[0].helstrom
    assert data[0]["ratio"] == rows[0].ratio
    assert data[1]["spade_error"] is None
    assert list(data[0]) == list(SWEEP_COLUMNS)


def test_bound_command_output(capsys):
    assert main(["bound", "--delta", "0.1", "--mu", "2"]) == 0
    out = capsys.readouterr().out
    row = next(csv.DictReader(io.StringIO(out)))
    assert float(row["helstrom"]) == pytest.approx(1.329e-2, rel=1e-3)


def test_exit_codes(tmp_path, capsys):
    assert main(["bound", "--delta", "-1", "--mu", "2"]) == EXIT_USAGE
    assert main(["mc", "--delta", "0.1", "--mu", "0", "--total", "1e13", "--trials", "5"]) == \
        EXIT_NUMERICAL
    blocked = tmp_path / "file"
    blocked.write_text("")
    assert main(["spade", "--delta", "0.1", "--mu", "0",
                 "--output-path", str(blocked / "out.csv")]) == EXIT_IO
    err = capsys.readouterr().err
    assert str(blocked / "out.csv") in err


def test_reproduce_outputs(tmp_path, capsys):
    out = tmp_path / "a"
    assert main(["reproduce", "--table", "gaussian", "--output-path", str(out), "--workers", "1"]) == 0
    table = capsys.readouterr().out
    coeff = list(csv.DictReader(io.StringIO((out / "coefficients_gaussian.csv").read_text())))
    assert [int(r["mu"]) for r in coeff] == list(range(8))
    assert list(coeff[0]) == list(COEFFICIENT_COLUMNS)
    sweep = list(csv.DictReader(io.StringIO((out / "sweep_gaussian.csv").read_text())))
    assert len(sweep) == 20 * 8
    assert (out / "table_gaussian.txt").read_text() == table


def test_reproduce_byte_identical(tmp_path, capsys):
    for name in ("a", "b"):
        assert main(["reproduce", "--table", "rect", "--output-path", str(tmp_path / name),
                     "--format", "json", "--workers", "2"]) == 0
    capsys.readouterr()
    for fname in ("sweep_rect.json", "coefficients_rect.json", "table_rect.txt"):
        assert (tmp_path / "a" / fname).read_bytes() == (tmp_path / "b" / fname).read_bytes()


def test_mc_command_deterministic(capsys):
    argv = ["mc", "--model", "rect", "--delta", "0.2", "--mu", "3", "--trials", "3000",
            "--seed", "9", "--total", "20"]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first


def test_workers_env(monkeypatch):
    from qmoment.sweep import default_workers
    monkeypatch.setenv("QMOMENT_WORKERS", "3")
    assert default_workers() == 3
