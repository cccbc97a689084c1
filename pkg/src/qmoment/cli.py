"""Command-line front end.

Subcommands: bound, spade, sweep, mc, reproduce, stability. Settings come
from defaults, then an optional JSON config file (``--config``), then flags.

Exit status: 0 success, 2 usage error, 3 numerical error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from .errors import QMomentError
from .helstrom import DEFAULT_RANK_TOL, bound_from_pad
from .operators import MOMENT_KINDS, MomentSpec, ObjectModel, assemble, u_vector
from .psf import TransferModel
from .spade import mc_simulate, spade_error
from .sweep import (SweepConfig, default_grid, default_workers, fit_rows, format_table,
                    make_report, run_sweep, stability_check)

EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

SUBCOMMANDS = ("bound", "spade", "sweep", "mc", "reproduce", "stability")
SWEEP_COLUMNS = ("delta", "mu", "helstrom", "spade_error", "ratio")
COEFFICIENT_COLUMNS = ("mu", "H0", "E0", "ratio", "H1", "E1")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    model: str = "gaussian"
    delta: float | None = None
    mu: int | None = None
    mus: tuple[int, ...] = tuple(range(8))
    p: int = 10
    q: int = 6
    moment_kind: str = "generalized"
    total: float = 1.0
    fixed_total: bool = False
    count: int | None = None
    trials: int = 100_000
    seed: int = 0
    delta_min: float = 0.1
    delta_max: float = 0.8
    points: int = 20
    rank_tol: float = DEFAULT_RANK_TOL
    table: str | None = None
    output_format: str = "csv"
    output_path: str | None = None
    workers: int | None = None

    def validate(self) -> None:
        def bad(name, why):
            raise UsageError(f"invalid value for '{name.replace('_', '-')}': {why}")

        if self.subcommand not in SUBCOMMANDS:
            bad("subcommand", f"must be one of {', '.join(SUBCOMMANDS)}")
        if self.model not in ("gaussian", "rect"):
            bad("model", "must be 'gaussian' or 'rect'")
        if self.moment_kind not in MOMENT_KINDS:
            bad("moment_kind", f"must be one of {', '.join(MOMENT_KINDS)}")
        if self.output_format not in ("csv", "json"):
            bad("output_format", "must be 'csv' or 'json'")
        if not 1 <= self.p <= 16:
            bad("p", "must lie in [1, 16]")
        if not 1 <= self.q <= 32:
            bad("q", "must lie in [1, 32]")
        if not (math.isfinite(self.total) and self.total > 0):
            bad("total", "must be positive")
        if not (math.isfinite(self.rank_tol) and 0 < self.rank_tol < 1):
            bad("rank_tol", "must lie in (0, 1)")
        if self.subcommand in ("bound", "spade", "mc"):
            if self.delta is None:
                bad("delta", "is required")
            if self.mu is None:
                bad("mu", "is required")
        if self.delta is not None and not (math.isfinite(self.delta) and self.delta > 0):
            bad("delta", "must be positive")
        if self.mu is not None and self.mu < 0:
            bad("mu", "must be nonnegative")
        if any(m < 0 for m in self.mus) or not self.mus:
            bad("mus", "must be a nonempty list of nonnegative integers")
        if self.subcommand in ("spade", "mc") and not self.moment_kind.endswith("generalized"):
            bad("moment_kind", "SPADE estimators exist only for generalized moments")
        if self.trials < 1:
            bad("trials", "must be at least 1")
        if not 0 <= self.seed < 2 ** 64:
            bad("seed", "must be a 64-bit unsigned integer")
        if self.count is not None and self.count < 1:
            bad("count", "must be at least 1")
        if not (0 < self.delta_min < self.delta_max):
            bad("delta_min", "need 0 < delta-min < delta-max")
        if self.points < 2:
            bad("points", "need at least 2 grid points")
        if self.subcommand == "reproduce" and self.table not in ("gaussian", "rect"):
            bad("table", "must be 'gaussian' or 'rect'")
        if self.workers is not None and self.workers < 1:
            bad("workers", "must be at least 1")

    def sweep_config(self) -> SweepConfig:
        return SweepConfig(model=TransferModel(self.model),
                           deltas=default_grid(self.delta_min, self.delta_max, self.points),
                           mus=tuple(self.mus), p=self.p, q=self.q, kind=self.moment_kind,
                           total=self.total, fixed_total=self.fixed_total,
                           rank_tol=self.rank_tol)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _mu_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file of settings; flags take precedence")
    common.add_argument("--model", choices=("gaussian", "rect"), default=S)
    common.add_argument("--p", type=int, default=S, help="submodel dimension")
    common.add_argument("--q", type=int, default=S, help="PAD-basis truncation")
    common.add_argument("--moment-kind", dest="moment_kind", default=S)
    common.add_argument("--total", type=float, default=S, help="total object intensity N")
    common.add_argument("--fixed-total", dest="fixed_total", action="store_true", default=S)
    common.add_argument("--rank-tol", dest="rank_tol", type=float, default=S)
    common.add_argument("--format", dest="output_format", choices=("csv", "json"), default=S)
    common.add_argument("--output-path", dest="output_path", default=S)
    common.add_argument("--workers", type=int, default=S)

    point = _Parser(add_help=False)
    point.add_argument("--delta", type=float, default=S, help="object half-width")
    point.add_argument("--mu", type=int, default=S, help="moment order")

    grid = _Parser(add_help=False)
    grid.add_argument("--delta-min", dest="delta_min", type=float, default=S)
    grid.add_argument("--delta-max", dest="delta_max", type=float, default=S)
    grid.add_argument("--points", type=int, default=S)
    grid.add_argument("--mus", type=_mu_list, default=S, help="e.g. 0,1,2,3")

    parser = _Parser(prog="qmoment", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    sub.add_parser("bound", parents=[common, point], help="submodel Helstrom bound at one point")
    sp = sub.add_parser("spade", parents=[common, point], help="analytic SPADE error")
    sp.add_argument("--count", type=int, default=S, help="conditional photon count L")
    mc = sub.add_parser("mc", parents=[common, point], help="Monte Carlo SPADE check")
    mc.add_argument("--trials", type=int, default=S)
    mc.add_argument("--seed", type=int, default=S)
    mc.add_argument("--count", type=int, default=S)
    sub.add_parser("sweep", parents=[common, grid], help="bound and error over a delta grid")
    rp = sub.add_parser("reproduce", parents=[common, grid], help="coefficient tables")
    rp.add_argument("--table", choices=("gaussian", "rect"), default=S)
    sub.add_parser("stability", parents=[common, grid], help="truncation stability check")
    return parser


_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}


def parse_args(argv: Sequence[str] | None = None) -> RunConfig:
    ns = vars(_build_parser().parse_args(argv))
    settings: dict[str, Any] = {}
    config_path = ns.pop("config", None)
    if config_path:
        try:
            loaded = json.loads(Path(config_path).read_text())
        except OSError as exc:
            raise OSError(f"cannot read config file {config_path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {config_path} is not valid JSON: {exc}")
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        for key, value in loaded.items():
            name = key.replace("-", "_")
            if name not in _FIELDS or name == "subcommand":
                raise UsageError(f"unknown config key '{key}'")
            settings[name] = tuple(value) if name == "mus" else value
    settings.update(ns)
    if settings.get("subcommand") == "reproduce":
        settings.setdefault("model", settings.get("table"))
    cfg = RunConfig(**settings)
    cfg.validate()
    return cfg


def _fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _json_value(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.17g}" if math.isfinite(value) else "null"
    return json.dumps(value)


def _records(rows, columns):
    out = []
    for row in rows:
        data = dataclasses.asdict(row) if dataclasses.is_dataclass(row) else dict(row)
        out.append({c: data[c] for c in columns})
    return out


def render(rows, columns: Sequence[str], fmt: str = "csv") -> str:
    records = _records(rows, columns)
    if fmt == "csv":
        lines = [",".join(columns)] + [",".join(_fmt(r[c]) for c in columns) for r in records]
        return "\n".join(lines) + "\n"
    items = ["  {" + ", ".join(f"{json.dumps(c)}: {_json_value(r[c])}" for c in columns) + "}"
             for r in records]
    return "[\n" + ",\n".join(items) + "\n]\n"


def emit(rows, columns: Sequence[str], fmt: str = "csv", path: str | os.PathLike | None = None) -> None:
    """Write rows as CSV or JSON to ``path``, or to stdout when no path is given."""
    text = render(rows, columns, fmt)
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _run_bound(cfg: RunConfig) -> None:
    model = TransferModel(cfg.model)
    obj = ObjectModel(cfg.delta, cfg.total)
    pad, ortho = assemble(model, obj, cfg.p, cfg.q, cfg.fixed_total)
    u = u_vector(obj, ortho, MomentSpec(cfg.mu, cfg.moment_kind), model, cfg.fixed_total)
    res = bound_from_pad(pad, u, cfg.rank_tol)
    row = dict(delta=cfg.delta, mu=cfg.mu, helstrom=res.bound, k_condition=res.k_condition,
               dropped_directions=res.dropped_directions, lyapunov_residual=res.lyapunov_residual,
               leakage=pad.leakage)
    emit([row], list(row), cfg.output_format, cfg.output_path)


def _run_spade(cfg: RunConfig) -> None:
    model = TransferModel(cfg.model)
    obj = ObjectModel(cfg.delta, cfg.total)
    res = spade_error(model, obj, MomentSpec(cfg.mu, cfg.moment_kind), count=cfg.count)
    row = dict(delta=cfg.delta, mu=cfg.mu, beta=res.beta, spade_error=res.error,
               mode_means=";".join(f"{m:.17g}" for m in res.mode_means))
    emit([row], list(row), cfg.output_format, cfg.output_path)


def _run_mc(cfg: RunConfig) -> None:
    model = TransferModel(cfg.model)
    obj = ObjectModel(cfg.delta, cfg.total)
    rep = mc_simulate(model, obj, MomentSpec(cfg.mu, cfg.moment_kind), cfg.trials, cfg.seed,
                      count=cfg.count)
    row = dict(delta=cfg.delta, mu=cfg.mu, **dataclasses.asdict(rep))
    emit([row], list(row), cfg.output_format, cfg.output_path)


def _workers(cfg: RunConfig) -> int:
    return cfg.workers if cfg.workers is not None else default_workers()


def _run_sweep(cfg: RunConfig) -> None:
    rows = run_sweep(cfg.sweep_config(), _workers(cfg))
    emit(rows, SWEEP_COLUMNS, cfg.output_format, cfg.output_path)


def _run_reproduce(cfg: RunConfig) -> None:
    config = cfg.sweep_config()
    rows = run_sweep(config, _workers(cfg))
    table = make_report(config, fit_rows(rows))
    outdir = Path(cfg.output_path or "results")
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {outdir}: {exc.strerror or exc}") from exc
    ext = cfg.output_format
    emit(rows, SWEEP_COLUMNS, ext, outdir / f"sweep_{cfg.table}.{ext}")
    emit(table, COEFFICIENT_COLUMNS, ext, outdir / f"coefficients_{cfg.table}.{ext}")
    text = format_table(table)
    try:
        (outdir / f"table_{cfg.table}.txt").write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {outdir}: {exc.strerror or exc}") from exc
    sys.stdout.write(text)


def _run_stability(cfg: RunConfig) -> None:
    report = stability_check(cfg.sweep_config(), workers=_workers(cfg))
    rows = [dict(mu=mu, coefficient=name, relative_change=change)
            for (mu, name), change in sorted(report.changes.items())]
    rows.append(dict(mu=-1, coefficient="max", relative_change=report.max_change))
    emit(rows, ("mu", "coefficient", "relative_change"), cfg.output_format, cfg.output_path)


_DISPATCH = {"bound": _run_bound, "spade": _run_spade, "mc": _run_mc, "sweep": _run_sweep,
             "reproduce": _run_reproduce, "stability": _run_stability}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        print(f"qmoment: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"qmoment: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        _DISPATCH[cfg.subcommand](cfg)
    except QMomentError as exc:
        print(f"qmoment: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"qmoment: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
