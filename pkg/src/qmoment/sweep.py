"""Object-size sweeps, log-log power-law fits and coefficient tables."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import IncompleteSweepError, InvalidArgumentError, InvalidDataError, QMomentError
from .helstrom import DEFAULT_RANK_TOL, helstrom_bound, information_matrix, solve_scores
from .operators import MOMENT_KINDS, MomentSpec, ObjectModel, assemble, u_vector
from .psf import TransferModel
from .quadrature import DEFAULT_ORDER
from .spade import spade_error


def default_grid(lo: float = 0.1, hi: float = 0.8, points: int = 20) -> tuple[float, ...]:
    return tuple(float(d) for d in np.logspace(math.log10(lo), math.log10(hi), points))


@dataclass(frozen=True)
class SweepConfig:
    model: TransferModel = TransferModel("gaussian")
    deltas: tuple[float, ...] = field(default_factory=default_grid)
    mus: tuple[int, ...] = tuple(range(8))
    p: int = 10
    q: int = 6
    kind: str = "generalized"
    total: float = 1.0
    fixed_total: bool = False
    rank_tol: float = DEFAULT_RANK_TOL
    order: int = DEFAULT_ORDER

    def __post_init__(self):
        d = np.asarray(self.deltas, dtype=float)
        if d.size == 0 or np.any(~np.isfinite(d)) or np.any(d <= 0) or np.any(np.diff(d) <= 0):
            raise InvalidArgumentError("delta grid must be nonempty, positive and strictly increasing")
        if not self.mus or any(int(m) != m or m < 0 for m in self.mus):
            raise InvalidArgumentError("moment orders must be nonnegative integers")
        if self.kind not in MOMENT_KINDS:
            raise InvalidArgumentError(f"unknown moment kind {self.kind!r}")
        if self.p < 1 + int(self.fixed_total):
            raise InvalidArgumentError("p is too small for the submodel")


@dataclass(frozen=True)
class SweepRow:
    delta: float
    mu: int
    helstrom: float
    spade_error: float
    ratio: float
    lyapunov_residual: float = 0.0
    dropped_directions: int = 0
    k_condition: float = 1.0
    leakage: float = 0.0


@dataclass(frozen=True)
class FitResult:
    prefactor_log10: float
    exponent: float
    rms_residual: float

    @property
    def prefactor(self) -> float:
        return 10.0 ** self.prefactor_log10


@dataclass(frozen=True)
class CoefficientRow:
    mu: int
    H0: float
    E0: float
    ratio: float
    H1: float
    E1: float


def _sweep_point(config: SweepConfig, delta: float) -> list[SweepRow]:
    obj = ObjectModel(delta, config.total)
    pad, ortho = assemble(config.model, obj, config.p, config.q, config.fixed_total, config.order)
    sol = solve_scores(pad.gamma0, pad.dgamma, config.rank_tol)
    K = information_matrix(sol)
    rows = []
    for mu in config.mus:
        spec = MomentSpec(int(mu), config.kind)
        try:
            u = u_vector(obj, ortho, spec, config.model, config.fixed_total, config.order)
            res = helstrom_bound(u, K, config.rank_tol, sol.residual)
            err = spade_error(config.model, obj, spec, order=config.order).error \
                if spec.generalized else math.nan
        except QMomentError as exc:
            raise type(exc)(f"{exc} (delta={delta}, mu={mu})") from exc
        ratio = err / res.bound if res.bound > 0 else math.inf
        rows.append(SweepRow(delta=float(delta), mu=int(mu), helstrom=res.bound, spade_error=err,
                             ratio=ratio, lyapunov_residual=sol.residual,
                             dropped_directions=res.dropped_directions,
                             k_condition=res.k_condition, leakage=pad.leakage))
    return rows


def _star_point(args):
    return _sweep_point(*args)


def default_workers() -> int:
    env = os.environ.get("QMOMENT_WORKERS")
    if env:
        return max(1, int(env))
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def run_sweep(config: SweepConfig, workers: int = 1) -> list[SweepRow]:
    """One row per (delta, mu), ordered by delta then by the configured mus."""
    jobs = [(config, d) for d in config.deltas]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            chunks = list(pool.map(_star_point, jobs))
    else:
        chunks = [_sweep_point(*job) for job in jobs]
    return [row for chunk in chunks for row in chunk]


def loglog_fit(points: Iterable[tuple[float, float]]) -> FitResult:
    """Least-squares line through (log10 delta, log10 value)."""
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise InvalidDataError("need at least two points for a fit")
    if np.any(~np.isfinite(pts)) or np.any(pts <= 0):
        raise InvalidDataError("fit points must be finite and positive")
    lx, ly = np.log10(pts[:, 0]), np.log10(pts[:, 1])
    if np.ptp(lx) == 0:
        raise InvalidDataError("fit abscissae must not all coincide")
    A = np.column_stack([np.ones_like(lx), lx])
    (intercept, slope), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (intercept + slope * lx)
    return FitResult(float(intercept), float(slope), float(np.sqrt(np.mean(resid ** 2))))


def fit_rows(rows: Sequence[SweepRow]) -> dict[int, tuple[FitResult, FitResult]]:
    """Per-mu fits of the bound and of the SPADE error."""
    fits = {}
    for mu in sorted({r.mu for r in rows}):
        sel = [r for r in rows if r.mu == mu]
        fits[mu] = (loglog_fit((r.delta, r.helstrom) for r in sel),
                    loglog_fit((r.delta, r.spade_error) for r in sel))
    return fits


def make_report(config: SweepConfig, fits: dict[int, tuple[FitResult, FitResult]]
                ) -> list[CoefficientRow]:
    if not fits:
        raise IncompleteSweepError("no fits to report")
    missing = [mu for mu in config.mus if mu not in fits]
    if missing:
        raise IncompleteSweepError(f"missing fits for moment orders {missing}")
    table = []
    for mu in config.mus:
        h, e = fits[mu]
        table.append(CoefficientRow(mu=int(mu), H0=h.prefactor, E0=e.prefactor,
                                    ratio=e.prefactor / h.prefactor, H1=h.exponent, E1=e.exponent))
    return table


def _sig(value: float, digits: int = 2) -> str:
    if value == 0 or not math.isfinite(value):
        return str(value)
    text = f"{value:.{digits}g}"
    if "e" in text:
        text = f"{float(text):.0f}"
    elif "." not in text and len(text.lstrip("-")) < digits:
        text += "." + "0" * (digits - len(text.lstrip("-")))
    elif "." in text and len(text.replace("-", "").replace(".", "").lstrip("0")) < digits:
        text += "0"
    return text


def format_table(table: Sequence[CoefficientRow]) -> str:
    """Coefficient table in the transposed layout, columns per mu.

    Prefactors and their ratio carry 2 significant figures, exponents one
    decimal place.
    """
    header = ["mu"] + [str(r.mu) for r in table]
    lines = [
        header,
        ["H0"] + [_sig(r.H0) for r in table],
        ["E0"] + [_sig(r.E0) for r in table],
        ["E0/H0"] + [_sig(r.ratio) for r in table],
        ["H1"] + [f"{r.H1 + 0.0:.1f}".replace("-0.0", "0.0") for r in table],
        ["E1"] + [f"{r.E1 + 0.0:.1f}".replace("-0.0", "0.0") for r in table],
    ]
    width = max(len(c) for line in lines for c in line)
    return "\n".join(" | ".join(c.rjust(width) for c in line) for line in lines) + "\n"


@dataclass(frozen=True)
class StabilityReport:
    changes: dict[tuple[int, str], float]

    @property
    def max_change(self) -> float:
        return max(self.changes.values()) if self.changes else 0.0


def compare_tables(base: Sequence[CoefficientRow], other: Sequence[CoefficientRow]) -> StabilityReport:
    """Relative change of each fitted coefficient.

    Prefactors compare as ratios. Exponents near zero (mu = 0, 1) make a
    plain ratio meaningless, so their change is measured against
    max(|exponent|, 1).
    """
    changes = {}
    for a, b in zip(base, other):
        changes[(a.mu, "H0")] = abs(b.H0 / a.H0 - 1.0)
        changes[(a.mu, "E0")] = abs(b.E0 / a.E0 - 1.0)
        changes[(a.mu, "H1")] = abs(b.H1 - a.H1) / max(abs(a.H1), 1.0)
        changes[(a.mu, "E1")] = abs(b.E1 - a.E1) / max(abs(a.E1), 1.0)
    return StabilityReport(changes)


def coefficients(config: SweepConfig, workers: int = 1) -> list[CoefficientRow]:
    return make_report(config, fit_rows(run_sweep(config, workers)))


def stability_check(config: SweepConfig, p: int = 16, q: int = 12,
                    workers: int = 1) -> StabilityReport:
    """Coefficient changes between the configured truncation and (p, q)."""
    base = coefficients(config, workers)
    if (p, q) == (config.p, config.q):
        return compare_tables(base, base)
    return compare_tables(base, coefficients(replace(config, p=p, q=q), workers))
