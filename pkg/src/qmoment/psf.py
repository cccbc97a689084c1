"""Transfer functions, PAD-mode overlaps and their leading coefficients.

Both built-in models have unit width. ``C_n(x)`` is the overlap between the
displaced point-spread function and the n-th PSF-adapted (PAD) mode; it
behaves like ``D_n x**n`` for small ``x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .errors import InvalidArgumentError, UnsupportedModelError
from .quadrature import DEFAULT_ORDER, mapped_rule

MAX_MODE = 32
MAX_BESSEL_ORDER = 34

Kind = Literal["gaussian", "rect"]


@dataclass(frozen=True)
class TransferModel:
    kind: Kind = "gaussian"

    def __post_init__(self):
        if self.kind not in ("gaussian", "rect"):
            raise InvalidArgumentError(f"unknown transfer model {self.kind!r}")

    def density(self, k):
        """|<k|psi>|^2, normalized to unit integral."""
        k = np.asarray(k, dtype=float)
        if self.kind == "gaussian":
            return math.sqrt(2.0 / math.pi) * np.exp(-2.0 * k * k)
        return np.where(np.abs(k) <= 1.0, 0.5, 0.0)

    @property
    def support(self) -> tuple[float, float]:
        # gaussian tail beyond |k| = 8 is below exp(-128)
        return (-8.0, 8.0) if self.kind == "gaussian" else (-1.0, 1.0)


GAUSSIAN = TransferModel("gaussian")
RECT = TransferModel("rect")


def _check_mode(n: int, limit: int = MAX_MODE) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or not 0 <= n <= limit:
        raise InvalidArgumentError(f"mode index must be an integer in [0, {limit}], got {n!r}")
    return int(n)


def overlap_norm_D(model: TransferModel, n: int) -> float:
    """Leading Taylor coefficient D_n of C_n(x); always positive."""
    n = _check_mode(n)
    if model.kind == "gaussian":
        return math.exp(-n * math.log(2.0) - 0.5 * math.lgamma(n + 1))
    # 2^n n! sqrt(2n+1) / (2n+1)!
    return math.exp(n * math.log(2.0) + math.lgamma(n + 1) + 0.5 * math.log(2 * n + 1)
                    - math.lgamma(2 * n + 2))


def _bessel_series(n: int, x: np.ndarray) -> np.ndarray:
    # x^n/(2n+1)!! * sum_k (-x^2/2)^k / (k! (2n+3)(2n+5)...(2n+2k+1))
    lead = np.exp(-math.lgamma(2 * n + 2) + n * math.log(2.0) + math.lgamma(n + 1))
    term = np.ones_like(x)
    total = np.ones_like(x)
    half_sq = -0.5 * x * x
    for k in range(1, 60):
        term = term * half_sq / (k * (2 * n + 2 * k + 1))
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return lead * x ** n * total


def _bessel_downward(n: int, x: np.ndarray) -> np.ndarray:
    # Miller recurrence from well above max(n, |x|), normalized by j_0 or j_1
    start = int(max(n, np.max(np.abs(x)))) + 40
    upper = np.zeros_like(x)
    cur = np.full_like(x, 1e-300)
    keep = np.zeros_like(x)
    j1_raw = np.zeros_like(x)
    for ell in range(start, 0, -1):
        lower = (2 * ell + 1) / x * cur - upper
        upper, cur = cur, lower
        scale = np.abs(cur) > 1e250
        if np.any(scale):
            cur = np.where(scale, cur * 1e-250, cur)
            upper = np.where(scale, upper * 1e-250, upper)
            keep = np.where(scale, keep * 1e-250, keep)
            j1_raw = np.where(scale, j1_raw * 1e-250, j1_raw)
        if ell - 1 == n:
            keep = cur.copy()
        if ell - 1 == 1:
            j1_raw = cur.copy()
    if n == 0:
        keep = cur.copy()
    j0_raw = cur
    j0 = np.sin(x) / x
    j1 = np.sin(x) / (x * x) - np.cos(x) / x
    use_j0 = np.abs(j0) >= np.abs(j1)
    factor = np.where(use_j0, j0 / np.where(use_j0, j0_raw, 1.0),
                      j1 / np.where(use_j0, 1.0, j1_raw))
    return keep * factor


def spherical_bessel(n: int, x):
    """Spherical Bessel function of the first kind, j_n(x).

    Power series for ``|x| < n/2 + 1``, normalized downward recurrence
    elsewhere. Accepts scalars or arrays.
    """
    n = _check_mode(n, MAX_BESSEL_ORDER)
    arr = np.asarray(x, dtype=float)
    flat = np.atleast_1d(arr).ravel()
    ax = np.abs(flat)
    out = np.empty_like(flat)
    small = ax < 0.5 * n + 1.0
    if np.any(small):
        out[small] = _bessel_series(n, ax[small])
    if np.any(~small):
        out[~small] = _bessel_downward(n, ax[~small])
    out = np.where(flat < 0, (-1) ** n * out, out)
    out = out.reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def overlap_C(model: TransferModel, n: int, x):
    """Closed-form C_n(x) for the built-in transfer models."""
    n = _check_mode(n)
    x = np.asarray(x, dtype=float)
    if model.kind == "gaussian":
        out = overlap_norm_D(model, n) * x ** n * np.exp(-x * x / 8.0)
    else:
        out = math.sqrt(2 * n + 1) * spherical_bessel(n, x)
    return float(out) if np.ndim(out) == 0 else out


def overlap_C_series(model: TransferModel, n: int, degree: int) -> np.ndarray:
    """Taylor coefficients c[l] of C_n(x) = sum_l c[l] x**l for l = 0..degree."""
    n = _check_mode(n)
    out = np.zeros(degree + 1)
    for k in range((degree - n) // 2 + 1 if degree >= n else 0):
        if model.kind == "gaussian":
            # D_n (-1/8)^k / k!
            mag = math.log(overlap_norm_D(model, n)) - 3 * k * math.log(2.0) - math.lgamma(k + 1)
        else:
            # sqrt(2n+1) (-1/2)^k / (k! (2n+2k+1)!!), with (2m+1)!! = (2m+1)! / (2^m m!)
            m = n + k
            mag = (0.5 * math.log(2 * n + 1) - k * math.log(2.0) - math.lgamma(k + 1)
                   - math.lgamma(2 * m + 2) + m * math.log(2.0) + math.lgamma(m + 1))
        out[n + 2 * k] = (-1) ** k * math.exp(mag)
    return out


def overlap_C_numeric(density: Callable[[np.ndarray], np.ndarray], tilde_a, n: int, x,
                      support: tuple[float, float] = (-8.0, 8.0),
                      order: int = DEFAULT_ORDER) -> np.ndarray | float:
    """C_n(x) by quadrature over a symmetric transfer density.

    ``tilde_a`` holds the polynomials orthonormal under ``density``. For a
    symmetric density the overlap is a cosine (n even) or sine (n odd)
    transform of ``tilde_a[n](k) * density(k)``, carrying the sign
    ``(-1)**(n // 2)`` from the ``(-i)**n`` mode phase.
    """
    n = _check_mode(n)
    if n >= tilde_a.p:
        raise InvalidArgumentError(f"need at least {n + 1} PAD polynomials, got {tilde_a.p}")
    lo, hi = support
    if not math.isclose(lo, -hi):
        raise UnsupportedModelError("support must be symmetric about k = 0")
    k, w = mapped_rule(lo, hi, order)
    rho = np.asarray(density(k), dtype=float)
    if np.max(np.abs(rho - rho[::-1])) > 1e-12 * max(np.max(np.abs(rho)), 1e-300):
        raise UnsupportedModelError("transfer density is not symmetric about k = 0")
    weighted = w * rho * tilde_a.evaluate(n, k)
    xs = np.asarray(x, dtype=float)
    phase = np.multiply.outer(xs, k)
    trig = np.cos(phase) if n % 2 == 0 else np.sin(phase)
    out = (-1) ** (n // 2) * (trig @ weighted)
    return float(out) if out.ndim == 0 else out
