"""Intensity-operator matrices in the PAD basis and the sensitivity vector.

For a one-dimensional incoherent object G the intensity operator has PAD
matrix elements ``gamma[m, n] = int G(x) C_m(x) C_n(x) dx``. A submodel
whose j-th score direction is ``G_0 a_j`` has derivative matrices of the
same form with ``G_0`` replaced by ``G_0 a_j``.

Integrals of ``a_j`` against smooth functions are taken from Taylor
coefficients when the object is small enough. Since ``a_j`` annihilates
every power below ``j``, ``int G_0 a_j f`` can be many orders of magnitude
below ``max |f|``. Direct quadrature would then return roundoff, while the
series route sums only terms that are themselves of the size of the result.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .errors import InconsistentSubmodelError, InvalidArgumentError
from .orthopoly import OrthoPolySet, orthonormal_for_weight, orthonormality_residual
from .psf import MAX_MODE, TransferModel, overlap_C, overlap_C_series, overlap_norm_D
from .quadrature import DEFAULT_ORDER, mapped_rule

log = logging.getLogger(__name__)

MomentKind = Literal["simple", "generalized", "normalized-simple", "normalized-generalized"]
MOMENT_KINDS = ("simple", "generalized", "normalized-simple", "normalized-generalized")

SERIES_DEGREE = 120
SERIES_MAX_DELTA = 2.0


@dataclass(frozen=True)
class ObjectModel:
    """Uniform (rectangle) object of half-width ``delta`` and total intensity ``total``."""

    delta: float
    total: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise InvalidArgumentError(f"delta must be positive, got {self.delta}")
        if not (math.isfinite(self.total) and self.total > 0):
            raise InvalidArgumentError(f"total must be positive, got {self.total}")

    def density(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) <= self.delta, self.total / (2.0 * self.delta), 0.0)

    @property
    def support(self) -> tuple[float, float]:
        return (-self.delta, self.delta)

    def nodes(self, order: int = DEFAULT_ORDER) -> tuple[np.ndarray, np.ndarray]:
        """Quadrature nodes on the support and weights already multiplied by G_0."""
        x, w = mapped_rule(-self.delta, self.delta, order)
        return x, w * (self.total / (2.0 * self.delta))

    def orthopoly(self, p: int, order: int = DEFAULT_ORDER) -> OrthoPolySet:
        return orthonormal_for_weight(self.density, self.support, p, scale=self.delta, order=order)


@dataclass(frozen=True)
class MomentSpec:
    mu: int
    kind: MomentKind = "generalized"

    def __post_init__(self):
        if isinstance(self.mu, bool) or not isinstance(self.mu, (int, np.integer)) or self.mu < 0:
            raise InvalidArgumentError(f"moment order must be a nonnegative integer, got {self.mu!r}")
        if self.kind not in MOMENT_KINDS:
            raise InvalidArgumentError(f"unknown moment kind {self.kind!r}")

    @property
    def normalized(self) -> bool:
        return self.kind.startswith("normalized")

    @property
    def generalized(self) -> bool:
        return self.kind.endswith("generalized")

    @property
    def mode(self) -> int:
        """PAD mode index n of the matching SPADE measurement."""
        return self.mu // 2

    def b(self, model: TransferModel) -> Callable[[np.ndarray], np.ndarray]:
        """The function whose G-weighted integral defines the moment."""
        mu = self.mu
        if not self.generalized:
            return lambda x: np.asarray(x, dtype=float) ** mu
        n = self.mode
        if n + (mu % 2) > MAX_MODE:
            raise InvalidArgumentError(f"moment order {mu} exceeds the supported mode range")
        if mu % 2 == 0:
            d2 = overlap_norm_D(model, n) ** 2
            return lambda x: overlap_C(model, n, x) ** 2 / d2
        dd = overlap_norm_D(model, n) * overlap_norm_D(model, n + 1)
        return lambda x: overlap_C(model, n, x) * overlap_C(model, n + 1, x) / dd

    def b_series(self, model: TransferModel, degree: int = SERIES_DEGREE) -> np.ndarray:
        """Taylor coefficients of ``b`` up to ``degree``."""
        out = np.zeros(degree + 1)
        if not self.generalized:
            if self.mu <= degree:
                out[self.mu] = 1.0
            return out
        self.b(model)  # range check
        n = self.mode
        m = n + (self.mu % 2)
        d = overlap_norm_D(model, n) * overlap_norm_D(model, m)
        return _product(overlap_C_series(model, n, degree), overlap_C_series(model, m, degree)) / d


@dataclass(frozen=True)
class PadMatrices:
    gamma0: np.ndarray
    dgamma: np.ndarray = field(repr=False)  # shape (p, q, q)
    total: float = 1.0

    @property
    def q(self) -> int:
        return self.gamma0.shape[0]

    @property
    def p(self) -> int:
        return self.dgamma.shape[0]

    @property
    def captured_trace(self) -> float:
        return float(np.trace(self.gamma0))

    @property
    def leakage(self) -> float:
        return self.total - self.captured_trace


def _check_q(q: int) -> None:
    if not 1 <= q <= MAX_MODE:
        raise InvalidArgumentError(f"q must lie in [1, {MAX_MODE}], got {q}")


def mode_overlaps(model: TransferModel, q: int, x: np.ndarray) -> np.ndarray:
    """Array (q, len(x)) of C_n at the given points."""
    return np.array([overlap_C(model, n, x) for n in range(q)]).reshape(q, -1)


def _product(c1: np.ndarray, c2: np.ndarray) -> np.ndarray:
    return np.convolve(c1, c2)[: c1.size]


def _uses_series(obj: ObjectModel) -> bool:
    return obj.delta <= SERIES_MAX_DELTA


def projection_moments(obj: ObjectModel, ortho: OrthoPolySet, degree: int = SERIES_DEGREE,
                       order: int = DEFAULT_ORDER) -> np.ndarray:
    """P[j, l] = int G_0 a_j x**l, shape (p, degree + 1).

    Entries with ``l < j`` vanish by orthogonality and those with ``j + l``
    odd by the symmetry of the object; both are set to exactly zero.
    """
    rule = max(order, (degree + ortho.p) // 2 + 1)
    x, wg = obj.nodes(rule)
    t = x / obj.delta
    a = ortho.evaluate_all(x)
    P = (a * wg) @ np.vander(t, degree + 1, increasing=True)
    j, l = np.indices(P.shape)
    P[(l < j) | ((j + l) % 2 == 1)] = 0.0
    return P * obj.delta ** np.arange(degree + 1, dtype=float)


def _series_dgamma(model: TransferModel, P: np.ndarray, q: int) -> np.ndarray:
    degree = P.shape[1] - 1
    c = [overlap_C_series(model, n, degree) for n in range(q)]
    out = np.zeros((P.shape[0], q, q))
    for m in range(q):
        for n in range(m, q):
            out[:, m, n] = out[:, n, m] = P @ _product(c[m], c[n])
    return out


def _sandwich(C: np.ndarray, weights: np.ndarray) -> np.ndarray:
    # sum_i weights[i] C[m, i] C[n, i], upper triangle computed, mirrored
    M = (C * weights) @ C.T
    upper = np.triu(M)
    return upper + np.triu(M, 1).T


def gamma0_matrix(model: TransferModel, obj: ObjectModel, q: int,
                  order: int = DEFAULT_ORDER) -> np.ndarray:
    _check_q(q)
    x, wg = obj.nodes(order)
    return _sandwich(mode_overlaps(model, q, x), wg)


def _check_ortho(obj: ObjectModel, ortho: OrthoPolySet, order: int) -> None:
    x, wg = obj.nodes(order)
    residual = orthonormality_residual(ortho, x, wg)
    if residual > 1e-8:
        raise InconsistentSubmodelError(
            f"polynomials are not orthonormal under this object (residual {residual:.2e})")


def dgamma_matrices(model: TransferModel, obj: ObjectModel, ortho: OrthoPolySet, q: int,
                    fixed_total: bool = False, order: int = DEFAULT_ORDER) -> np.ndarray:
    """Derivative matrices for score directions G_0 a_j, shape (p, q, q).

    With ``fixed_total`` the total-intensity direction a_0 is dropped and
    the result has p - 1 entries.
    """
    _check_q(q)
    _check_ortho(obj, ortho, order)
    first = 1 if fixed_total else 0
    if _uses_series(obj):
        return _series_dgamma(model, projection_moments(obj, ortho, order=order), q)[first:]
    x, wg = obj.nodes(order)
    C = mode_overlaps(model, q, x)
    a = ortho.evaluate_all(x)
    return np.array([_sandwich(C, wg * a[j]) for j in range(first, ortho.p)]).reshape(-1, q, q)


def u_vector(obj: ObjectModel, ortho: OrthoPolySet, spec: MomentSpec, model: TransferModel,
             fixed_total: bool = False, order: int = DEFAULT_ORDER) -> np.ndarray:
    """Sensitivity of the moment to each score direction."""
    if _uses_series(obj):
        P = projection_moments(obj, ortho, order=order)
        e = spec.b_series(model, P.shape[1] - 1)
        u = P @ e
        if spec.normalized:
            x, wg = obj.nodes(order)
            mean_b = float(wg @ spec.b(model)(x)) / obj.total
            u = u / obj.total - P[:, 0] / obj.total * mean_b
        return u[1:] if fixed_total else u
    x, wg = obj.nodes(order)
    a = ortho.evaluate_all(x)
    b = np.broadcast_to(np.asarray(spec.b(model)(x), dtype=float), x.shape)
    if spec.normalized:
        wf = wg / obj.total
        u = a @ (wf * b) - (a @ wf) * float(wf @ b)
    else:
        u = a @ (wg * b)
    return u[1:] if fixed_total else u


def assemble(model: TransferModel, obj: ObjectModel, p: int = 10, q: int = 6,
             fixed_total: bool = False, order: int = DEFAULT_ORDER
             ) -> tuple[PadMatrices, OrthoPolySet]:
    """Build gamma_0, the derivative matrices and the polynomials for one object."""
    _check_q(q)
    ortho = obj.orthopoly(p, order)
    gamma0 = gamma0_matrix(model, obj, q, order)
    dgamma = dgamma_matrices(model, obj, ortho, q, fixed_total, order)
    pad = PadMatrices(gamma0, dgamma, obj.total)
    if pad.leakage > 1e-8 * obj.total:
        log.debug("truncation q=%d leaves %.3e of the intensity outside the PAD span "
                  "(delta=%g)", q, pad.leakage, obj.delta)
    return pad, ortho
