"""Orthonormal polynomials with respect to a nonnegative weight.

Polynomials are built from power moments by a Cholesky factorization of the
Hankel moment matrix, in a variable rescaled by a reference length so the
matrix stays well conditioned for small objects.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateWeightError, InvalidArgumentError, InvalidWeightError
from .quadrature import DEFAULT_ORDER, mapped_rule

MAX_P = 16


@dataclass(frozen=True)
class OrthoPolySet:
    """a_j(x) = sum_{k<=j} A[j, k] x**k, orthonormal under some weight.

    ``A_scaled`` holds the same polynomials in the variable ``t = x/scale``;
    evaluation goes through it to avoid huge coefficients for small scales.
    """

    A_scaled: np.ndarray
    scale: float

    @property
    def p(self) -> int:
        return self.A_scaled.shape[0]

    @property
    def A(self) -> np.ndarray:
        powers = self.scale ** -np.arange(self.p, dtype=float)
        return self.A_scaled * powers[None, :]

    def evaluate(self, j: int, x) -> np.ndarray:
        t = np.asarray(x, dtype=float) / self.scale
        return np.polynomial.polynomial.polyval(t, self.A_scaled[j, : j + 1])

    def evaluate_all(self, x) -> np.ndarray:
        """Array of shape (p, len(x)) with a_j evaluated at each point."""
        t = np.asarray(x, dtype=float) / self.scale
        return np.polynomial.polynomial.polyval(t, self.A_scaled.T)

    def truncated(self, p: int) -> "OrthoPolySet":
        if not 1 <= p <= self.p:
            raise InvalidArgumentError(f"cannot truncate {self.p} polynomials to {p}")
        return OrthoPolySet(self.A_scaled[:p, :p].copy(), self.scale)


def weight_moments(weight: Callable[[np.ndarray], np.ndarray], support: tuple[float, float],
                   maxdeg: int, order: int = DEFAULT_ORDER) -> np.ndarray:
    """Power moments m_d = int weight(x) x**d dx for d = 0..maxdeg."""
    if maxdeg < 0:
        raise InvalidArgumentError("maxdeg must be nonnegative")
    x, w = mapped_rule(support[0], support[1], order)
    values = np.asarray(weight(x), dtype=float)
    if np.any(values < 0):
        raise InvalidWeightError("weight is negative at a quadrature node")
    return (w * values) @ np.vander(x, maxdeg + 1, increasing=True)


def _cholesky(M: np.ndarray) -> np.ndarray:
    n = M.shape[0]
    L = np.zeros_like(M)
    for j in range(n):
        pivot = M[j, j] - L[j, :j] @ L[j, :j]
        if not pivot > 0:
            raise DegenerateWeightError(j)
        L[j, j] = np.sqrt(pivot)
        L[j + 1:, j] = (M[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
    return L


def _lower_inverse(L: np.ndarray) -> np.ndarray:
    # inverse of a lower-triangular factor, itself lower triangular
    from scipy.linalg import solve_triangular
    return solve_triangular(L, np.eye(L.shape[0]), lower=True)


def build_orthonormal(moments: Sequence[float], p: int, scale: float = 1.0) -> OrthoPolySet:
    """Orthonormal polynomials from the power moments of a weight.

    With ``M[j, k] = m_{j+k} / scale**(j+k)`` factored as ``L L^T``, the
    rows of ``L^{-1}`` are the coefficients in ``t = x/scale``.
    """
    if not 1 <= p <= MAX_P:
        raise InvalidArgumentError(f"p must lie in [1, {MAX_P}], got {p}")
    if not scale > 0:
        raise InvalidArgumentError("scale must be positive")
    m = np.asarray(moments, dtype=float)
    if m.size < 2 * p - 1:
        raise InvalidArgumentError(f"need {2 * p - 1} moments for p={p}, got {m.size}")
    m = m[: 2 * p - 1] * scale ** -np.arange(2 * p - 1, dtype=float)
    idx = np.add.outer(np.arange(p), np.arange(p))
    L = _cholesky(m[idx])
    return OrthoPolySet(_lower_inverse(L), float(scale))


def refine(ortho: OrthoPolySet, x: np.ndarray, w: np.ndarray) -> OrthoPolySet:
    """One re-orthonormalization pass against a discrete inner product.

    Cholesky of a Hankel matrix loses roughly cond(M) * eps in
    orthonormality; a second factorization of the computed Gram matrix
    recovers it (the CholeskyQR2 idea).
    """
    V = ortho.evaluate_all(x)
    gram = (V * w) @ V.T
    L = _cholesky(0.5 * (gram + gram.T))
    return OrthoPolySet(_lower_inverse(L) @ ortho.A_scaled, ortho.scale)


def orthonormal_for_weight(weight: Callable[[np.ndarray], np.ndarray],
                           support: tuple[float, float], p: int, scale: float = 1.0,
                           order: int = DEFAULT_ORDER) -> OrthoPolySet:
    """Moments, Hankel-Cholesky construction and one refinement pass."""
    moments = weight_moments(weight, support, 2 * p - 2, order)
    ortho = build_orthonormal(moments, p, scale)
    x, w = mapped_rule(support[0], support[1], order)
    return refine(ortho, x, w * np.asarray(weight(x), dtype=float))


def orthonormality_residual(ortho: OrthoPolySet, x: np.ndarray, w: np.ndarray) -> float:
    """max |<a_j, a_k> - delta_jk| under the discrete weight (x, w)."""
    V = ortho.evaluate_all(x)
    gram = (V * w) @ V.T
    return float(np.max(np.abs(gram - np.eye(ortho.p))))
