"""Score operators, Helstrom information matrix and the submodel bound.

Scores solve the Jordan-product Lyapunov equation
``dgamma_j = (gamma0 S_j + S_j gamma0) / 2``. In the eigenbasis of gamma0
(eigenvalues lam) the solution is ``S_ab = 2 dgamma_ab / (lam_a + lam_b)``,
restricted to pairs with ``lam_a + lam_b`` above ``rank_tol * lam_max``.

PAD-basis matrices of small objects are strongly graded (entries scale like
delta**(m+n)), and a symmetric eigensolver resolves their small eigenvalues
well below the usual eps * lam_max noise floor; the default tolerance is
set accordingly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateInformationError, InconsistentSupportError,
                     InvalidArgumentError, InvalidDirectionError)

DEFAULT_RANK_TOL = 1e-20
SUPPORT_LEAK_TOL = 1e-8


@dataclass(frozen=True)
class ScoreSolution:
    """Scores expressed in the eigenframe of gamma0.

    ``scores_eig[j]`` is V^T S_j V. ``residual`` is the largest relative
    Lyapunov residual over j, measured in that frame on the retained pairs;
    in the PAD basis the same residual is swamped by rounding of scores whose
    entries reach 1 / lam_min.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    kept: np.ndarray
    scores_eig: np.ndarray  # (p, q, q)
    residual: float

    @property
    def scores(self) -> np.ndarray:
        V = self.eigenvectors
        return _symmetric(np.einsum("ia,jab,kb->jik", V, self.scores_eig, V))


@dataclass(frozen=True)
class BoundResult:
    u: np.ndarray
    K: np.ndarray
    bound: float
    k_condition: float
    dropped_directions: int
    lyapunov_residual: float = 0.0


def _symmetric(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + np.swapaxes(M, -1, -2))


def solve_scores(gamma0: np.ndarray, dgammas: np.ndarray,
                 rank_tol: float = DEFAULT_RANK_TOL) -> ScoreSolution:
    """Solve the Lyapunov equation for a stack of derivative matrices."""
    gamma0 = np.asarray(gamma0, dtype=float)
    dgammas = np.asarray(dgammas, dtype=float)
    if dgammas.ndim == 2:
        dgammas = dgammas[None]
    lam, V = np.linalg.eigh(_symmetric(gamma0))
    lam_max = lam[-1]
    if not lam_max > 0:
        raise InvalidArgumentError("gamma0 has no positive eigenvalue")
    pair = lam[:, None] + lam[None, :]
    kept = pair > rank_tol * lam_max
    dt = _symmetric(np.einsum("ai,jab,bk->jik", V, dgammas, V))
    norms = np.linalg.norm(dgammas, axis=(1, 2))
    leak = np.max(np.abs(np.where(kept, 0.0, dt)), axis=(1, 2))
    # leakage is judged against the whole derivative family: high-order
    # directions legitimately live almost entirely in weakly populated modes
    bad = leak > SUPPORT_LEAK_TOL * norms.max(initial=0.0)
    if np.any(bad):
        j = int(np.argmax(bad))
        raise InconsistentSupportError(
            f"derivative {j} has weight {leak[j]:.3e} outside the support of gamma0")
    st = np.where(kept, 2.0 * dt / np.where(kept, pair, 1.0), 0.0)
    jordan = 0.5 * (lam[:, None] * st + st * lam[None, :])
    res = np.linalg.norm(np.where(kept, jordan - dt, 0.0), axis=(1, 2))
    rel = np.where(norms > 0, res / np.where(norms > 0, norms, 1.0), res)
    return ScoreSolution(lam, V, kept, st, float(np.max(rel)) if rel.size else 0.0)


def information_matrix(sol: ScoreSolution) -> np.ndarray:
    """K from a score solution, evaluated in the eigenframe of gamma0.

    trace((S_j S_k + S_k S_j)/2 gamma0) = sum_ab S_j,ab S_k,ab (lam_a + lam_b)/2
    for symmetric scores, which avoids forming products with the huge
    entries that small eigenvalues put into S.
    """
    lam = sol.eigenvalues
    half_pair = 0.5 * (lam[:, None] + lam[None, :])
    K = np.einsum("jab,kab->jk", sol.scores_eig * half_pair, sol.scores_eig)
    return _symmetric(K)


def solve_score(gamma0: np.ndarray, dgamma: np.ndarray,
                rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Score operator S with dgamma = gamma0 o S on the support of gamma0."""
    return solve_scores(gamma0, np.asarray(dgamma)[None], rank_tol).scores[0]


def helstrom_matrix(gamma0: np.ndarray, scores: np.ndarray) -> np.ndarray:
    """K[j, k] = trace((S_j S_k + S_k S_j)/2 gamma0)."""
    scores = np.asarray(scores, dtype=float)
    # trace(S_j S_k gamma0) = sum_ab (S_j)_ab (S_k gamma0)_ba
    sg = scores @ gamma0
    K = np.einsum("jab,kba->jk", scores, sg)
    return _symmetric(K)


def helstrom_bound(u: np.ndarray, K: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL,
                   lyapunov_residual: float = 0.0) -> BoundResult:
    """u^T K^+ u with the pseudo-inverse restricted to well-resolved directions.

    Dropping an eigendirection of K amounts to a smaller submodel, so the
    result can only move down and stays a valid lower bound.
    """
    u = np.asarray(u, dtype=float)
    K = _symmetric(np.asarray(K, dtype=float))
    ev, U = np.linalg.eigh(K)
    ev_max = ev[-1] if ev.size else 0.0
    keep = ev > rank_tol * ev_max if ev_max > 0 else np.zeros_like(ev, dtype=bool)
    if not np.any(keep):
        raise DegenerateInformationError("Helstrom information matrix has no usable direction")
    proj = U[:, keep].T @ u
    bound = float(np.sum(proj * proj / ev[keep]))
    return BoundResult(u=u, K=K, bound=bound, k_condition=float(ev_max / ev[keep][0]),
                       dropped_directions=int(np.sum(~keep)), lyapunov_residual=lyapunov_residual)


def pseudo_inverse(K: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    ev, U = np.linalg.eigh(_symmetric(np.asarray(K, dtype=float)))
    keep = ev > rank_tol * ev[-1]
    return (U[:, keep] / ev[keep]) @ U[:, keep].T


def rayleigh_quotient(u: np.ndarray, K: np.ndarray, v: np.ndarray) -> float | np.ndarray:
    """(v.u)^2 / (v^T K v). ``v`` may hold one direction or a stack of rows."""
    v = np.asarray(v, dtype=float)
    num = (v @ u) ** 2
    den = np.einsum("...i,ij,...j->...", v, K, v)
    if np.any(den <= 0):
        raise InvalidDirectionError("direction has non-positive information v^T K v")
    out = num / den
    return float(out) if np.ndim(out) == 0 else out


def bound_from_pad(pad, u: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> BoundResult:
    """Full chain: scores, K and the bound for one set of PAD matrices."""
    sol = solve_scores(pad.gamma0, pad.dgamma, rank_tol)
    K = information_matrix(sol)
    return helstrom_bound(u, K, rank_tol, sol.residual)
