r"""SPADE estimators of generalized moments: analytic errors and Monte Carlo.

Even order mu = 2n
    Count photons in PAD mode n. In the Poisson limit ``m_n`` has mean
    ``D_n**2 beta``; ``m_n / D_n**2`` is unbiased with error ``beta / D_n**2``.

Odd order mu = 2n + 1
    Count photons in the interferometric modes (psi_n +/- psi_{n+1})/sqrt(2)
    with means ``mbar_+`` and ``mbar_-``. ``(m_+ - m_-) / (2 D_n D_{n+1})``
    is unbiased with error ``(mbar_+ + mbar_-) / (4 D_n**2 D_{n+1}**2)``.

Normalized moments with unknown total
    Conditioned on the total detected count L the mode counts are
    multinomial with cell probabilities ``pi = mbar / N``. Dividing the
    estimators above by L keeps them unbiased.

    Even: Var(m_n | L) = L pi (1 - pi) with pi = D_n**2 beta', so the error is
    ``beta' (1 - D_n**2 beta') / (D_n**2 L)``.

    Odd: with cells pi_+ and pi_-, the multinomial covariance
    Cov(m_+, m_-) = -L pi_+ pi_- gives
    ``Var(m_+ - m_-) = L [pi_+ (1 - pi_+) + pi_- (1 - pi_-) + 2 pi_+ pi_-]
    = L [(pi_+ + pi_-) - (pi_+ - pi_-)**2]``, and since
    ``pi_+ - pi_- = 2 D_n D_{n+1} beta'`` the error is
    ``[(pi_+ + pi_-) - (2 D_n D_{n+1} beta')**2] / (4 D_n**2 D_{n+1}**2 L)``.

Here beta' is the moment of the normalized density F = G / N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import ConfigurationError, InvalidArgumentError
from .operators import MomentSpec, ObjectModel
from .psf import TransferModel, overlap_C, overlap_norm_D
from .quadrature import DEFAULT_ORDER

MAX_MEAN = 1e12
BLOCK = 8192


@dataclass(frozen=True)
class SpadeResult:
    beta: float
    error: float
    mode_means: tuple[float, ...]


@dataclass(frozen=True)
class McReport:
    trials: int
    empirical_mean: float
    empirical_mse: float
    mean_stderr: float
    mse_stderr: float
    seed: int
    beta: float
    analytic_error: float


def _check_n(n: int, limit: int) -> None:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or not 0 <= n <= limit:
        raise InvalidArgumentError(f"mode index must be an integer in [0, {limit}], got {n!r}")


def spade_error_even(model: TransferModel, obj: ObjectModel, n: int,
                     order: int = DEFAULT_ORDER) -> SpadeResult:
    _check_n(n, 15)
    x, wg = obj.nodes(order)
    d2 = overlap_norm_D(model, n) ** 2
    mean = float(wg @ overlap_C(model, n, x) ** 2)
    beta = mean / d2
    return SpadeResult(beta=beta, error=beta / d2, mode_means=(mean,))


def spade_error_odd(model: TransferModel, obj: ObjectModel, n: int,
                    order: int = DEFAULT_ORDER) -> SpadeResult:
    _check_n(n, 14)
    x, wg = obj.nodes(order)
    cn = overlap_C(model, n, x)
    cn1 = overlap_C(model, n + 1, x)
    dd = overlap_norm_D(model, n) * overlap_norm_D(model, n + 1)
    plus = 0.5 * float(wg @ (cn + cn1) ** 2)
    minus = 0.5 * float(wg @ (cn - cn1) ** 2)
    beta = float(wg @ (cn * cn1)) / dd
    return SpadeResult(beta=beta, error=(plus + minus) / (4.0 * dd * dd), mode_means=(plus, minus))


def spade_error_normalized(model: TransferModel, obj: ObjectModel, n: int,
                           parity: Literal["even", "odd"], count: float,
                           order: int = DEFAULT_ORDER) -> SpadeResult:
    """Error conditioned on ``count`` photons detected in total."""
    if not count > 0:
        raise InvalidArgumentError("total count L must be positive")
    if parity == "even":
        raw = spade_error_even(model, obj, n, order)
        d2 = overlap_norm_D(model, n) ** 2
        beta = raw.beta / obj.total
        error = beta * (1.0 - d2 * beta) / (d2 * count)
    elif parity == "odd":
        raw = spade_error_odd(model, obj, n, order)
        dd = overlap_norm_D(model, n) * overlap_norm_D(model, n + 1)
        beta = raw.beta / obj.total
        pi_sum = sum(raw.mode_means) / obj.total
        error = (pi_sum - (2.0 * dd * beta) ** 2) / (4.0 * dd * dd * count)
    else:
        raise InvalidArgumentError(f"parity must be 'even' or 'odd', got {parity!r}")
    return SpadeResult(beta=beta, error=max(error, 0.0), mode_means=raw.mode_means)


def spade_error(model: TransferModel, obj: ObjectModel, spec: MomentSpec,
                count: float | None = None, order: int = DEFAULT_ORDER) -> SpadeResult:
    """Dispatch on the moment spec; simple moments have no SPADE estimator."""
    if not spec.generalized:
        raise InvalidArgumentError(f"no SPADE estimator for {spec.kind} moments")
    n = spec.mode
    parity = "even" if spec.mu % 2 == 0 else "odd"
    if spec.normalized:
        return spade_error_normalized(model, obj, n, parity,
                                      obj.total if count is None else count, order)
    if parity == "even":
        return spade_error_even(model, obj, n, order)
    return spade_error_odd(model, obj, n, order)


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.array([seed, block], dtype=np.uint64)))


def mc_simulate(model: TransferModel, obj: ObjectModel, spec: MomentSpec, trials: int,
                seed: int = 0, count: int | None = None,
                order: int = DEFAULT_ORDER) -> McReport:
    """Photon-counting simulation of the SPADE estimator for ``spec``.

    Generalized moments use independent Poisson counts per measured mode.
    Normalized moments condition on ``count`` detected photons (default:
    the rounded total) and draw multinomial counts.

    Trials are grouped in fixed blocks; block b draws from a Philox stream
    keyed by (seed, b), so the report does not depend on evaluation order.
    """
    if isinstance(trials, bool) or not isinstance(trials, (int, np.integer)) or trials < 1:
        raise InvalidArgumentError(f"trials must be a positive integer, got {trials!r}")
    if not 0 <= seed < 2 ** 64:
        raise InvalidArgumentError("seed must be a 64-bit unsigned integer")
    if spec.normalized:
        count = int(round(obj.total)) if count is None else int(count)
        if count < 1:
            raise InvalidArgumentError("conditional count L must be at least 1")
    analytic = spade_error(model, obj, spec, count=count, order=order)
    means = np.array(analytic.mode_means)
    if np.any(means > MAX_MEAN):
        raise ConfigurationError(f"mode mean {means.max():.3e} exceeds {MAX_MEAN:.0e}")
    n = spec.mode
    odd = spec.mu % 2 == 1
    dnorm = (2.0 * overlap_norm_D(model, n) * overlap_norm_D(model, n + 1) if odd
             else overlap_norm_D(model, n) ** 2)
    beta = analytic.beta

    sums = [[], [], []]
    for b, start in enumerate(range(0, trials, BLOCK)):
        size = min(BLOCK, trials - start)
        rng = _block_rng(seed, b)
        if spec.normalized:
            probs = means / obj.total
            if odd:
                cells = np.append(probs, max(0.0, 1.0 - probs.sum()))
                counts = rng.multinomial(count, cells / cells.sum(), size=size)
                est = (counts[:, 0] - counts[:, 1]) / (dnorm * count)
            else:
                est = rng.binomial(count, min(1.0, probs[0]), size=size) / (dnorm * count)
        else:
            counts = rng.poisson(means, size=(size, means.size))
            est = ((counts[:, 0] - counts[:, 1]) if odd else counts[:, 0]) / dnorm
        dev = est - beta
        sq = dev * dev
        sums[0].append(math.fsum(dev))
        sums[1].append(math.fsum(sq))
        sums[2].append(math.fsum(sq * sq))
    s1, s2, s4 = (math.fsum(s) for s in sums)
    mean_dev = s1 / trials
    mse = s2 / trials
    if trials > 1:
        var_est = max(0.0, (s2 - s1 * s1 / trials) / (trials - 1))
        var_sq = max(0.0, (s4 - s2 * s2 / trials) / (trials - 1))
        se_mean, se_mse = math.sqrt(var_est / trials), math.sqrt(var_sq / trials)
    else:
        se_mean = se_mse = math.nan
    return McReport(trials=int(trials), empirical_mean=beta + mean_dev, empirical_mse=mse,
                    mean_stderr=se_mean, mse_stderr=se_mse, seed=int(seed), beta=beta,
                    analytic_error=analytic.error)
