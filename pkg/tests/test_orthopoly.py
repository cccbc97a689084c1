import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import eval_legendre

from qmoment.errors import DegenerateWeightError, InvalidArgumentError, InvalidWeightError
from qmoment.operators import ObjectModel
from qmoment.orthopoly import (build_orthonormal, orthonormal_for_weight,
                               orthonormality_residual, weight_moments)
from qmoment.psf import TransferModel
from qmoment.quadrature import mapped_rule

from oracles import gram_schmidt_uniform, normalized_uniform, uniform_moment


def rect_weight(delta):
    return ObjectModel(delta).density


def test_uniform_moments():
    m = weight_moments(rect_weight(1.0), (-1.0, 1.0), 4)
    assert m == pytest.approx([1.0, 0.0, 1 / 3, 0.0, 1 / 5], abs=1e-14)
    assert m[2] == pytest.approx(float(uniform_moment(2)))


def test_moments_scale_with_width():
    m = weight_moments(rect_weight(0.1), (-0.1, 0.1), 2)
    assert m[2] == pytest.approx(0.01 / 3, rel=1e-13)


def test_gaussian_transfer_moments():
    g = TransferModel("gaussian")
    m = weight_moments(g.density, g.support, 2, order=200)
    assert m[0] == pytest.approx(1.0, abs=1e-12)
    assert m[2] == pytest.approx(0.25, abs=1e-12)


def test_negative_weight_rejected():
    with pytest.raises(InvalidWeightError):
        weight_moments(lambda x: x, (-1.0, 1.0), 2)


def test_p3_matches_legendre():
    ortho = build_orthonormal(weight_moments(rect_weight(1.0), (-1, 1), 4), 3)
    x = np.linspace(-1, 1, 11)
    V = ortho.evaluate_all(x)
    assert V[0] == pytest.approx(np.ones_like(x), abs=1e-13)
    assert V[1] == pytest.approx(math.sqrt(3) * x, abs=1e-13)
    assert V[2] == pytest.approx(math.sqrt(5) / 2 * (3 * x ** 2 - 1), abs=1e-13)


@pytest.mark.parametrize("p", [2, 4, 6, 8])
def test_matches_exact_gram_schmidt(p):
    ortho = build_orthonormal([float(uniform_moment(d)) for d in range(2 * p - 1)], p)
    ref = np.array([row + [0.0] * (p - len(row)) for row in normalized_uniform(p)])
    assert np.allclose(ortho.A, ref, atol=1e-11)


def test_exact_gram_schmidt_oracle_is_monic_legendre():
    rows = gram_schmidt_uniform(3)
    assert [float(c) for c in rows[2]] == pytest.approx([-1 / 3, 0.0, 1.0])


def test_single_polynomial():
    ortho = build_orthonormal([1.0], 1)
    assert ortho.A.tolist() == [[1.0]]


def test_scaled_first_polynomial():
    delta = 0.1
    ortho = ObjectModel(delta).orthopoly(3)
    assert ortho.A[1, 1] == pytest.approx(10 * math.sqrt(3), rel=1e-12)
    assert ortho.A[1, 0] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("delta", [0.05, 0.3, 1.0])
@pytest.mark.parametrize("p", [1, 5, 10, 16])
def test_orthonormality(delta, p):
    obj = ObjectModel(delta)
    ortho = obj.orthopoly(p)
    x, w = obj.nodes(120)
    assert orthonormality_residual(ortho, x, w) < 1e-10


@pytest.mark.parametrize("delta", [0.1, 0.7])
def test_legendre_closed_form(delta):
    ortho = ObjectModel(delta).orthopoly(11)
    x = np.linspace(-delta, delta, 31)
    V = ortho.evaluate_all(x)
    for j in range(11):
        ref = math.sqrt(2 * j + 1) * eval_legendre(j, x / delta)
        assert np.max(np.abs(V[j] - ref)) < 1e-10


def test_positive_leading_coefficients():
    A = ObjectModel(0.2).orthopoly(16).A
    assert np.all(np.diag(A) > 0)
    assert np.allclose(np.triu(A, 1), 0.0)


@pytest.mark.parametrize("delta", [0.1, 1.0])
def test_degree_annihilation(delta):
    obj = ObjectModel(delta)
    ortho = obj.orthopoly(16)
    x, w = obj.nodes(120)
    V = ortho.evaluate_all(x)
    for mu in range(8):
        scale = delta ** mu  # compare in units of the monomial's own size
        for j in range(mu + 1, 16):
            assert abs(V[j] @ (w * x ** mu)) / scale < 1e-10


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.02, max_value=2.0))
def test_scale_covariance(delta):
    A1 = ObjectModel(1.0).orthopoly(8).A
    Ad = ObjectModel(delta).orthopoly(8).A
    k = np.arange(8)
    assert np.allclose(Ad * delta ** k[None, :], A1, rtol=1e-9, atol=1e-9)


def test_degenerate_weight_reports_pivot():
    # two-point measure supports only two independent polynomials
    with pytest.raises(DegenerateWeightError) as info:
        build_orthonormal([1.0, 0.0, 1.0, 0.0, 1.0], 3)
    assert info.value.pivot == 2


@pytest.mark.parametrize("bad", [0, 17])
def test_p_out_of_range(bad):
    with pytest.raises(InvalidArgumentError):
        build_orthonormal([1.0] * 40, bad)


def test_truncation_keeps_leading_rows():
    ortho = ObjectModel(0.3).orthopoly(10)
    short = ortho.truncated(4)
    x = np.linspace(-0.3, 0.3, 7)
    assert np.allclose(short.evaluate_all(x), ortho.evaluate_all(x)[:4], atol=1e-13)


def test_transfer_density_polynomials():
    g = TransferModel("gaussian")
    ortho = orthonormal_for_weight(g.density, g.support, 6, order=200)
    x, w = mapped_rule(*g.support, 200)
    assert orthonormality_residual(ortho, x, w * g.density(x)) < 1e-10
