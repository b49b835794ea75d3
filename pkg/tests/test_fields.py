import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from macint.fields import (DisplacementField, Grid, ScalarField, SymMatrixField, VectorField2,
                           curl_curl, dealiasing, gradient, half_outer, hessian, laplacian,
                           partial, spectral_derivative, sym_gradient, very_weak_hessian)

from conftest import band_limited

TWO_PI = 2 * np.pi


def mode(grid, k1, k2):
    return ScalarField.from_function(grid, lambda x, y: np.sin(TWO_PI * (k1 * x + k2 * y)))


@pytest.mark.parametrize("n", [16, 48, 100])
def test_grid_rejects_bad_sizes(n):
    with pytest.raises(ValueError):
        Grid(n)


def test_grid_coordinates():
    g = Grid(32)
    assert g.h == 1 / 32
    assert g.x1[1, 0] == pytest.approx(1 / 32)
    assert g.x2[0, 1] == pytest.approx(1 / 32)
    assert g.nyquist_guard == 8


def test_values_are_read_only(grid64):
    f = ScalarField.zeros(grid64)
    with pytest.raises(ValueError):
        f.values[0, 0] = 1.0


def test_nonfinite_rejected(grid64):
    arr = np.zeros((64, 64))
    arr[3, 3] = np.nan
    with pytest.raises(ValueError):
        ScalarField(grid64, arr)


@pytest.mark.parametrize("k1,k2", [(1, 0), (0, 3), (2, -5), (7, 4)])
def test_first_derivatives_match_closed_form(grid64, k1, k2):
    f = mode(grid64, k1, k2)
    c = np.cos(TWO_PI * (k1 * grid64.x1 + k2 * grid64.x2))
    np.testing.assert_allclose(partial(f, (1, 0)).values, TWO_PI * k1 * c, atol=1e-10)
    np.testing.assert_allclose(partial(f, (0, 1)).values, TWO_PI * k2 * c, atol=1e-10)


def test_mixed_and_second_derivatives(grid64):
    f = ScalarField.from_function(grid64, lambda x, y: np.sin(TWO_PI * 2 * x) * np.cos(TWO_PI * 3 * y))
    expect = -(TWO_PI * 2) * (TWO_PI * 3) * np.cos(TWO_PI * 2 * grid64.x1) * np.sin(TWO_PI * 3 * grid64.x2)
    np.testing.assert_allclose(partial(f, (1, 1)).values, expect, atol=1e-8)
    lap = laplacian(f)
    np.testing.assert_allclose(lap.values, -(TWO_PI ** 2) * 13 * f.values, atol=1e-8)


def test_odd_derivative_drops_nyquist(grid64):
    # cos(π n x) is the Nyquist mode: an odd derivative has no consistent value
    f = ScalarField.from_function(grid64, lambda x, y: np.cos(np.pi * 64 * x))
    assert partial(f, (1, 0)).sup() < 1e-10
    assert partial(f, (2, 0)).sup() == pytest.approx((np.pi * 64) ** 2, rel=1e-12)


def test_derivative_order_limits(grid64):
    f = ScalarField.zeros(grid64)
    with pytest.raises(ValueError):
        partial(f, (4, 3))
    with pytest.raises(ValueError):
        partial(f, (-1, 0))
    with pytest.raises(ValueError):
        spectral_derivative(f, 3)


def test_derivative_agrees_with_finite_differences():
    # independent oracle: 4th-order centred differences on a smooth field
    g = Grid(256)
    f = ScalarField.from_function(g, lambda x, y: np.exp(np.sin(TWO_PI * x)) * np.cos(TWO_PI * y))
    v = f.values
    h = g.h
    fd = (-np.roll(v, -2, 0) + 8 * np.roll(v, -1, 0) - 8 * np.roll(v, 1, 0) + np.roll(v, 2, 0)) / (12 * h)
    np.testing.assert_allclose(partial(f, (1, 0)).values, fd, atol=1e-5)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_derivative_is_linear(seed, s, t):
    g = Grid(32)
    rng = np.random.default_rng(seed)
    f, h = band_limited(g, rng, 4), band_limited(g, rng, 4)
    lhs = partial(f * s + h * t, (1, 1))
    rhs = partial(f, (1, 1)) * s + partial(h, (1, 1)) * t
    assert (lhs - rhs).sup() < 1e-9


def test_product_rule_for_resolved_products(grid64, rng):
    f, h = band_limited(grid64, rng, 5), band_limited(grid64, rng, 5)
    lhs = partial(f * h, (0, 1))
    rhs = partial(f, (0, 1)) * h + f * partial(h, (0, 1))
    assert (lhs - rhs).sup() < 1e-9


def test_dealiasing_removes_aliased_product():
    g = Grid(32)
    # 12 + 12 = 24 aliases onto -8 on a 32-point grid
    f = ScalarField.from_function(g, lambda x, y: np.cos(TWO_PI * 12 * x))
    plain = f * f
    with dealiasing(True):
        clean = f * f
    assert abs(plain.spectrum[8, 0]) > 1.0
    # with padding only the mean survives
    np.testing.assert_allclose(clean.values, 0.5, atol=1e-12)


def test_sym_gradient_of_affine_map(grid64):
    L = np.array([[1.0, 2.0], [-4.0, 3.0]])
    w = DisplacementField(L, VectorField2.zeros(grid64))
    S = sym_gradient(w)
    np.testing.assert_allclose(S.m11.values, 1.0)
    np.testing.assert_allclose(S.m12.values, -1.0)
    np.testing.assert_allclose(S.m22.values, 3.0)


def test_displacement_scales_by_numbers_only(grid64):
    w = DisplacementField.zeros(grid64)
    with pytest.raises(TypeError):
        w * ScalarField.zeros(grid64)
    assert np.all((2.0 * w).linear == 0)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_curl_curl_kills_symmetric_gradients(seed):
    g = Grid(32)
    rng = np.random.default_rng(seed)
    w = DisplacementField(rng.normal(size=(2, 2)),
                          VectorField2(band_limited(g, rng, 5), band_limited(g, rng, 5)))
    assert curl_curl(sym_gradient(w)).sup() < 1e-8


def test_very_weak_hessian_closed_form():
    g = Grid(64)
    v = ScalarField.from_function(g, lambda x, y: np.sin(TWO_PI * x) * np.sin(TWO_PI * y))
    s1, s2 = np.sin(TWO_PI * g.x1), np.sin(TWO_PI * g.x2)
    c1, c2 = np.cos(TWO_PI * g.x1), np.cos(TWO_PI * g.x2)
    det = TWO_PI ** 4 * (s1 ** 2 * s2 ** 2 - c1 ** 2 * c2 ** 2)
    np.testing.assert_allclose(very_weak_hessian(v).values, det, atol=1e-8)


def test_very_weak_hessian_is_half_curl_curl(grid64, rng):
    v = band_limited(grid64, rng, 4)
    other = -0.5 * curl_curl(half_outer(gradient(v)) * 2.0)
    assert (very_weak_hessian(v) - other).sup() < 1e-8
    H = hessian(v)
    det = H.m11 * H.m22 - H.m12 * H.m12
    assert (very_weak_hessian(v) - det).sup() < 1e-7 * max(1.0, det.sup())


def test_sym_matrix_norm_is_frobenius(grid64):
    S = SymMatrixField.constant(grid64, [[1.0, 2.0], [2.0, 3.0]])
    np.testing.assert_allclose(S.pointwise_norm(), np.sqrt(1 + 8 + 9))


def test_sym_gradient_periodic_example(grid64):
    z = ScalarField.zeros(grid64)
    s = ScalarField.from_function(grid64, lambda x, y: np.sin(TWO_PI * y))
    S = sym_gradient(DisplacementField(np.zeros((2, 2)), VectorField2(s, z)))
    np.testing.assert_allclose(S.m12.values, np.pi * np.cos(TWO_PI * grid64.x2), atol=1e-12)
    assert S.m11.sup() < 1e-12 and S.m22.sup() < 1e-12


def test_curl_curl_of_scalar_identity_is_laplacian(grid64):
    u = ScalarField.from_function(grid64, lambda x, y: np.sin(TWO_PI * x) * np.sin(TWO_PI * y))
    cc = curl_curl(SymMatrixField.scalar_multiple_of_identity(u))
    np.testing.assert_allclose(cc.values, -8 * np.pi ** 2 * u.values, atol=1e-10)
    assert curl_curl(SymMatrixField.constant(grid64, [[3.0, 1.0], [1.0, -2.0]])).sup() == 0


def test_mixed_derivatives_commute(grid64, rng):
    f = band_limited(grid64, rng, 6)
    a = spectral_derivative(spectral_derivative(f, 1), 2)
    b = spectral_derivative(spectral_derivative(f, 2), 1)
    # two chained transforms agree to rounding; the combined symbol is order-free
    assert (a - b).sup() < 1e-12 * a.sup()
    assert (partial(f, (1, 1)) - a).sup() < 1e-12 * a.sup()


def test_derivatives_of_constant_and_means(grid64, rng):
    c = ScalarField.constant(grid64, 3.0)
    assert partial(c, (2, 1)).sup() == 0
    f = band_limited(grid64, rng, 6) + 5.0
    for I in [(1, 0), (0, 2), (1, 1)]:
        assert abs(partial(f, I).mean()) < 1e-14


def test_very_weak_hessian_at_512_relative():
    g = Grid(512)
    v = ScalarField.from_function(g, lambda x, y: np.sin(TWO_PI * x) * np.sin(TWO_PI * y))
    H = hessian(v)
    det = H.m11 * H.m22 - H.m12 * H.m12
    assert (very_weak_hessian(v) - det).sup() < 1e-9 * det.sup()


@pytest.mark.xfail(strict=True, reason="float64 rounding of sampled products, amplified by (pi n)^2 "
                                       "under two derivatives, gives ~1e-6 absolute at n = 512")
def test_very_weak_hessian_at_512_absolute():
    g = Grid(512)
    v = ScalarField.from_function(g, lambda x, y: np.sin(TWO_PI * x) * np.sin(TWO_PI * y))
    s1, s2 = np.sin(TWO_PI * g.x1), np.sin(TWO_PI * g.x2)
    c1, c2 = np.cos(TWO_PI * g.x1), np.cos(TWO_PI * g.x2)
    det = TWO_PI ** 4 * (s1 ** 2 * s2 ** 2 - c1 ** 2 * c2 ** 2)
    assert np.abs(very_weak_hessian(v).values - det).max() < 1e-7
