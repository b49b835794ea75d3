import numpy as np
import pytest
from scipy import integrate, ndimage

from macint.errors import ResolutionError
from macint.fields import DisplacementField, Grid, ScalarField, VectorField2
from macint.mollify import MollifierKernel, bump, mollify, multiplier
from macint.norms import derivative_sup, sup_norm

from conftest import band_limited

TWO_PI = 2 * np.pi


def test_kernel_mass_and_symmetry():
    k = MollifierKernel.build(Grid(128), 0.1)
    w = k.weights
    assert w.sum() == pytest.approx(1.0, abs=1e-15)
    assert np.all(w >= 0)
    # invariant under the grid's 90° rotations and reflections (about the origin sample)
    c = np.roll(w, (64, 64), axis=(0, 1))[1:, 1:]
    np.testing.assert_allclose(c, c.T, atol=1e-18)
    np.testing.assert_allclose(c, c[::-1, :], atol=1e-18)
    np.testing.assert_allclose(c, np.rot90(c), atol=1e-18)


def test_under_resolved_kernel_rejected():
    with pytest.raises(ResolutionError):
        mollify(ScalarField.zeros(Grid(64)), 8 / 64)
    with pytest.raises(ValueError):
        MollifierKernel.build(Grid(64), 0.6)


def test_constant_preserved(grid64):
    f = ScalarField.zeros(grid64) + 2.5
    np.testing.assert_allclose(mollify(f, 0.2).values, 2.5, atol=1e-14)


def test_spectral_matches_direct_convolution():
    g = Grid(64)
    f = band_limited(g, np.random.default_rng(1), kmax=8)
    k = MollifierKernel.build(g, 0.2)
    direct = ndimage.convolve(f.values, np.fft.fftshift(k.weights), mode="wrap")
    # fftshift puts the origin sample at index n/2, which ndimage treats as the centre
    np.testing.assert_allclose(mollify(f, 0.2).values, direct, atol=1e-12)


def continuum_fourier(k, ell):
    """Fourier coefficient of the unit-mass bump of radius ell at |k|, by direct quadrature."""
    from scipy.special import j0
    num = integrate.quad(lambda r: bump(np.array(r)) * r * j0(TWO_PI * k * ell * r), 0, 1, limit=200)[0]
    den = integrate.quad(lambda r: bump(np.array(r)) * r, 0, 1)[0]
    return num / den


@pytest.mark.parametrize("ell", [1 / 8, 1 / 16, 1 / 32])
def test_single_mode_multiplier(ell):
    g = Grid(512)
    f = ScalarField.from_function(g, lambda x, y: np.sin(TWO_PI * x))
    out = mollify(f, ell)
    m = out.values[g.n // 4, 0] / f.values[g.n // 4, 0]
    np.testing.assert_allclose(out.values, m * f.values, atol=1e-13)
    assert 0 < m < 1
    assert m == pytest.approx(continuum_fourier(1, ell), abs=1e-4)


def test_multiplier_tends_to_one():
    g = Grid(512)
    vals = [multiplier(g, ell)[1, 0] for ell in (1 / 8, 1 / 16, 1 / 32)]
    assert vals[0] < vals[1] < vals[2] < 1


def test_continuum_multiplier_matches_quadrature():
    g = Grid(64)
    m = multiplier(g, 0.05, method="continuum")
    for k1, k2 in [(1, 0), (3, 4), (10, 0)]:
        assert m[k1, k2] == pytest.approx(continuum_fourier(np.hypot(k1, k2), 0.05), abs=1e-10)


def test_displacement_keeps_affine_part(grid64, rng):
    L = np.array([[1.0, 2.0], [3.0, 4.0]])
    w = DisplacementField(L, VectorField2(band_limited(grid64, rng), band_limited(grid64, rng)))
    out = mollify(w, 0.2)
    assert np.array_equal(out.linear, L)


def _slope(ells, errs):
    return np.polyfit(np.log(ells), np.log(errs), 1)[0]


def test_approximation_order_two():
    g = Grid(1024)
    f = band_limited(g, np.random.default_rng(3), kmax=3)
    ells = np.array([1 / 8, 1 / 16, 1 / 32, 1 / 64])
    errs = [sup_norm(f - mollify(f, e)) for e in ells]
    assert 1.8 <= _slope(ells, errs) <= 2.2


@pytest.mark.parametrize("order", [1, 2])
def test_derivative_gain(order):
    # a step profile is bounded but not continuous, so p = 0 and the slope is -order
    g = Grid(1024)
    f = ScalarField.from_function(g, lambda x, y: np.sign(np.sin(TWO_PI * x)) + 0 * y)
    ells = np.array([1 / 8, 1 / 16, 1 / 32, 1 / 64])
    gains = [derivative_sup(mollify(f, e), order) for e in ells]
    assert abs(_slope(ells, gains) + order) <= 0.2


@pytest.mark.parametrize("alpha", [0.3, 0.5])
def test_commutator_decay(alpha):
    # |sin|^alpha is exactly C^{0,alpha}; the commutator should gain ell^{2 alpha}
    g = Grid(1024)
    f = ScalarField.from_function(g, lambda x, y: np.abs(np.sin(TWO_PI * x)) ** alpha)
    h = ScalarField.from_function(g, lambda x, y: np.abs(np.sin(TWO_PI * (x + y))) ** alpha)
    ells = np.array([1 / 8, 1 / 16, 1 / 32, 1 / 64])
    errs = [sup_norm(mollify(f * h, e) - mollify(f, e) * mollify(h, e)) for e in ells]
    assert _slope(ells, errs) >= 2 * alpha - 0.2
