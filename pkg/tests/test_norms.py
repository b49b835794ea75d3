import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from macint.fields import Grid, ScalarField, SymMatrixField
from macint.norms import (check_interpolation, ck_norm, holder_norm, holder_seminorm,
                          sup_norm)

from conftest import band_limited

TWO_PI = 2 * np.pi


def brute_force_seminorm(values, alpha):
    """All sample pairs, minimum-image distance; independent of the library scan."""
    n = values.shape[0]
    idx = np.array(list(itertools.product(range(n), repeat=2)))
    flat = values.reshape(-1)
    best = 0.0
    for p in range(len(idx)):
        q = slice(p + 1, None)
        d = np.abs(idx[q] - idx[p])
        d = np.minimum(d, n - d)
        dist = np.hypot(d[:, 0], d[:, 1]) / n
        if dist.size:
            best = max(best, float((np.abs(flat[q] - flat[p]) / dist ** alpha).max()))
    return best


@pytest.mark.parametrize("alpha", [0.0, 0.3, 1.0])
def test_exhaustive_matches_brute_force(alpha):
    g = Grid(32)
    f = band_limited(g, np.random.default_rng(5), kmax=3)
    est = holder_seminorm(f, 0, alpha, method="exhaustive")
    assert est.value == pytest.approx(brute_force_seminorm(f.values, alpha), rel=1e-12)
    assert est.pair_count == 1024 * 1023 // 2


def test_lipschitz_constant_of_sine():
    n = 64
    f = ScalarField.from_function(Grid(n), lambda x, y: np.sin(TWO_PI * x))
    est = holder_seminorm(f, 0, 1.0, method="exhaustive").value
    assert TWO_PI * (1 - 10 / n) <= est <= TWO_PI


def test_constant_has_zero_seminorm(grid64):
    f = ScalarField.from_function(grid64, lambda x, y: 3.0 + 0 * x)
    for k, a in [(0, 0.5), (1, 0.0), (2, 0.7)]:
        assert holder_seminorm(f, k, a).value == 0.0


def test_subsampled_below_exhaustive():
    g = Grid(128)
    f = band_limited(g, np.random.default_rng(2), kmax=6)
    ex = holder_seminorm(f, 0, 0.4, method="exhaustive")
    sub = holder_seminorm(f, 0, 0.4, method="subsampled")
    assert sub.value <= ex.value + 1e-15
    assert sub.pair_count < ex.pair_count


def test_ck_norm_of_single_mode(grid64):
    f = ScalarField.from_function(grid64, lambda x, y: np.sin(TWO_PI * x))
    assert ck_norm(f, 2) == pytest.approx(1 + TWO_PI + TWO_PI ** 2, rel=1e-12)
    assert holder_norm(f, 0, 0.5).value == pytest.approx(1 + holder_seminorm(f, 0, 0.5).value)


def test_matrix_norm_is_frobenius(grid64):
    S = SymMatrixField.constant(grid64, [[0.0, 1.0], [1.0, 0.0]])
    assert sup_norm(S) == pytest.approx(np.sqrt(2))


@pytest.mark.parametrize("alpha", [-0.1, 1.5])
def test_rejects_bad_alpha(grid64, alpha):
    with pytest.raises(ValueError):
        holder_norm(ScalarField.zeros(grid64), 0, alpha)


def test_rejects_bad_order(grid64):
    with pytest.raises(ValueError):
        holder_norm(ScalarField.zeros(grid64), -1, 0.5)
    with pytest.raises(ValueError):
        holder_norm(ScalarField.zeros(grid64), 5, 0.5)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3))
def test_scaling_is_exact(seed, c):
    g = Grid(32)
    f = band_limited(g, np.random.default_rng(seed), kmax=3)
    a = holder_norm(f, 1, 0.5).value
    b = holder_norm(f * c, 1, 0.5).value
    assert b == pytest.approx(abs(c) * a, rel=1e-12)


def test_half_period_shift_invariance():
    g = Grid(32)
    f = band_limited(g, np.random.default_rng(8), kmax=4)
    shifted = ScalarField(g, np.roll(f.values, (16, 16), axis=(0, 1)))
    for k in (0, 1):
        assert abs(holder_seminorm(f, k, 0.3).value - holder_seminorm(shifted, k, 0.3).value) < 1e-12


def test_seminorm_monotone_in_alpha():
    # distances on the torus are below 1, so |x-y|^-α grows with α
    g = Grid(32)
    f = band_limited(g, np.random.default_rng(3), kmax=4)
    vals = [holder_seminorm(f, 0, a).value for a in np.linspace(0, 1, 6)]
    assert all(x <= y + 1e-14 for x, y in zip(vals, vals[1:]))


def test_interpolation_single_modes_constant_ratio(grid64):
    ratios = []
    for k in range(1, 6):
        f = ScalarField.from_function(grid64, lambda x, y, k=k: np.sin(TWO_PI * k * x))
        ratios.append(check_interpolation(f, 1, 2).ratio)
    assert max(ratios) / min(ratios) < 1.05


def test_interpolation_random_fields(grid64):
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(10):
        f = band_limited(grid64, rng, kmax=2)  # a handful of modes
        worst = max(worst, check_interpolation(f, 1, 2).ratio)
    assert worst <= 3.0


def test_interpolation_degenerate(grid64):
    rep = check_interpolation(ScalarField.zeros(grid64) + 1.0, 0, 2)
    assert rep.degenerate and np.isnan(rep.ratio)
    with pytest.raises(ValueError):
        check_interpolation(ScalarField.zeros(grid64), 2, 1)
