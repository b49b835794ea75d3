import numpy as np
import pytest

from macint.fields import Grid, ScalarField, SymMatrixField

_SUMMARY = []


def band_limited(grid, rng, kmax=3, amp=1.0):
    """Random real trigonometric polynomial with |k_i| <= kmax, scaled to sup = amp."""
    x1, x2 = grid.x1, grid.x2
    out = np.zeros_like(x1)
    for k1 in range(-kmax, kmax + 1):
        for k2 in range(0, kmax + 1):
            if k1 == 0 and k2 == 0:
                continue
            out += rng.normal() * np.cos(2 * np.pi * (k1 * x1 + k2 * x2) + rng.uniform(0, 2 * np.pi))
    return ScalarField(grid, amp * out / np.abs(out).max())


def band_limited_sym(grid, rng, kmax=3, amp=1.0):
    """Symmetric field with pointwise Frobenius norm at most amp (attained somewhere)."""
    S = SymMatrixField(*(band_limited(grid, rng, kmax) for _ in range(3)))
    return S * (amp / S.pointwise_norm().max())


# Picard corpus: μσ = 10, μ^(α-1)/σ ≈ 0.148
CORPUS = dict(n=256, sigma=0.2, mu=50, alpha=0.1, N=3)


def corpus_case(seed, n=CORPUS["n"], sigma=CORPUS["sigma"]):
    """H = Id + 0.05·S and M with pointwise Frobenius sup 1/σ, both band-limited (|k| ≤ 3)."""
    grid = Grid(n)
    rng = np.random.default_rng(seed)
    H = SymMatrixField.identity(grid) + band_limited_sym(grid, rng, amp=0.05)
    M = band_limited_sym(grid, rng, amp=1.0 / sigma)
    return H, M


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def grid64():
    return Grid(64)


def record(line):
    """Keep a line for the terminal summary (acceptance criteria)."""
    print(line)
    _SUMMARY.append(line)


def pytest_terminal_summary(terminalreporter):
    if _SUMMARY:
        terminalreporter.section("acceptance criteria")
        for line in _SUMMARY:
            terminalreporter.write_line(line)
