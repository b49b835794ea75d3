"""Spectral inverses on the torus: the Cauchy transform and the Poisson solver."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import Grid, ScalarField


@dataclass(frozen=True)
class ComplexField:
    """Complex samples ``re + i im`` on one grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.complex128)
        if arr.shape != (self.grid.n, self.grid.n):
            raise ValueError("complex field has the wrong shape")
        if not np.all(np.isfinite(arr)):
            raise ValueError("complex field contains non-finite samples")
        arr = arr.view()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @classmethod
    def from_parts(cls, re: ScalarField, im: ScalarField) -> "ComplexField":
        if re.grid != im.grid:
            raise ValueError("parts live on different grids")
        return cls(re.grid, re.values + 1j * im.values)

    @property
    def re(self) -> ScalarField:
        return ScalarField(self.grid, self.values.real)

    @property
    def im(self) -> ScalarField:
        return ScalarField(self.grid, self.values.imag)

    def __add__(self, other: "ComplexField") -> "ComplexField":
        return ComplexField(self.grid, self.values + other.values)

    def __sub__(self, other: "ComplexField") -> "ComplexField":
        return ComplexField(self.grid, self.values - other.values)

    def __mul__(self, s) -> "ComplexField":
        return ComplexField(self.grid, self.values * s)

    __rmul__ = __mul__

    def sup(self) -> float:
        return float(np.abs(self.values).max())


def _full_wavenumbers(n: int):
    k = np.fft.fftfreq(n, 1.0 / n)
    return k[:, None], k[None, :]


def dbar_symbol(n: int) -> np.ndarray:
    """Fourier symbol of ∂_z̄ = ½(∂₁ + i∂₂): πi(k₁ + i k₂).

    Nyquist wavenumbers enter as zero, matching the first-derivative
    convention of the fields module.
    """
    k1, k2 = _full_wavenumbers(n)
    k1 = np.where(np.abs(k1) == n // 2, 0.0, k1)
    k2 = np.where(np.abs(k2) == n // 2, 0.0, k2)
    return np.pi * 1j * (k1 + 1j * k2)


def cauchy_solve(h: ComplexField) -> tuple[ComplexField, complex]:
    """Mean-zero periodic g with ∂_z̄ g = h - mean(h), and mean(h).

    Besides the mean, the three modes whose wavenumbers are 0 or n/2 on both
    axes have a vanishing symbol; their content is dropped.
    """
    n = h.grid.n
    spec = np.fft.fft2(h.values)
    mean = complex(spec[0, 0] / (n * n))
    sym = np.broadcast_to(dbar_symbol(n), spec.shape)
    keep = sym != 0
    out = np.zeros_like(spec)
    out[keep] = spec[keep] / sym[keep]
    return ComplexField(h.grid, np.fft.ifft2(out)), mean


def poisson_solve(f: ScalarField) -> tuple[ScalarField, float]:
    """Mean-zero u with -Δu = f - mean(f); returns (u, mean(f)).

    On the torus only mean-zero data is solvable exactly, so a nonzero
    returned mean flags a projected right-hand side.
    """
    n = f.grid.n
    spec = f.spectrum
    k1 = np.fft.fftfreq(n, 1.0 / n)[:, None]
    k2 = np.fft.rfftfreq(n, 1.0 / n)[None, :]
    ksq = 4.0 * np.pi ** 2 * (k1 ** 2 + k2 ** 2)
    ksq[0, 0] = 1.0
    out = spec / ksq
    out[0, 0] = 0.0
    return ScalarField.from_spectrum(f.grid, out), f.mean()
