"""Diagonalising decomposition of a symmetric defect with error absorption.

Given H we look for a scalar a > 0 and a displacement w with

    a Id = H - sym∇w + E(a),

where E(a) collects the leading errors of a corrugation along x1 at
frequency mu.  E(a) has a vanishing 22 entry, so a is read off from the 22
component and w comes from one Cauchy transform per iterate.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .dbar import ComplexField, cauchy_solve
from .errors import NonContractionWarning, PositivityError
from .fields import (DisplacementField, ScalarField, SymMatrixField, VectorField2, gradient,
                     partial, sym_gradient)
from .norms import holder_norm, sup_norm

TWO_PI = 2.0 * np.pi


class ProfileValues(NamedTuple):
    g1: np.ndarray
    g2: np.ndarray
    g3: np.ndarray
    dg1: np.ndarray
    dg2: np.ndarray


class CorrugationProfiles:
    """1-periodic, mean-zero corrugation profiles with ½γ₁'² + γ₂' = 1."""

    @staticmethod
    def g1(t):
        return np.sin(TWO_PI * t) / np.pi

    @staticmethod
    def dg1(t):
        return 2.0 * np.cos(TWO_PI * t)

    @staticmethod
    def ddg1(t):
        return -4.0 * np.pi * np.sin(TWO_PI * t)

    @staticmethod
    def g2(t):
        return -np.sin(2.0 * TWO_PI * t) / (4.0 * np.pi)

    @staticmethod
    def dg2(t):
        return -np.cos(2.0 * TWO_PI * t)

    def g3(self, t):
        return 0.5 * self.g1(t) * self.dg1(t) + self.g2(t)

    def evaluate(self, t) -> ProfileValues:
        t = np.asarray(t, dtype=float)
        return ProfileValues(self.g1(t), self.g2(t), self.g3(t), self.dg1(t), self.dg2(t))


PROFILES = CorrugationProfiles()


def gamma_eval(t, profiles: CorrugationProfiles = PROFILES) -> ProfileValues:
    return profiles.evaluate(t)


def oscillation(grid, fn, freq: int, axis: int) -> ScalarField:
    """Samples of fn(freq * x_axis); freq must be an integer to stay periodic."""
    if int(freq) != freq or freq < 1:
        raise ValueError(f"oscillation frequency must be a positive integer, got {freq}")
    x = grid.x1 if axis == 1 else grid.x2
    return ScalarField(grid, fn(freq * x))


def hat_field(H: SymMatrixField) -> ComplexField:
    """Ĥ = H11 - H22 + i(H12 + H21)."""
    return ComplexField(H.grid, (H.m11.values - H.m22.values) + 2j * H.m12.values)


def _half_cauchy_displacement(h: ComplexField) -> DisplacementField:
    """w = ½𝒞[h]; the mean c of h becomes the affine map x ↦ (Re c · x1, Im c · x1)."""
    g, c = cauchy_solve(h)
    linear = np.array([[c.real, 0.0], [c.imag, 0.0]])
    return DisplacementField(linear, VectorField2(0.5 * g.re, 0.5 * g.im))


def _coefficient(H: SymMatrixField, w: DisplacementField) -> ScalarField:
    return H.m22 - partial(w.periodic.c2, (0, 1)) - w.linear[1, 1]


def base_decomposition(H: SymMatrixField) -> tuple[ScalarField, DisplacementField]:
    """a0, w0 with H - sym∇w0 = a0 Id."""
    w0 = _half_cauchy_displacement(hat_field(H))
    return _coefficient(H, w0), w0


def error_terms(a: ScalarField, M: SymMatrixField, mu: int,
                profiles: CorrugationProfiles = PROFILES,
                eps_floor: float = 1e-6) -> tuple[SymMatrixField, SymMatrixField, SymMatrixField]:
    """The three absorbed error terms E1, E2, E3 of a corrugation at frequency mu.

    E1 = (γ1(μx1)/μ) √a (M - M22 e2⊗e2)
    E2 = -(γ3(μx1)/μ) ∇a ⊙ e1
    E3 = -(γ1(μx1)²/2μ²) (∇√a⊗∇√a - (∂2√a)² e2⊗e2)
    """
    if a.min() <= eps_floor:
        raise PositivityError(f"coefficient minimum {a.min():.3g} is below the floor {eps_floor:g}")
    grid = a.grid
    zero = ScalarField.zeros(grid)
    g1 = oscillation(grid, profiles.g1, mu, 1)
    g3 = oscillation(grid, profiles.g3, mu, 1)
    ra = a.sqrt()
    c1 = g1 * ra * (1.0 / mu)
    E1 = SymMatrixField(c1 * M.m11, c1 * M.m12, zero)
    da = gradient(a)
    c2 = g3 * (-1.0 / mu)
    E2 = SymMatrixField(c2 * da.c1, c2 * da.c2 * 0.5, zero)
    dra = gradient(ra)
    c3 = g1 * g1 * (-0.5 / mu ** 2)
    E3 = SymMatrixField(c3 * dra.c1 * dra.c1, c3 * dra.c1 * dra.c2, zero)
    return E1, E2, E3


def total_error(a: ScalarField, M: SymMatrixField, mu: int,
                profiles: CorrugationProfiles = PROFILES, eps_floor: float = 1e-6) -> SymMatrixField:
    E1, E2, E3 = error_terms(a, M, mu, profiles, eps_floor)
    return E1 + E2 + E3


@dataclass
class DecompositionResult:
    a_seq: list[ScalarField]
    w_seq: list[DisplacementField]
    e_seq: list[SymMatrixField]
    residuals: list[float] = field(default_factory=list)
    contraction: list[float] = field(default_factory=list)
    alpha: float = 0.0
    smallness: float = float("nan")

    @property
    def N(self) -> int:
        return len(self.a_seq) - 1

    @property
    def ratios(self) -> list[float]:
        """d_k / d_(k-1) for k = 1..N, where d_k = ‖E(a^(k)) - E(a^(k-1))‖_{0,α}."""
        d = self.contraction
        return [d[k] / d[k - 1] if d[k - 1] > 0 else 0.0 for k in range(1, len(d))]

    def decomposed(self, H: SymMatrixField, k: int) -> SymMatrixField:
        """H - sym∇w^(k) + E(a^(k-1)), which should equal a^(k) Id."""
        out = H - sym_gradient(self.w_seq[k])
        if k >= 1:
            out = out + self.e_seq[k - 1]
        return out


def picard_decompose(H: SymMatrixField, M: SymMatrixField, mu: int, sigma: float, N: int,
                     profiles: CorrugationProfiles = PROFILES, alpha: float = 0.1,
                     eps_floor: float = 1e-6, holder_method: str = "auto") -> DecompositionResult:
    """N Picard steps  H^(k) = H + E(a^(k-1)),  w^(k) = ½𝒞[Ĥ^(k)],  a^(k) = H22 - ∂2 w2^(k)."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    a0, w0 = base_decomposition(H)
    a_seq, w_seq = [a0], [w0]
    e_seq = [total_error(a0, M, mu, profiles, eps_floor)]
    grid = H.grid
    ident = SymMatrixField.identity(grid)
    smallness = holder_norm(H - ident, 0, alpha, method=holder_method).value + mu ** (alpha - 1.0) / sigma
    contraction = [holder_norm(e_seq[0], 0, alpha, method=holder_method).value]
    residuals = []
    for k in range(1, N + 1):
        Hk = H + e_seq[k - 1]
        wk = _half_cauchy_displacement(hat_field(Hk))
        ak = _coefficient(H, wk)
        lhs = SymMatrixField.scalar_multiple_of_identity(ak)
        rhs = H - sym_gradient(wk) + e_seq[k - 1]
        res = sup_norm(lhs - rhs)
        a_seq.append(ak)
        w_seq.append(wk)
        e_seq.append(total_error(ak, M, mu, profiles, eps_floor))
        residuals.append(res)
        contraction.append(holder_norm(e_seq[k] - e_seq[k - 1], 0, alpha, method=holder_method).value)
    result = DecompositionResult(a_seq, w_seq, e_seq, residuals, contraction, alpha, smallness)
    if any(r > 1.0 for r in result.ratios):
        warnings.warn(f"Picard differences grew: ratios {np.round(result.ratios, 3).tolist()}",
                      NonContractionWarning, stacklevel=2)
    return result
