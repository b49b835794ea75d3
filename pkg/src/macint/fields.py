"""Sampled fields on the periodic unit square and their spectral calculus.

Every field lives on a :class:`Grid` of ``n x n`` samples of the unit 2-torus.
Array axis 0 is the ``x1`` direction and axis 1 is ``x2``; the sample
``values[i, j]`` sits at ``(i*h, j*h)``.  Derivatives are exact derivatives of
the trigonometric interpolant, products are pointwise (optionally 3/2-padded,
see :func:`dealiasing`).
"""
from __future__ import annotations

import contextlib
import contextvars
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

_DEALIAS: contextvars.ContextVar[bool] = contextvars.ContextVar("macint_dealias", default=False)

MAX_DERIVATIVE_ORDER = 6


@contextlib.contextmanager
def dealiasing(enabled: bool = True):
    """Within the block, field products use 3/2-rule zero padding."""
    token = _DEALIAS.set(bool(enabled))
    try:
        yield
    finally:
        _DEALIAS.reset(token)


@dataclass(frozen=True)
class Grid:
    """Uniform grid on the unit torus with ``n`` points per side."""

    n: int

    def __post_init__(self):
        n = self.n
        if not isinstance(n, (int, np.integer)) or n < 32 or n & (n - 1):
            raise ValueError(f"grid size must be a power of two >= 32, got {n!r}")

    @property
    def period(self) -> float:
        return 1.0

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def x1(self) -> np.ndarray:
        return _mesh(self.n)[0]

    @property
    def x2(self) -> np.ndarray:
        return _mesh(self.n)[1]

    @property
    def nyquist_guard(self) -> int:
        """Largest oscillation frequency allowed in a stage (n/4)."""
        return self.n // 4


@lru_cache(maxsize=8)
def _mesh(n: int):
    x = np.arange(n) / n
    x1, x2 = np.meshgrid(x, x, indexing="ij")
    x1.flags.writeable = False
    x2.flags.writeable = False
    return x1, x2


@lru_cache(maxsize=64)
def _axis_symbol(n: int, axis: int, order: int) -> np.ndarray:
    """1-D factor (2*pi*i*k)**order along one axis of an rfft2 spectrum."""
    if axis == 0:
        k = np.fft.fftfreq(n, 1.0 / n)
    else:
        k = np.fft.rfftfreq(n, 1.0 / n)
    sym = (2j * np.pi * k) ** order
    if order % 2 == 1:
        # odd derivatives of the Nyquist mode have no consistent real sign
        sym[np.abs(k) == n // 2] = 0.0
    sym.flags.writeable = False
    return sym


def _apply_symbol(spec: np.ndarray, n: int, orders: tuple[int, int]) -> np.ndarray:
    j, l = orders
    out = spec
    if j:
        out = out * _axis_symbol(n, 0, j)[:, None]
    if l:
        out = out * _axis_symbol(n, 1, l)[None, :]
    if out is spec:
        out = spec.copy()
    return out


def _check_grid(*fields) -> Grid:
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise ValueError("fields live on different grids")
    return grid


class ScalarField:
    """Real samples of a periodic function; treated as immutable."""

    __slots__ = ("grid", "values", "_spec")
    __array_priority__ = 100

    def __init__(self, grid: Grid, values):
        arr = np.asarray(values, dtype=np.float64)
        if arr.shape == ():
            arr = np.full((grid.n, grid.n), float(arr))
        if arr.shape != (grid.n, grid.n):
            raise ValueError(f"expected shape {(grid.n, grid.n)}, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("field contains non-finite samples")
        arr = arr.view()
        arr.flags.writeable = False
        self.grid = grid
        self.values = arr
        self._spec = None

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> "ScalarField":
        return cls(grid, np.broadcast_to(fn(grid.x1, grid.x2), (grid.n, grid.n)))

    @classmethod
    def constant(cls, grid: Grid, c: float) -> "ScalarField":
        return cls(grid, np.full((grid.n, grid.n), float(c)))

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls.constant(grid, 0.0)

    @property
    def spectrum(self) -> np.ndarray:
        if self._spec is None:
            # transform the fluctuation so a large constant offset adds no rounding noise
            mean = self.values.mean()
            spec = np.fft.rfft2(self.values - mean)
            spec[0, 0] = mean * self.values.size
            spec.flags.writeable = False
            self._spec = spec
        return self._spec

    @classmethod
    def from_spectrum(cls, grid: Grid, spec: np.ndarray) -> "ScalarField":
        return cls(grid, np.fft.irfft2(spec, s=(grid.n, grid.n)))

    # --- reductions -------------------------------------------------------
    def mean(self) -> float:
        return float(self.values.mean())

    def max(self) -> float:
        return float(self.values.max())

    def min(self) -> float:
        return float(self.values.min())

    def sup(self) -> float:
        return float(np.abs(self.values).max())

    # --- pointwise algebra ------------------------------------------------
    def _wrap(self, arr) -> "ScalarField":
        return ScalarField(self.grid, arr)

    def __add__(self, other):
        if isinstance(other, ScalarField):
            _check_grid(self, other)
            return self._wrap(self.values + other.values)
        if np.isscalar(other):
            return self._wrap(self.values + other)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, ScalarField):
            _check_grid(self, other)
            return self._wrap(self.values - other.values)
        if np.isscalar(other):
            return self._wrap(self.values - other)
        return NotImplemented

    def __rsub__(self, other):
        if np.isscalar(other):
            return self._wrap(other - self.values)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, ScalarField):
            return product(self, other)
        if np.isscalar(other):
            return self._wrap(self.values * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, ScalarField):
            _check_grid(self, other)
            return self._wrap(self.values / other.values)
        if np.isscalar(other):
            return self._wrap(self.values / other)
        return NotImplemented

    def __neg__(self):
        return self._wrap(-self.values)

    def sqrt(self) -> "ScalarField":
        return self._wrap(np.sqrt(self.values))

    def square(self) -> "ScalarField":
        return product(self, self)

    def shifted(self, s1: int, s2: int) -> "ScalarField":
        """Translate by whole samples (periodic)."""
        return self._wrap(np.roll(self.values, (s1, s2), axis=(0, 1)))

    def __repr__(self):
        return f"ScalarField(n={self.grid.n}, min={self.min():.3g}, max={self.max():.3g})"


def product(f: ScalarField, g: ScalarField) -> ScalarField:
    """Pointwise product; 3/2-padded when :func:`dealiasing` is active."""
    grid = _check_grid(f, g)
    if not _DEALIAS.get():
        return ScalarField(grid, f.values * g.values)
    n = grid.n
    m = 3 * n // 2
    fp = _pad(np.fft.fft2(f.values), m)
    gp = _pad(np.fft.fft2(g.values), m)
    prod = np.fft.ifft2(fp).real * np.fft.ifft2(gp).real
    spec = _truncate(np.fft.fft2(prod), n) * (n * n) / (m * m)
    return ScalarField(grid, np.fft.ifft2(spec).real)


def _pad(spec: np.ndarray, m: int) -> np.ndarray:
    n = spec.shape[0]
    half = n // 2
    out = np.zeros((m, m), dtype=complex)
    idx = np.r_[0:half, m - half + 1:m]
    src = np.r_[0:half, n - half + 1:n]
    out[np.ix_(idx, idx)] = spec[np.ix_(src, src)]
    return out * (m * m) / (n * n)


def _truncate(spec: np.ndarray, n: int) -> np.ndarray:
    m = spec.shape[0]
    half = n // 2
    out = np.zeros((n, n), dtype=complex)
    idx = np.r_[0:half, n - half + 1:n]
    src = np.r_[0:half, m - half + 1:m]
    out[np.ix_(idx, idx)] = spec[np.ix_(src, src)]
    return out


@dataclass(frozen=True)
class VectorField2:
    c1: ScalarField
    c2: ScalarField

    def __post_init__(self):
        _check_grid(self.c1, self.c2)

    @property
    def grid(self) -> Grid:
        return self.c1.grid

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField2":
        z = ScalarField.zeros(grid)
        return cls(z, z)

    def __add__(self, other: "VectorField2") -> "VectorField2":
        return VectorField2(self.c1 + other.c1, self.c2 + other.c2)

    def __sub__(self, other: "VectorField2") -> "VectorField2":
        return VectorField2(self.c1 - other.c1, self.c2 - other.c2)

    def __neg__(self) -> "VectorField2":
        return VectorField2(-self.c1, -self.c2)

    def __mul__(self, s) -> "VectorField2":
        # scalar or ScalarField multiplier
        return VectorField2(self.c1 * s, self.c2 * s)

    __rmul__ = __mul__

    def components(self) -> tuple[ScalarField, ScalarField]:
        return (self.c1, self.c2)

    def pointwise_norm(self) -> np.ndarray:
        return np.hypot(self.c1.values, self.c2.values)


@dataclass(frozen=True)
class SymMatrixField:
    """Symmetric 2x2 matrix field stored as (m11, m12, m22)."""

    m11: ScalarField
    m12: ScalarField
    m22: ScalarField

    def __post_init__(self):
        _check_grid(self.m11, self.m12, self.m22)

    @property
    def grid(self) -> Grid:
        return self.m11.grid

    @classmethod
    def constant(cls, grid: Grid, matrix) -> "SymMatrixField":
        m = np.asarray(matrix, dtype=float)
        if m.shape != (2, 2) or m[0, 1] != m[1, 0]:
            raise ValueError("expected a symmetric 2x2 matrix")
        return cls(ScalarField.constant(grid, m[0, 0]), ScalarField.constant(grid, m[0, 1]),
                   ScalarField.constant(grid, m[1, 1]))

    @classmethod
    def identity(cls, grid: Grid) -> "SymMatrixField":
        return cls.constant(grid, np.eye(2))

    @classmethod
    def zeros(cls, grid: Grid) -> "SymMatrixField":
        z = ScalarField.zeros(grid)
        return cls(z, z, z)

    @classmethod
    def scalar_multiple_of_identity(cls, u: ScalarField) -> "SymMatrixField":
        return cls(u, ScalarField.zeros(u.grid), u)

    def components(self) -> tuple[ScalarField, ScalarField, ScalarField]:
        return (self.m11, self.m12, self.m22)

    def __add__(self, other: "SymMatrixField") -> "SymMatrixField":
        return SymMatrixField(self.m11 + other.m11, self.m12 + other.m12, self.m22 + other.m22)

    def __sub__(self, other: "SymMatrixField") -> "SymMatrixField":
        return SymMatrixField(self.m11 - other.m11, self.m12 - other.m12, self.m22 - other.m22)

    def __neg__(self) -> "SymMatrixField":
        return SymMatrixField(-self.m11, -self.m12, -self.m22)

    def __mul__(self, s) -> "SymMatrixField":
        return SymMatrixField(self.m11 * s, self.m12 * s, self.m22 * s)

    __rmul__ = __mul__

    def __truediv__(self, s: float) -> "SymMatrixField":
        return SymMatrixField(self.m11 / s, self.m12 / s, self.m22 / s)

    def add_identity(self, c: float) -> "SymMatrixField":
        return SymMatrixField(self.m11 + c, self.m12, self.m22 + c)

    def pointwise_norm(self) -> np.ndarray:
        """Frobenius norm at every sample."""
        return np.sqrt(self.m11.values ** 2 + 2.0 * self.m12.values ** 2 + self.m22.values ** 2)

    def mean(self) -> np.ndarray:
        return np.array([[self.m11.mean(), self.m12.mean()], [self.m12.mean(), self.m22.mean()]])


@dataclass(frozen=True)
class DisplacementField:
    """Vector field ``x -> linear @ x + periodic(x)``.

    The affine part carries the mean of the symmetric gradient, which no
    periodic field can produce.
    """

    linear: np.ndarray
    periodic: VectorField2

    def __post_init__(self):
        lin = np.array(self.linear, dtype=float)
        if lin.shape != (2, 2) or not np.all(np.isfinite(lin)):
            raise ValueError("linear part must be a finite 2x2 matrix")
        lin.flags.writeable = False
        object.__setattr__(self, "linear", lin)

    @property
    def grid(self) -> Grid:
        return self.periodic.grid

    @classmethod
    def zeros(cls, grid: Grid) -> "DisplacementField":
        return cls(np.zeros((2, 2)), VectorField2.zeros(grid))

    @classmethod
    def from_periodic(cls, c1: ScalarField, c2: ScalarField) -> "DisplacementField":
        return cls(np.zeros((2, 2)), VectorField2(c1, c2))

    def __add__(self, other: "DisplacementField") -> "DisplacementField":
        return DisplacementField(self.linear + other.linear, self.periodic + other.periodic)

    def __sub__(self, other: "DisplacementField") -> "DisplacementField":
        return DisplacementField(self.linear - other.linear, self.periodic - other.periodic)

    def __neg__(self) -> "DisplacementField":
        return DisplacementField(-self.linear, -self.periodic)

    def __mul__(self, s: float) -> "DisplacementField":
        if not np.isscalar(s):
            raise TypeError("displacements scale by real numbers only")
        return DisplacementField(self.linear * s, self.periodic * s)

    __rmul__ = __mul__

    def cell_values(self) -> tuple[np.ndarray, np.ndarray]:
        """Samples of both components on the fundamental cell [0, 1)^2."""
        x1, x2 = self.grid.x1, self.grid.x2
        L = self.linear
        w1 = L[0, 0] * x1 + L[0, 1] * x2 + self.periodic.c1.values
        w2 = L[1, 0] * x1 + L[1, 1] * x2 + self.periodic.c2.values
        return w1, w2


# --- differential operators ------------------------------------------------

def partial(f: ScalarField, orders: tuple[int, int]) -> ScalarField:
    """Mixed derivative d1^j d2^l f of the trigonometric interpolant."""
    j, l = (int(o) for o in orders)
    if j < 0 or l < 0:
        raise ValueError("derivative orders must be nonnegative")
    if j + l > MAX_DERIVATIVE_ORDER:
        raise ValueError(f"total derivative order {j + l} exceeds {MAX_DERIVATIVE_ORDER}")
    if j == 0 and l == 0:
        return f
    n = f.grid.n
    return ScalarField.from_spectrum(f.grid, _apply_symbol(f.spectrum, n, (j, l)))


def spectral_derivative(f: ScalarField, axis: int, order: int = 1) -> ScalarField:
    """Derivative of ``order`` along ``axis`` (1 for x1, 2 for x2)."""
    if axis not in (1, 2):
        raise ValueError("axis must be 1 or 2")
    if order < 0:
        raise ValueError("derivative order must be nonnegative")
    return partial(f, (order, 0) if axis == 1 else (0, order))


def gradient(f: ScalarField) -> VectorField2:
    return VectorField2(partial(f, (1, 0)), partial(f, (0, 1)))


def hessian(f: ScalarField) -> SymMatrixField:
    return SymMatrixField(partial(f, (2, 0)), partial(f, (1, 1)), partial(f, (0, 2)))


def laplacian(f: ScalarField) -> ScalarField:
    n = f.grid.n
    spec = _apply_symbol(f.spectrum, n, (2, 0)) + _apply_symbol(f.spectrum, n, (0, 2))
    return ScalarField.from_spectrum(f.grid, spec)


def sym_gradient(w: DisplacementField) -> SymMatrixField:
    """sym(grad w) = sym L + sym(grad of the periodic part)."""
    L = w.linear
    p1, p2 = w.periodic.c1, w.periodic.c2
    n = w.grid.n
    m11 = partial(p1, (1, 0)) + L[0, 0]
    m22 = partial(p2, (0, 1)) + L[1, 1]
    off = _apply_symbol(p1.spectrum, n, (0, 1)) + _apply_symbol(p2.spectrum, n, (1, 0))
    m12 = ScalarField.from_spectrum(w.grid, 0.5 * off) + 0.5 * (L[0, 1] + L[1, 0])
    return SymMatrixField(m11, m12, m22)


def curl_curl(A: SymMatrixField) -> ScalarField:
    """d11 A22 - 2 d12 A12 + d22 A11, assembled in one spectral pass."""
    n = A.grid.n
    spec = (_apply_symbol(A.m22.spectrum, n, (2, 0))
            - 2.0 * _apply_symbol(A.m12.spectrum, n, (1, 1))
            + _apply_symbol(A.m11.spectrum, n, (0, 2)))
    return ScalarField.from_spectrum(A.grid, spec)


def sym_outer(p: VectorField2, q: VectorField2) -> SymMatrixField:
    """p ⊙ q = ½(p⊗q + q⊗p)."""
    return SymMatrixField(p.c1 * q.c1, 0.5 * (p.c1 * q.c2 + p.c2 * q.c1), p.c2 * q.c2)


def half_outer(p: VectorField2) -> SymMatrixField:
    """½ p⊗p."""
    return SymMatrixField(0.5 * (p.c1 * p.c1), 0.5 * (p.c1 * p.c2), 0.5 * (p.c2 * p.c2))


def very_weak_hessian(v: ScalarField) -> ScalarField:
    """d12(v1 v2) - ½ d22(v1²) - ½ d11(v2²) with v_i = d_i v."""
    n = v.grid.n
    v1 = partial(v, (1, 0))
    v2 = partial(v, (0, 1))
    spec = (_apply_symbol((v1 * v2).spectrum, n, (1, 1))
            - 0.5 * _apply_symbol((v1 * v1).spectrum, n, (0, 2))
            - 0.5 * _apply_symbol((v2 * v2).spectrum, n, (2, 0)))
    return ScalarField.from_spectrum(v.grid, spec)
