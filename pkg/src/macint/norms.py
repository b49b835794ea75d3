"""Discrete Hölder norms on the torus.

Values of vector and matrix fields are measured with the Euclidean
(Frobenius) norm of the target.  Seminorms are maxima of difference quotients
over a set of sample pairs, so they are lower estimates of the continuum
quantity; refining the pair set can only increase them.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import DisplacementField, ScalarField, SymMatrixField, VectorField2, partial

EXHAUSTIVE_MAX_N = 128
COARSE_SIDE = 64
LOCAL_RADIUS = 2

_SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class HolderEstimate:
    value: float
    k: int
    alpha: float
    method: str
    pair_count: int
    seminorm: float = 0.0
    ck: float = 0.0

    def __float__(self):
        return float(self.value)


def _scalar_parts(f) -> list[tuple[ScalarField, float]]:
    """Components with weights so that the weighted Euclidean norm is the target norm."""
    if isinstance(f, ScalarField):
        return [(f, 1.0)]
    if isinstance(f, VectorField2):
        return [(f.c1, 1.0), (f.c2, 1.0)]
    if isinstance(f, SymMatrixField):
        return [(f.m11, 1.0), (f.m12, _SQRT2), (f.m22, 1.0)]
    if isinstance(f, DisplacementField):
        return [(f.periodic.c1, 1.0), (f.periodic.c2, 1.0)]
    raise TypeError(f"unsupported field type {type(f).__name__}")


def _multi_indices(k: int) -> list[tuple[int, int]]:
    return [(j, k - j) for j in range(k, -1, -1)]


def _derivative_stack(f, orders: tuple[int, int]) -> np.ndarray:
    """Weighted components of d^I f stacked along axis 0 (affine part included)."""
    parts = [w * partial(c, orders).values for c, w in _scalar_parts(f)]
    if isinstance(f, DisplacementField):
        L = f.linear
        if orders == (0, 0):
            parts = list(f.cell_values())
        elif sum(orders) == 1:
            col = 0 if orders == (1, 0) else 1
            parts = [parts[0] + L[0, col], parts[1] + L[1, col]]
    return np.stack(parts)


def sup_norm(f) -> float:
    """‖f‖₀ — exact maximum of the pointwise norm over the samples."""
    stack = _derivative_stack(f, (0, 0))
    return float(np.sqrt((stack ** 2).sum(axis=0)).max())


def derivative_sup(f, j: int) -> float:
    """max over |I| = j of ‖∂^I f‖₀."""
    if j == 0:
        return sup_norm(f)
    return max(float(np.sqrt((_derivative_stack(f, I) ** 2).sum(axis=0)).max())
               for I in _multi_indices(j))


def ck_norm(f, k: int) -> float:
    """‖f‖_k = Σ_{j≤k} max_{|I|=j} ‖∂^I f‖₀."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    return sum(derivative_sup(f, j) for j in range(k + 1))


def _torus_dist(di, dj, n):
    di = np.minimum(di % n, n - di % n)
    dj = np.minimum(dj % n, n - dj % n)
    return np.hypot(di, dj) / n


def _scan_all_pairs(stack: np.ndarray, alpha: float, spacing: float) -> float:
    """Max difference quotient over every pair of a periodic m x m lattice."""
    m = stack.shape[-1]
    jj = (np.arange(m)[None, :] + np.arange(m)[:, None]) % m  # [dj, j] -> j + dj
    best = 0.0
    dj = np.arange(m)
    for di in range(m // 2 + 1):
        rolled = np.roll(stack, -di, axis=1)
        # diff[c, i, dj, j] = f(i + di, j + dj) - f(i, j)
        diff = rolled[:, :, jj] - stack[:, :, None, :]
        mag = np.sqrt((diff ** 2).sum(axis=0)).max(axis=(0, 2))
        dist = _torus_dist(di, dj, m) * (m * spacing)
        mask = dist > 0
        if np.any(mask):
            best = max(best, float((mag[mask] / dist[mask] ** alpha).max()))
    return best


def _local_displacements(radius: int) -> list[tuple[int, int]]:
    out = []
    for di in range(0, radius + 1):
        for dj in range(-radius, radius + 1):
            if di == 0 and dj <= 0:
                continue
            out.append((di, dj))
    return out


def _scan_local(stack: np.ndarray, alpha: float, radius: int) -> float:
    n = stack.shape[-1]
    best = 0.0
    for di, dj in _local_displacements(radius):
        diff = np.roll(stack, (-di, -dj), axis=(1, 2)) - stack
        mag = float(np.sqrt((diff ** 2).sum(axis=0)).max())
        best = max(best, mag / float(_torus_dist(di, dj, n)) ** alpha)
    return best


def _seminorm_of_stack(stack: np.ndarray, alpha: float, method: str, seed: int) -> tuple[float, int]:
    n = stack.shape[-1]
    if method == "exhaustive":
        npts = n * n
        return _scan_all_pairs(stack, alpha, 1.0 / n), npts * (npts - 1) // 2
    stride = max(1, n // COARSE_SIDE)
    off = np.random.default_rng(seed).integers(0, stride, size=2)
    coarse = stack[:, off[0]::stride, off[1]::stride]
    m = coarse.shape[-1]
    coarse_val = _scan_all_pairs(coarse, alpha, stride / n)
    local_val = _scan_local(stack, alpha, LOCAL_RADIUS)
    count = m * m * (m * m - 1) // 2 + n * n * len(_local_displacements(LOCAL_RADIUS))
    return max(coarse_val, local_val), count


def holder_seminorm(f, k: int, alpha: float, method: str = "auto", seed: int = 0) -> HolderEstimate:
    """[f]_{k,α} = max_{|I|=k} sup |∂^I f(x) - ∂^I f(y)| / |x - y|^α over the pair set."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k > 4:
        raise ValueError("Hölder norms are only estimated up to k = 4")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if isinstance(f, DisplacementField) and k == 0 and np.any(f.linear):
        raise ValueError("[w]_{0,α} is undefined on the torus for a nonzero affine part")
    n = f.grid.n
    if method == "auto":
        method = "exhaustive" if n <= EXHAUSTIVE_MAX_N else "subsampled"
    if method not in ("exhaustive", "subsampled"):
        raise ValueError(f"unknown method {method!r}")
    best, count = 0.0, 0
    for I in _multi_indices(k):
        stack = np.stack([w * partial(c, I).values for c, w in _scalar_parts(f)])
        val, count = _seminorm_of_stack(stack, alpha, method, seed)
        best = max(best, val)
    return HolderEstimate(value=best, k=k, alpha=alpha, method=method, pair_count=count,
                          seminorm=best, ck=0.0)


def holder_norm(f, k: int, alpha: float, method: str = "auto", seed: int = 0) -> HolderEstimate:
    """‖f‖_{k,α} = ‖f‖_k + [f]_{k,α}."""
    semi = holder_seminorm(f, k, alpha, method=method, seed=seed)
    ck = ck_norm(f, k)
    return HolderEstimate(value=ck + semi.seminorm, k=k, alpha=alpha, method=semi.method,
                          pair_count=semi.pair_count, seminorm=semi.seminorm, ck=ck)


@dataclass(frozen=True)
class InterpolationReport:
    ratio: float
    lower: float
    upper: float
    degenerate: bool


def check_interpolation(f, p: int, d: int) -> InterpolationReport:
    """Ratio [f]_p / (‖f‖₀^{1-p/d} [f]_d^{p/d}) for integer orders d > p ≥ 0."""
    if not d > p >= 0:
        raise ValueError("need d > p >= 0")
    f0 = sup_norm(f)
    fp = derivative_sup(f, p)
    fd = derivative_sup(f, d)
    upper = f0 ** (1.0 - p / d) * fd ** (p / d)
    if fd <= 1e-12 * max(1.0, f0):
        return InterpolationReport(ratio=float("nan"), lower=fp, upper=upper, degenerate=True)
    return InterpolationReport(ratio=fp / upper, lower=fp, upper=upper, degenerate=False)
