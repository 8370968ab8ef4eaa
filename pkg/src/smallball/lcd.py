"""Lattice distance, least common denominator search and the level-set oracles.

The LCD search is a branch-and-bound over cubic cells.  With
``g(theta) = min(gamma |A theta|, alpha) - d(A theta, Z^N)`` a point is a
member iff ``g > 0``; ``g`` is ``(1 + gamma) sigma_max(A)``-Lipschitz, so a
cell whose centre satisfies ``g(c) + L * half_diagonal <= 0`` holds no member.
Cells inside the ball where every |<a_i, theta>| <= 1/2 are discarded exactly
(the nearest lattice point there is 0, and d = |A theta| >= gamma |A theta|).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from . import _rng
from .errors import CapabilityError, DimensionError, ParameterError
from .geometry import DEFAULT_CONFIDENCE, GaussianMeasureEstimate

MAX_SEARCH_DIM = 3


def dist_to_lattice(v):
    """Euclidean distance from v to Z^N (along the last axis)."""
    v = np.asarray(v, dtype=float)
    r = v - np.rint(v)
    out = np.sqrt(np.sum(r * r, axis=-1))
    return float(out) if np.ndim(out) == 0 else out


def _as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[None, :]
    if A.ndim != 2 or A.size == 0:
        raise DimensionError(f"A must be a non-empty N x n matrix, got shape {A.shape}")
    return A


def f_theta(z: float, t: float, A, theta):
    """d((z / t) A theta, Z^N); ``theta`` may be a batch of rows."""
    A = _as_matrix(A)
    z, t = float(z), float(t)
    if z < 1 / (2 * math.pi) * (1 - 1e-12):
        raise ParameterError(f"z must be >= 1/(2 pi), got {z}")
    if not t > 0:
        raise ParameterError(f"t must be > 0, got {t}")
    theta = np.asarray(theta, dtype=float)
    if theta.shape[-1] != A.shape[1]:
        raise DimensionError(f"theta has dimension {theta.shape[-1]}, A has {A.shape[1]} columns")
    return dist_to_lattice((z / t) * (theta @ A.T))


@dataclass(frozen=True)
class LcdParams:
    alpha: float
    gamma: float

    def __post_init__(self):
        if not float(self.alpha) > 0:
            raise ParameterError(f"alpha must be > 0, got {self.alpha}")
        if not 0 < float(self.gamma) < 1:
            raise ParameterError(f"gamma must lie in (0,1), got {self.gamma}")


@dataclass(frozen=True)
class LcdResult:
    lower_certified: float
    upper_witness: float
    witness_theta: Optional[np.ndarray]
    resolution: float

    def to_dict(self) -> dict:
        up = self.upper_witness
        return {
            "lower_certified": self.lower_certified,
            "upper_witness": "inf" if math.isinf(up) else up,
            "witness_theta": None if self.witness_theta is None else [float(x) for x in self.witness_theta],
            "resolution": self.resolution,
        }


def lcd_margin(A, params: LcdParams, theta):
    """min(gamma |A theta|, alpha) - d(A theta, Z^N); membership is margin > 0."""
    A = _as_matrix(A)
    v = np.asarray(theta, dtype=float) @ A.T
    return np.minimum(params.gamma * np.linalg.norm(v, axis=-1), params.alpha) - dist_to_lattice(v)


def is_member(A, params: LcdParams, theta) -> bool:
    return bool(lcd_margin(A, params, theta) > 0)


def check_lower_isometry(A) -> float:
    """Smallest singular value; warns when |A theta| >= |theta| fails."""
    s = float(np.linalg.svd(_as_matrix(A), compute_uv=False).min())
    if s < 1.0:
        warnings.warn(f"smallest singular value {s:.4g} < 1: the Littlewood-Offord hypothesis fails", RuntimeWarning)
    return s


def _refine_along_ray(A, params, theta, s_lo: float, iters: int = 80) -> np.ndarray:
    # invariant: s_lo * theta is not a member, s_hi * theta is
    s_hi = 1.0
    for _ in range(iters):
        mid = 0.5 * (s_lo + s_hi)
        if lcd_margin(A, params, mid * theta) > 0:
            s_hi = mid
        else:
            s_lo = mid
    return s_hi * theta


def lcd_search(A, params: LcdParams, radius_max: float, grid_step: float, max_cells: int = 20_000_000) -> LcdResult:
    """Certified bracket for LCD_{alpha,gamma}(A) inside the ball of radius ``radius_max``.

    Cells are halved from one box covering the ball down to side ``grid_step``.
    ``lower_certified`` is the smallest distance from the origin to a cell
    that could not be cleared; ``upper_witness`` is the norm of a verified
    member (refined by bisection along its ray), or inf when none exists.
    """
    A = _as_matrix(A)
    R, h = float(radius_max), float(grid_step)
    if not R > 0:
        raise ParameterError(f"radius_max must be > 0, got {radius_max}")
    if not h > 0:
        raise ParameterError(f"grid_step must be > 0, got {grid_step}")
    n = A.shape[1]
    if n > MAX_SEARCH_DIM:
        raise CapabilityError(f"certified LCD search supports n <= {MAX_SEARCH_DIM}, got n = {n}")

    sigma_max = float(np.linalg.svd(A, compute_uv=False).max())
    lip = (1.0 + params.gamma) * sigma_max
    row_max = float(np.linalg.norm(A, axis=1).max())
    r_excl = 0.5 / row_max if row_max > 0 else math.inf

    levels = max(0, math.ceil(math.log2(2 * R / h)))
    w = h * 2**levels
    centers = np.zeros((1, n))
    offsets = np.array(np.meshgrid(*[[-1.0, 1.0]] * n, indexing="ij")).reshape(n, -1).T
    upper, best = math.inf, None
    while True:
        half_diag = 0.5 * w * math.sqrt(n)
        r = np.linalg.norm(centers, axis=1)
        dmin = np.maximum(r - half_diag, 0.0)
        keep = (dmin <= R) & (r + half_diag > r_excl)
        centers, r, dmin = centers[keep], r[keep], dmin[keep]
        m = lcd_margin(A, params, centers)
        hit = (m > 0) & (r <= R)
        if np.any(hit):
            i = int(np.argmin(np.where(hit, r, np.inf)))
            if r[i] < upper:
                upper, best = float(r[i]), centers[i].copy()
        keep = (m + lip * half_diag > 0) & (dmin < upper)
        centers, dmin = centers[keep], dmin[keep]
        if w <= h * (1 + 1e-12) or len(centers) == 0:
            break
        if len(centers) * 2**n > max_cells:
            raise CapabilityError(f"LCD search exceeded {max_cells} cells; coarsen grid_step or shrink radius_max")
        centers = (centers[:, None, :] + 0.25 * w * offsets[None, :, :]).reshape(-1, n)
        w *= 0.5

    if len(centers):
        lower = float(dmin.min())
    else:
        lower = upper if math.isfinite(upper) else R
    if best is not None:
        s0 = min(r_excl / upper, 1.0) if math.isfinite(r_excl) else 0.0
        best = _refine_along_ray(A, params, best, s0)
        if not is_member(A, params, best):  # pragma: no cover - bisection keeps s_hi a member
            raise RuntimeError("refined witness lost membership")
        upper = float(np.linalg.norm(best))
    lower = min(lower, upper)
    return LcdResult(lower, upper, best, h)


def _gaussian_batch(n: int, samples: int, seed: int) -> np.ndarray:
    return _rng.standard_normal(seed, f"level-set/{n}", int(samples), n)


def gamma_Ts_curve(A, z: float, t: float, s_values: Sequence[float], samples: int = 10**5,
                   seed: int = 0, confidence: float = DEFAULT_CONFIDENCE) -> List[GaussianMeasureEstimate]:
    """gamma_n({theta : f(theta) <= s}) for each s, from one shared Gaussian batch."""
    from .quadrature import binomial_ci

    A = _as_matrix(A)
    if int(samples) < 1:
        raise ParameterError("samples must be >= 1")
    theta = _gaussian_batch(A.shape[1], samples, seed)
    f = f_theta(z, t, A, theta)
    out = []
    for s in s_values:
        s = float(s)
        if s < 0:
            raise ParameterError(f"s must be >= 0, got {s}")
        hits = int(np.count_nonzero(f <= s))
        lo, hi = binomial_ci(hits, len(f), confidence)
        out.append(GaussianMeasureEstimate(hits / len(f), "monte-carlo", (lo, hi), len(f)))
    return out


def gamma_Ts_estimate(A, z: float, t: float, s: float, samples: int = 10**5, seed: int = 0,
                      confidence: float = DEFAULT_CONFIDENCE) -> GaussianMeasureEstimate:
    """Monte Carlo Gaussian measure of the level set T_s = {f <= s}."""
    return gamma_Ts_curve(A, z, t, [s], samples, seed, confidence)[0]


def corollary_bound(C: float, t: float, s: float, gamma: float, n: int) -> float:
    """(2 C t s / (gamma sqrt n))^n."""
    return (2 * C * t * s / (gamma * math.sqrt(n))) ** n


@dataclass(frozen=True)
class CorollaryFit:
    C: float
    points: list

    def to_dict(self) -> dict:
        return {"C": self.C, "points": self.points}


def fit_corollary_constant(A, z_values: Sequence[float], t: float, s_values: Sequence[float], gamma: float,
                           alpha: float = math.inf, samples: int = 10**5, seed: int = 0,
                           confidence: float = DEFAULT_CONFIDENCE) -> CorollaryFit:
    """Smallest C with ci_high(gamma_n(T_s)) <= (2 C t s / (gamma sqrt n))^n on the grid.

    Only grid points inside the corollary's range (4 t s <= gamma sqrt n and
    s <= alpha / 2) are used.
    """
    A = _as_matrix(A)
    n = A.shape[1]
    C, pts = 0.0, []
    for z in z_values:
        usable = [s for s in s_values if 0 < s <= alpha / 2 and 4 * t * s <= gamma * math.sqrt(n)]
        if not usable:
            continue
        for s, est in zip(usable, gamma_Ts_curve(A, z, t, usable, samples, seed, confidence)):
            need = gamma * math.sqrt(n) * est.ci[1] ** (1 / n) / (2 * t * s)
            pts.append({"z": float(z), "s": float(s), "p_hat": est.value, "ci_high": est.ci[1], "C_needed": need})
            C = max(C, need)
    return CorollaryFit(C, pts)


def lo_rhs_values(A, t: float, b: float, z_grid: Sequence[float], samples: int = 10**5, seed: int = 0) -> List[float]:
    """E exp(-4 b f(Theta)^2), Theta ~ N(0, I_n), for every z in ``z_grid``."""
    A = _as_matrix(A)
    if not 0 < float(b) < 1:
        raise ParameterError(f"b must lie in (0,1), got {b}")
    if len(z_grid) == 0:
        raise ParameterError("z_grid must be non-empty")
    theta = _gaussian_batch(A.shape[1], samples, seed)
    return [float(np.mean(np.exp(-4 * b * f_theta(z, t, A, theta) ** 2))) for z in z_grid]


def lo_rhs_integral(A, t: float, b: float, z_grid: Sequence[float], samples: int = 10**5, seed: int = 0) -> float:
    """max over z of (2 pi)^(-n/2) int exp(-4 b f(theta)^2 - |theta|^2/2) d theta.

    A finite ``z_grid`` only lower-bounds the supremum over z >= 1/(2 pi).
    """
    return max(lo_rhs_values(A, t, b, z_grid, samples, seed))


def integer_structure_bound(volK: float, gammaK: float, C_K: float, n: int, rhs: float,
                            gaussian_normalization: bool = True) -> float:
    """(|K| / gamma_n(K)) (C_K / pi)^n * int exp(-4 b f^2 - |theta|^2 / 2) d theta.

    ``rhs`` is the Gaussian expectation returned by :func:`lo_rhs_integral`;
    the Lebesgue integral is (2 pi)^(n/2) times it.  Pass
    ``gaussian_normalization=False`` to drop that factor.
    """
    scale = (2 * math.pi) ** (n / 2) if gaussian_normalization else 1.0
    return volK / gammaK * (C_K / math.pi) ** n * scale * rhs
