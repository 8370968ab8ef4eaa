"""l_p quasi-norms and the geometric constants the bounds consume."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple, Union

import numpy as np
from scipy import special, stats

from . import _rng
from .errors import DimensionError, ParameterError, RangeError

Exponent = Union[float, int]

DEFAULT_CONFIDENCE = 0.99


def _check_exponent(p: Exponent) -> float:
    try:
        p = float(p)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"exponent p must be a positive real or inf, got {p!r}") from exc
    if not p > 0:  # also rejects nan
        raise ParameterError(f"exponent p must be > 0, got {p}")
    return p


def lp_quasinorm(x, p: Exponent, axis: int = -1):
    """(sum |x_j|^p)^(1/p) along ``axis``; max |x_j| for p = inf.

    Accepts a single vector or a batch.  The sum is formed after dividing by
    the largest entry so that small p does not overflow.
    """
    p = _check_exponent(p)
    a = np.abs(np.asarray(x, dtype=float))
    if a.ndim == 0 or a.shape[axis] == 0:
        raise DimensionError("lp_quasinorm needs a vector of dimension >= 1")
    m = a.max(axis=axis, keepdims=True)
    if math.isinf(p):
        out = np.squeeze(m, axis=axis)
    else:
        safe = np.where(m > 0, m, 1.0)
        s = np.sum((a / safe) ** p, axis=axis, keepdims=True)
        out = np.squeeze(np.where(m > 0, safe * s ** (1.0 / p), 0.0), axis=axis)
    return float(out) if out.ndim == 0 else out


def lp_ball_volume(n: int, p: Exponent) -> float:
    """Lebesgue volume of the unit l_p ball in R^n."""
    n = _check_dim(n)
    p = _check_exponent(p)
    if math.isinf(p):
        log_v = n * math.log(2.0)
    else:
        log_v = n * (math.log(2.0) + special.gammaln(1.0 + 1.0 / p)) - special.gammaln(1.0 + n / p)
    if log_v > 709.0:
        raise RangeError(f"unit-ball volume for n={n}, p={p} overflows double precision (log volume {log_v:.1f})")
    return math.exp(log_v)


def sphere_area(n: int) -> float:
    """Surface measure of the Euclidean unit sphere S^{n-1}; 2 for n = 1."""
    n = _check_dim(n)
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def quasinorm_constant_for(p: Exponent) -> float:
    p = _check_exponent(p)
    if p >= 1:
        return 1.0
    return 2.0 ** (1.0 / p - 1.0)


def _check_dim(n) -> int:
    if isinstance(n, bool) or int(n) != n or int(n) < 1:
        raise ParameterError(f"dimension n must be a positive integer, got {n!r}")
    return int(n)


@dataclass(frozen=True)
class QuasiNormSpec:
    """The l_p quasi-norm on R^n."""

    p: float
    n: int

    def __post_init__(self):
        object.__setattr__(self, "p", _check_exponent(self.p))
        object.__setattr__(self, "n", _check_dim(self.n))

    @property
    def constant(self) -> float:
        return quasinorm_constant_for(self.p)

    @property
    def volume(self) -> float:
        return lp_ball_volume(self.n, self.p)

    def norm(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n:
            raise DimensionError(f"expected vectors of dimension {self.n}, got {x.shape[-1]}")
        return lp_quasinorm(x, self.p)

    def to_dict(self) -> dict:
        return {"p": "inf" if math.isinf(self.p) else self.p, "n": self.n}

    @classmethod
    def from_dict(cls, d: dict) -> "QuasiNormSpec":
        return cls(p=float(d["p"]), n=int(d["n"]))


def quasinorm_constant(spec: QuasiNormSpec) -> float:
    """Best constant C_K in ||x+y|| <= C_K (||x|| + ||y||) for l_p."""
    return spec.constant


@dataclass(frozen=True)
class GaussianMeasureEstimate:
    value: float
    method: str
    ci: Optional[Tuple[float, float]] = None
    samples: Optional[int] = None

    @property
    def lower(self) -> float:
        """Conservative (small) value to divide by."""
        return self.ci[0] if self.ci is not None else self.value

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "method": self.method,
            "ci": list(self.ci) if self.ci is not None else None,
            "samples": self.samples,
        }


@lru_cache(maxsize=16)
def _sorted_gaussian_norms(n: int, p: float, samples: int, seed: int) -> np.ndarray:
    # One standard normal batch per (n, seed); every p reuses it.
    g = _rng.standard_normal(seed, f"gaussian-measure/{n}", samples, n)
    r = lp_quasinorm(g, p)
    r = np.sort(np.atleast_1d(r))
    r.setflags(write=False)
    return r


def gaussian_measure(
    spec: QuasiNormSpec,
    radius: float = 1.0,
    samples: int = 10**6,
    seed: int = 0,
    confidence: float = DEFAULT_CONFIDENCE,
) -> GaussianMeasureEstimate:
    """Standard Gaussian measure of ``radius * K``.

    Closed form (chi-square) for p = 2; otherwise Monte Carlo on a sample
    batch shared across radii, so the estimate is monotone in ``radius``.
    """
    radius = float(radius)
    if not radius > 0:
        raise ParameterError(f"radius must be > 0, got {radius}")
    if spec.p == 2.0:
        value = 1.0 if math.isinf(radius) else float(stats.chi2.cdf(radius * radius, spec.n))
        return GaussianMeasureEstimate(value=value, method="closed-form")
    if samples is None or int(samples) < 1:
        raise ParameterError("Monte Carlo Gaussian measure needs samples >= 1")
    from .quadrature import binomial_ci

    r = _sorted_gaussian_norms(spec.n, spec.p, int(samples), int(seed))
    hits = int(np.searchsorted(r, radius, side="right"))
    lo, hi = binomial_ci(hits, len(r), confidence)
    return GaussianMeasureEstimate(
        value=hits / len(r), method="monte-carlo", ci=(lo, hi), samples=len(r)
    )
