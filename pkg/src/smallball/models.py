"""Random vectors together with their characteristic functions."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _rng
from .errors import DimensionError, NoValidSpreadError, ParameterError


@dataclass(frozen=True, eq=False)
class AtomLaw:
    """Law of one coefficient delta_k in X = sum_k delta_k a_k.

    ``kind`` is ``"two-point"`` (uniform on {-a, +a}), ``"uniform"`` (uniform
    on [c, d]) or ``"custom"``.
    """

    kind: str
    a: float = 0.0
    c: float = 0.0
    d: float = 0.0
    sampler: Optional[Callable[[np.random.Generator, tuple], np.ndarray]] = None
    charfun_1d: Optional[Callable[[np.ndarray], np.ndarray]] = None
    symmetric_law: bool = False

    @property
    def symmetric(self) -> bool:
        if self.kind == "two-point":
            return True
        if self.kind == "uniform":
            return self.c == -self.d
        return self.symmetric_law

    def charfun(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "two-point":
            return np.cos(self.a * s)
        if self.kind == "uniform":
            h = 0.5 * (self.d - self.c)
            mid = 0.5 * (self.c + self.d)
            core = np.sinc(s * h / math.pi)
            if mid == 0.0:
                return core
            return np.exp(1j * mid * s) * core
        return np.asarray(self.charfun_1d(s))

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        if self.kind == "two-point":
            return self.a * (2.0 * rng.integers(0, 2, size=shape) - 1.0)
        if self.kind == "uniform":
            return rng.uniform(self.c, self.d, size=shape)
        return np.asarray(self.sampler(rng, shape), dtype=float)

    def to_dict(self) -> dict:
        if self.kind == "two-point":
            return {"kind": "two-point", "a": self.a}
        if self.kind == "uniform":
            return {"kind": "uniform", "c": self.c, "d": self.d}
        raise ParameterError("custom atom laws cannot be serialized")

    @classmethod
    def from_dict(cls, d: dict) -> "AtomLaw":
        kind = d.get("kind")
        if kind == "two-point":
            return two_point(float(d["a"]))
        if kind in ("uniform", "uniform-interval"):
            return uniform_interval(float(d["c"]), float(d["d"]))
        raise ParameterError(f"unknown atom law {kind!r}")


def two_point(a: float) -> AtomLaw:
    a = float(a)
    if not a > 0:
        raise ParameterError(f"two-point atom needs a > 0, got {a}")
    return AtomLaw("two-point", a=a)


def uniform_interval(c: float, d: float) -> AtomLaw:
    c, d = float(c), float(d)
    if not d > c:
        raise ParameterError(f"uniform interval needs c < d, got [{c}, {d}]")
    return AtomLaw("uniform", c=c, d=d)


def custom_law(sampler, charfun_1d, symmetric: bool = False) -> AtomLaw:
    return AtomLaw("custom", sampler=sampler, charfun_1d=charfun_1d, symmetric_law=symmetric)


def spread_parameter(law: AtomLaw) -> float:
    """Largest b with sup_x P(|delta - x| <= 1) <= 1 - b."""
    if law.kind == "two-point":
        # a window of length 2 catches both atoms iff their gap 2a is <= 2
        top = 1.0 if law.a <= 1.0 else 0.5
    elif law.kind == "uniform":
        width = law.d - law.c
        top = min(2.0, width) / width
    else:
        raise ParameterError("spread parameter is only computable for two-point and uniform laws")
    b = 1.0 - top
    if not b > 0:
        raise NoValidSpreadError(
            f"{law.kind} law has sup_x P(|delta - x| <= 1) = 1; no b in (0, 1) exists"
        )
    return b


@dataclass(frozen=True, eq=False)
class VectorModel:
    """Distribution of a random vector in R^n.

    Build instances with :func:`standard_gaussian`, :func:`smoothed`,
    :func:`weighted_sum` or :func:`point_mass`.
    """

    kind: str
    n: int
    base: Optional["VectorModel"] = None
    t: float = 0.0
    matrix: Optional[np.ndarray] = None
    law: Optional[AtomLaw] = None

    @property
    def is_point_mass(self) -> bool:
        return self.kind == "weighted-sum" and not np.any(self.matrix)

    @property
    def is_gaussian(self) -> bool:
        """True for centered isotropic Gaussians (possibly smoothed)."""
        if self.kind == "standard-gaussian":
            return True
        return self.kind == "smoothed" and self.base.is_gaussian

    @property
    def gaussian_variance(self) -> Optional[float]:
        if self.kind == "standard-gaussian":
            return 1.0
        if self.kind == "smoothed":
            v = self.base.gaussian_variance
            if v is not None:
                return v + self.t * self.t
            if self.base.is_point_mass:
                return self.t * self.t
        return None

    def to_dict(self) -> dict:
        if self.kind == "standard-gaussian":
            return {"kind": "standard-gaussian", "n": self.n}
        if self.kind == "smoothed":
            return {"kind": "smoothed", "t": self.t, "base": self.base.to_dict()}
        return {"kind": "weighted-sum", "matrix": self.matrix.tolist(), "law": self.law.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "VectorModel":
        kind = d.get("kind")
        if kind == "standard-gaussian":
            return standard_gaussian(int(d["n"]))
        if kind == "smoothed":
            return smoothed(cls.from_dict(d["base"]), float(d["t"]))
        if kind == "weighted-sum":
            return weighted_sum(np.asarray(d["matrix"], dtype=float), AtomLaw.from_dict(d["law"]))
        if kind == "point-mass":
            return point_mass(int(d["n"]))
        raise ParameterError(f"unknown model kind {kind!r}")


def standard_gaussian(n: int) -> VectorModel:
    if int(n) < 1:
        raise ParameterError("dimension must be >= 1")
    return VectorModel("standard-gaussian", int(n))


def smoothed(base: VectorModel, t: float) -> VectorModel:
    """Law of base + t G with G standard Gaussian independent of base."""
    t = float(t)
    if not t > 0:
        raise ParameterError(f"smoothing scale must be > 0, got {t}")
    return VectorModel("smoothed", base.n, base=base, t=t)


def weighted_sum(matrix, law: AtomLaw) -> VectorModel:
    """X = sum_k delta_k a_k where a_k are the rows of the N x n ``matrix``."""
    A = np.array(matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise DimensionError(f"matrix must be N x n with N, n >= 1, got shape {A.shape}")
    A.setflags(write=False)
    return VectorModel("weighted-sum", A.shape[1], matrix=A, law=law)


def point_mass(n: int) -> VectorModel:
    """The constant vector 0, as a weighted sum with a zero matrix."""
    return weighted_sum(np.zeros((1, int(n))), two_point(1.5))


def charfun(model: VectorModel, xi):
    """E exp(i <xi, X>); ``xi`` may be one vector or a batch of rows."""
    xi = np.asarray(xi, dtype=float)
    if xi.ndim == 0 or xi.shape[-1] != model.n:
        raise DimensionError(f"xi must have last dimension {model.n}")
    if model.kind == "standard-gaussian":
        return np.exp(-0.5 * np.sum(xi * xi, axis=-1))
    if model.kind == "smoothed":
        return charfun(model.base, xi) * np.exp(-0.5 * model.t**2 * np.sum(xi * xi, axis=-1))
    proj = xi @ model.matrix.T  # <a_k, xi> for every row k
    return np.prod(model.law.charfun(proj), axis=-1)


def abs_charfun_profile(model: VectorModel) -> Optional[Callable]:
    """|phi_X| as a function of |xi|_2 when it is radial, else None."""
    if model.kind == "standard-gaussian":
        return lambda r: np.exp(-0.5 * np.asarray(r) ** 2)
    if model.kind == "smoothed":
        inner = abs_charfun_profile(model.base)
        if inner is None:
            return None
        t2 = model.t**2
        return lambda r: inner(r) * np.exp(-0.5 * t2 * np.asarray(r) ** 2)
    if model.is_point_mass:
        return lambda r: np.ones_like(np.asarray(r, dtype=float))
    return None


def sup_density(model: VectorModel) -> Optional[float]:
    """||f_X||_inf when X has a Gaussian density, else None."""
    v = model.gaussian_variance
    if v is None:
        return None
    return (2.0 * math.pi * v) ** (-model.n / 2.0)


def _sample_chunk(model: VectorModel, rng: np.random.Generator, m: int) -> np.ndarray:
    if model.kind == "standard-gaussian":
        return rng.standard_normal((m, model.n))
    if model.kind == "smoothed":
        x = _sample_chunk(model.base, rng, m)
        return x + model.t * rng.standard_normal((m, model.n))
    deltas = model.law.sample(rng, (m, model.matrix.shape[0]))
    return deltas @ model.matrix


def sample(model: VectorModel, count: int, seed: int, workers: int = 1) -> np.ndarray:
    """``count`` i.i.d. draws as a (count, n) array; deterministic in (seed, count)."""
    if int(count) < 1:
        raise ParameterError("count must be >= 1")
    return _rng.draw(seed, "model-sample", count, lambda rng, m: _sample_chunk(model, rng, m), workers)
