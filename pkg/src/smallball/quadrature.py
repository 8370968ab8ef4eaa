"""Numerical oracles: radial quadrature, Sobolev norms, Monte Carlo small-ball estimates."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, special, stats

from . import _rng
from .bounds import SobolevParams, gamma_tail_bound
from .errors import ConvergenceError, ParameterError
from .geometry import DEFAULT_CONFIDENCE, QuasiNormSpec, sphere_area
from .models import VectorModel, abs_charfun_profile, charfun, sample


@dataclass(frozen=True)
class McEstimate:
    p_hat: float
    ci_low: float
    ci_high: float
    samples: int
    hits: int
    seed: int
    confidence: float

    def to_dict(self) -> dict:
        return {
            "p_hat": self.p_hat, "ci_low": self.ci_low, "ci_high": self.ci_high,
            "samples": self.samples, "hits": self.hits, "seed": self.seed,
            "confidence": self.confidence, "chunk_size": _rng.CHUNK_SIZE,
        }


@dataclass(frozen=True)
class QuadResult:
    value: float
    abs_error_estimate: float
    evaluations: int

    def to_dict(self) -> dict:
        return {"value": self.value, "abs_error_estimate": self.abs_error_estimate, "evaluations": self.evaluations}


def binomial_ci(hits, samples, confidence: float = DEFAULT_CONFIDENCE):
    """Clopper-Pearson interval from beta quantiles.

    Works elementwise on arrays; returns ``(low, high)``.
    """
    if not 0 < confidence < 1:
        raise ParameterError(f"confidence must lie in (0,1), got {confidence}")
    k = np.asarray(hits)
    m = np.asarray(samples)
    if np.any(m < 1):
        raise ParameterError("samples must be >= 1")
    if np.any(k < 0) or np.any(k > m):
        raise ParameterError(f"need 0 <= hits <= samples, got hits={hits}, samples={samples}")
    a = 0.5 * (1.0 - confidence)
    with np.errstate(invalid="ignore"):
        lo = np.where(k == 0, 0.0, stats.beta.ppf(a, np.maximum(k, 1), m - k + 1))
        hi = np.where(k == m, 1.0, stats.beta.ppf(1 - a, k + 1, np.maximum(m - k, 1)))
    if lo.ndim == 0:
        return float(lo), float(hi)
    return lo, hi


def _estimate_from_norms(norms: np.ndarray, t: float, seed: int, confidence: float) -> McEstimate:
    hits = int(np.count_nonzero(norms <= t))
    m = len(norms)
    lo, hi = binomial_ci(hits, m, confidence)
    p_hat = hits / m
    return McEstimate(p_hat, min(lo, p_hat), max(hi, p_hat), m, hits, int(seed), float(confidence))


def sample_norms(model: VectorModel, norm: QuasiNormSpec, samples: int, seed: int, workers: int = 1) -> np.ndarray:
    if norm.n != model.n:
        raise ParameterError(f"norm dimension {norm.n} does not match model dimension {model.n}")
    x = sample(model, samples, seed, workers)
    return np.atleast_1d(norm.norm(x))


def estimate_small_ball(model: VectorModel, norm: QuasiNormSpec, t: float, samples: int = 10**6,
                        seed: int = 0, confidence: float = DEFAULT_CONFIDENCE) -> McEstimate:
    """Monte Carlo estimate of P(||X|| <= t) with an exact binomial interval."""
    return estimate_small_ball_grid(model, norm, [t], samples, seed, confidence)[0]


def estimate_small_ball_grid(model: VectorModel, norm: QuasiNormSpec, t_grid: Sequence[float],
                             samples: int = 10**6, seed: int = 0,
                             confidence: float = DEFAULT_CONFIDENCE, workers: int = 1):
    """Estimates for several radii from one shared sample (monotone in t)."""
    if int(samples) < 1:
        raise ParameterError("samples must be >= 1")
    r = sample_norms(model, norm, int(samples), seed, workers)
    return [_estimate_from_norms(r, float(t), seed, confidence) for t in t_grid]


def gaussian_moment_tail(m: float, c: float, R: float) -> float:
    """Upper bound for int_R^inf r^m exp(-c r^2) dr (inf when no bound applies yet)."""
    a = 0.5 * (m + 1.0)
    x = c * R * R
    if a <= 0 or x <= 0:
        return math.inf
    pref = 0.5 * c ** (-a)
    if a >= 1.0:
        if x < a:
            return math.inf
        return pref * gamma_tail_bound(x, a)
    # u^(a-1) <= x^(a-1) on [x, inf)
    return pref * x ** (a - 1.0) * math.exp(-x)


def radial_integral(
    g: Callable[[float], float],
    n: int,
    breakpoints: Iterable[float] = (),
    envelope: Optional[Tuple[float, float, float]] = None,
    epsrel: float = 1e-12,
    limit: int = 1000,
) -> QuadResult:
    """|S^{n-1}| * int_0^inf r^(n-1) g(r) dr.

    ``envelope=(K, k, c)`` promises |g(r)| <= K r^k exp(-c r^2) for r >= 1;
    the domain is then truncated where the tail bound drops below 1e-12 of
    the running value.  Without an envelope the integral runs to infinity.
    """
    n = int(n)
    area = sphere_area(n)

    def f(r):
        return r ** (n - 1) * g(r)

    pts = sorted(float(b) for b in breakpoints if b > 0)
    evals = 0
    if envelope is None:
        edges = [0.0] + pts
        total, err = 0.0, 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            v, e, info = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=epsrel, limit=limit, full_output=1)[:3]
            total, err, evals = total + v, err + e, evals + info["neval"]
        v, e, info = integrate.quad(f, edges[-1], np.inf, epsabs=0.0, epsrel=epsrel, limit=limit, full_output=1)[:3]
        total, err, evals = total + v, err + e, evals + info["neval"]
        tail = 0.0
    else:
        K, k, c = envelope
        R = max([1.0] + pts)
        R = max(R, math.sqrt(max(1.0, (k + n) / c)))
        total, err, evals, start = 0.0, 0.0, 0, 0.0
        edges = [0.0] + pts
        for _ in range(200):
            cuts = [b for b in edges if b < R] + [R]
            segs = list(zip([start] + cuts[:-1], cuts)) if start == 0.0 else [(start, R)]
            for lo, hi in segs:
                if hi <= lo:
                    continue
                v, e, info = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=epsrel, limit=limit, full_output=1)[:3]
                total, err, evals = total + v, err + e, evals + info["neval"]
            start = R
            tail = K * gaussian_moment_tail(k + n - 1, c, R)
            if tail <= 1e-12 * abs(total) or (total == 0.0 and tail == 0.0):
                break
            R *= 1.5
        else:
            raise ConvergenceError("radial truncation did not converge")
        err += tail
    value = area * total
    abs_err = area * err
    if abs_err > max(1e-10, 1e-8 * abs(value)):
        raise ConvergenceError(f"radial quadrature error estimate {abs_err:.3g} exceeds tolerance (value {value:.6g})")
    return QuadResult(value, abs_err, evals)


def weighted_charfun_integral(model: VectorModel, t: float, samples: int = 10**6, seed: int = 0,
                              confidence: float = DEFAULT_CONFIDENCE) -> QuadResult:
    """int |phi_X(xi)| exp(-t^2 |xi|^2 / 2) d xi.

    Radial quadrature when |phi_X| is radial; otherwise Gaussian importance
    sampling (xi ~ N(0, t^-2 I)) with the CI half-width as error estimate.
    """
    t = float(t)
    if not t > 0:
        raise ParameterError(f"t must be > 0, got {t}")
    prof = abs_charfun_profile(model)
    n = model.n
    if prof is not None:
        c = 0.5 * t * t
        return radial_integral(lambda r: prof(r) * math.exp(-c * r * r), n, envelope=(1.0, 0.0, c))
    xi = _rng.standard_normal(seed, "weighted-charfun", int(samples), n) / t
    vals = np.abs(charfun(model, xi))
    scale = (2 * math.pi / (t * t)) ** (n / 2)
    z = stats.norm.ppf(0.5 + 0.5 * confidence)
    half = z * vals.std(ddof=1) / math.sqrt(len(vals)) if len(vals) > 1 else math.inf
    return QuadResult(scale * float(vals.mean()), scale * half, len(vals))


def charfun_l1_norm(model: VectorModel) -> float:
    """int |phi_X|; inf when |phi_X| is not radial-integrable (atoms, lattice laws)."""
    prof = abs_charfun_profile(model)
    if prof is None or model.is_point_mass:
        return math.inf
    v = model.gaussian_variance
    return radial_integral(lambda r: prof(r), model.n, envelope=(1.0, 0.0, 0.5 * v)).value


def _gauss_legendre(lo: float, hi: float, panels: int, order: int = 32):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    return (mid + half * x).ravel(), (half * w).ravel()


class _RadialInverse:
    """h(r) = F^-1[(1+|xi|^2)^(beta/2) exp(-|xi|^2/2)](r) with F^-1 g(x) = (2pi)^-n int e^{-i<x,xi>} g.

    Hankel form: h(r) = (2pi)^(-n/2) r^(1-n/2) int_0^inf g(rho) J_{n/2-1}(r rho) rho^(n/2) d rho.
    """

    def __init__(self, n: int, beta: float):
        self.n, self.beta = n, beta
        # g(rho) < 1e-20 beyond rho_max
        rho_max = 1.0
        while (0.5 * beta * math.log1p(rho_max**2) - 0.5 * rho_max**2) > math.log(1e-20):
            rho_max += 0.5
        self.rho, w = _gauss_legendre(0.0, rho_max, panels=max(8, int(4 * rho_max)))
        self.gw = w * (1 + self.rho**2) ** (beta / 2) * np.exp(-0.5 * self.rho**2)
        self.nu = n / 2 - 1

    def __call__(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        n, nu = self.n, self.nu
        out = np.empty_like(r)
        small = r < 1e-8
        if np.any(small):
            # r^{-nu} J_nu(r rho) -> (rho/2)^nu / Gamma(nu+1)
            k = (self.rho / 2) ** nu / special.gamma(nu + 1) * self.rho ** (n / 2)
            out[small] = (2 * math.pi) ** (-n / 2) * np.dot(self.gw, k)
        big = ~small
        if np.any(big):
            rb = r[big][:, None]
            if n == 1:
                # r^{1/2} J_{-1/2}(r rho) rho^{1/2} = sqrt(2/pi) cos(r rho)
                ker = math.sqrt(2 / math.pi) * np.cos(rb * self.rho)
            elif n == 3:
                ker = math.sqrt(2 / math.pi) * np.sin(rb * self.rho) * self.rho / rb
            else:
                ker = rb ** (1 - n / 2) * special.jv(nu, rb * self.rho) * self.rho ** (n / 2)
            out[big] = (2 * math.pi) ** (-n / 2) * (ker @ self.gw)
        return out


def sobolev_norm_numeric(n: int, params: SobolevParams) -> QuadResult:
    """||F^-1((1+|xi|^2)^(beta/2) f_hat)||_{L_p} for the standard Gaussian density on R^n.

    Fourier convention: f_hat(xi) = int e^{i<xi,x>} f(x) dx, so f_hat = phi_X.
    """
    n = int(n)
    if n < 1:
        raise ParameterError("n must be >= 1")
    h = _RadialInverse(n, params.beta)
    p = params.p
    h0 = abs(float(h(0.0)[0]))
    # truncate where |h| has fallen below 1e-15 h(0) for good
    grid = np.linspace(0.0, 80.0, 1601)
    hv = np.abs(h(grid))
    above = np.nonzero(hv > 1e-15 * h0)[0]
    r_max = float(grid[min(above[-1] + 2, len(grid) - 1)])
    # split at sign changes of h so |h|^p is smooth on each piece
    hs = h(grid[grid <= r_max])
    sign = np.sign(np.where(np.abs(hs) > 1e-12 * h0, hs, 0.0))
    flips = np.nonzero(sign[1:] * sign[:-1] < 0)[0]
    breaks = []
    for i in flips:
        a, b = grid[i], grid[i + 1]
        try:
            from scipy.optimize import brentq

            breaks.append(brentq(lambda r: float(h(r)[0]), a, b, xtol=1e-14))
        except ValueError:
            breaks.append(0.5 * (a + b))
    edges = [0.0] + breaks + [r_max]
    total, err, evals = 0.0, 0.0, 0
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, e, info = integrate.quad(lambda r: r ** (n - 1) * abs(float(h(r)[0])) ** p, lo, hi,
                                    epsabs=0.0, epsrel=1e-11, limit=500, full_output=1)[:3]
        total, err, evals = total + v, err + e, evals + info["neval"]
    area = sphere_area(n)
    integral = area * total
    value = integral ** (1 / p)
    # d(I^(1/p)) = (1/p) I^(1/p - 1) dI
    abs_err = value / (p * integral) * area * err if integral > 0 else area * err
    if abs_err > max(1e-10, 1e-7 * value):
        warnings.warn(f"Sobolev norm error estimate {abs_err:.3g} above target", RuntimeWarning)
    return QuadResult(value, abs_err, evals)


def sobolev_norm_parseval(n: int, beta: float) -> QuadResult:
    """(2pi)^(-n/2) ||(1+|xi|^2)^(beta/2) exp(-|xi|^2/2)||_{L_2}; equals the p = 2 Sobolev norm."""
    q = radial_integral(lambda r: (1 + r * r) ** beta * math.exp(-r * r), n,
                        envelope=(2.0 ** max(beta, 0.0), 2 * max(beta, 0.0), 1.0))
    value = (2 * math.pi) ** (-n / 2) * math.sqrt(q.value)
    return QuadResult(value, value * 0.5 * q.abs_error_estimate / q.value, q.evaluations)
