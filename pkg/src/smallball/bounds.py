"""Closed-form small-ball bounds.

Every evaluator returns a :class:`BoundReport` holding the raw value (never
clamped to 1), the regime branch that produced it, and an echo of the scalar
inputs.  The unnamed constant C'_K of the smoothed bound is realised as
C_K / pi throughout.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict

from .errors import DomainError, NotApplicableError, ParameterError
from .geometry import sphere_area

# Regime labels shared by the weight-norm lemma and the M table of the
# Sobolev bound; the i-th label of one is the i-th label of the other.
BRANCHES = (
    "pt^2<=2, n-beta*p>2",
    "pt^2<=2, 0<n-beta*p<=2",
    "pt^2<=2, n-beta*p<=0",
    "pt^2>=2, 2<=pt^2<=n-beta*p",
    "pt^2>=2, n-beta*p<=pt^2<=n",
    "pt^2>=2, n<=pt^2",
)

_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class BoundReport:
    theorem: str
    value: float
    branch: str
    inputs: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"theorem": self.theorem, "value": self.value, "branch": self.branch, "inputs": dict(self.inputs)}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


@dataclass(frozen=True)
class SobolevParams:
    """Smoothness order beta > 0 and integrability exponent p in (1, 2]."""

    beta: float
    p: float

    def __post_init__(self):
        beta, p = float(self.beta), float(self.p)
        if not beta > 0:
            raise ParameterError(f"beta must be > 0, got {beta}")
        if not (1.0 < p <= 2.0):
            raise ParameterError(f"p must be in (1,2], got {p}")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "p", p)

    @property
    def p_conjugate(self) -> float:
        return self.p / (self.p - 1.0)


def _pos(name: str, v, allow_zero: bool = False) -> float:
    try:
        v = float(v)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"{name} must be a real number, got {v!r}") from exc
    ok = v >= 0 if allow_zero else v > 0
    if not ok or math.isnan(v):
        raise ParameterError(f"{name} must be {'>= 0' if allow_zero else '> 0'}, got {v}")
    return v


def _dim(n) -> int:
    if isinstance(n, bool) or int(n) != n or int(n) < 1:
        raise ParameterError(f"n must be a positive integer, got {n!r}")
    return int(n)


def _gamma_k(g) -> float:
    g = _pos("gammaK", g)
    if g > 1:
        raise ParameterError(f"gammaK must lie in (0,1], got {g}")
    return g


def _le(a: float, b: float) -> bool:
    return a < b or math.isclose(a, b, rel_tol=_TIE_RTOL, abs_tol=_TIE_RTOL)


def _lt(a: float, b: float) -> bool:
    return a < b and not math.isclose(a, b, rel_tol=_TIE_RTOL, abs_tol=_TIE_RTOL)


def regime(params: SobolevParams, n: int, t: float) -> int:
    """Index into BRANCHES; at a tie the branch listed first wins."""
    s = params.p * t * t
    bp = params.beta * params.p
    if _le(s, 2.0):
        if _lt(bp, n - 2.0):
            return 0
        if _lt(bp, float(n)):
            return 1
        return 2
    if _le(s, n - bp):
        return 3
    if _le(s, float(n)):
        return 4
    return 5


def _adjacent(params: SobolevParams, n: int, t: float) -> list:
    """All branches whose closed condition holds (more than one only at ties)."""
    s = params.p * t * t
    bp = params.beta * params.p
    m = n - bp
    out = []
    if _le(s, 2.0):
        if _lt(bp, n - 2.0):
            out.append(0)
        if _le(n - 2.0, bp) and _lt(bp, float(n)):
            out.append(1)
        if _le(float(n), bp):
            out.append(2)
    if _le(2.0, s):
        if _le(s, m):
            out.append(3)
        if _le(m, s) and _le(s, float(n)):
            out.append(4)
        if _le(float(n), s):
            out.append(5)
    return out


def _lemma_branch(k: int, params: SobolevParams, n: int, t: float) -> float:
    s = params.p * t * t
    m = n - params.beta * params.p
    if k == 0:
        return math.gamma(m / 2) * (2 / s) ** (m / 2)
    if k == 1:
        return math.log(2 * math.e / s) * (2 / s) ** (m / 2)
    if k == 2:
        return math.log(2 * math.e / s)
    if k == 3:
        return 2 * math.exp(-s / 18) + (2 / s) ** (m / 2) * math.gamma(m / 2)
    if k == 4:
        return 3 * math.exp(-s / 18)
    return ((2 * n / s) * math.log(math.e * s / n)) ** (n / 2)


def _theorem_branch(k: int, params: SobolevParams, n: int, t: float) -> float:
    beta, p = params.beta, params.p
    pc = params.p_conjugate
    s = p * t * t
    m = n - beta * p
    S = sphere_area(n) ** (1 / p)
    if k in (0, 1):
        core = math.gamma(m / 2) if k == 0 else math.log(2 * math.e / s)
        return (
            2 ** (n / (2 * p) - beta / 2) * S * core ** (1 / p)
            * p ** (beta / 2 - n / (2 * p)) * t ** (beta + n / pc)
        )
    if k == 2:
        return S * math.log(2 * math.e / s) ** (1 / p) * t**n
    if k == 3:
        return S * (2 * math.exp(-s / 18) + (2 / s) ** (m / 2) * math.gamma(m / 2)) ** (1 / p) * t**n
    if k == 4:
        return 3 ** (1 / p) * S * math.exp(-t * t / 18) * t**n
    return S * ((2 * n / s) * math.log(math.e * s / n)) ** (n / (2 * p)) * t**n


def _evaluate(fn, name: str, params: SobolevParams, n: int, t: float, boundary_max: bool) -> BoundReport:
    if not isinstance(params, SobolevParams):
        raise ParameterError("params must be a SobolevParams")
    n = _dim(n)
    t = _pos("t", t)
    inputs = {"beta": params.beta, "p": params.p, "n": n, "t": t}
    if boundary_max:
        ks = _adjacent(params, n, t) or [regime(params, n, t)]
        vals = [fn(k, params, n, t) for k in ks]
        return BoundReport(name, max(vals), "|".join(BRANCHES[k] for k in ks), inputs)
    k = regime(params, n, t)
    return BoundReport(name, fn(k, params, n, t), BRANCHES[k], inputs)


def weight_lp_norm_bound(params: SobolevParams, n: int, t: float, boundary_max: bool = False) -> BoundReport:
    """Upper bound on ||(1+|xi|^2)^(-beta/2) exp(-t^2|xi|^2/2)||_p^p / |S^{n-1}|.

    With ``boundary_max`` every branch whose closed condition holds is
    evaluated and the largest value returned.
    """
    return _evaluate(_lemma_branch, "weight_lp_norm", params, n, t, boundary_max)


def sobolev_M(params: SobolevParams, n: int, t: float, boundary_max: bool = False) -> BoundReport:
    """The factor M(beta, p, n, t) of the Sobolev small-ball bound."""
    return _evaluate(_theorem_branch, "sobolev_M", params, n, t, boundary_max)


def fourier_l1_bound(t: float, n: int, volK: float, l1_phi: float) -> BoundReport:
    """|K| (t / 2pi)^n * int |phi_X|."""
    t, n, volK = _pos("t", t), _dim(n), _pos("volK", volK)
    l1_phi = float(l1_phi)
    if math.isinf(l1_phi):
        raise NotApplicableError(
            "the characteristic function is not integrable; use the smoothed bound instead"
        )
    l1_phi = _pos("l1_phi", l1_phi)
    value = volK * (t / (2 * math.pi)) ** n * l1_phi
    return BoundReport("fourier_l1", value, "integrable-phi", {"t": t, "n": n, "volK": volK, "l1_phi": l1_phi})


def smoothed_bound(t, n, volK, gammaK, C_K, weighted_integral) -> BoundReport:
    """(|K| / gamma_n(K)) (C_K t / pi)^n int |phi_X| exp(-t^2|xi|^2/2)."""
    t, n, volK = _pos("t", t), _dim(n), _pos("volK", volK)
    gammaK = _gamma_k(gammaK)
    C_K = _ck(C_K)
    w = _pos("weighted_integral", weighted_integral)
    value = volK / gammaK * (C_K * t / math.pi) ** n * w
    return BoundReport(
        "smoothed", value, "gaussian-smoothing",
        {"t": t, "n": n, "volK": volK, "gammaK": gammaK, "C_K": C_K, "weighted_integral": w},
    )


def _ck(C_K) -> float:
    C_K = _pos("C_K", C_K)
    if C_K < 1:
        raise ParameterError(f"C_K must be >= 1, got {C_K}")
    return C_K


def gamma_tail_bound(x: float, alpha: float) -> float:
    """2^(alpha+1) x^alpha e^(-x) / alpha, an upper bound for int_x^inf r^(alpha-1) e^(-r) dr.

    Valid for x >= alpha >= 1 only.
    """
    x, alpha = float(x), float(alpha)
    if not alpha >= 1:
        raise DomainError(f"need alpha >= 1, got alpha={alpha}")
    if not x >= alpha:
        raise DomainError(f"need x >= alpha, got x={x}, alpha={alpha}")
    return math.exp((alpha + 1) * math.log(2) + alpha * math.log(x) - x) / alpha


def sobolev_small_ball_bound(t, n, volK, gammaK, C_K, sobolev_norm, params: SobolevParams,
                             boundary_max: bool = False) -> BoundReport:
    """(C_K / pi)^n (|K| / gamma_n(K)) ||f_X||_{beta,p} M(beta, p, n, t)."""
    t, n, volK = _pos("t", t), _dim(n), _pos("volK", volK)
    gammaK = _gamma_k(gammaK)
    C_K = _ck(C_K)
    norm = _pos("sobolev_norm", sobolev_norm, allow_zero=True)
    M = sobolev_M(params, n, t, boundary_max=boundary_max)
    value = (C_K / math.pi) ** n * volK / gammaK * norm * M.value
    return BoundReport(
        "sobolev", value, M.branch,
        {"t": t, "n": n, "volK": volK, "gammaK": gammaK, "C_K": C_K, "sobolev_norm": norm,
         "beta": params.beta, "p": params.p, "M": M.value},
    )


def sup_density_bound(t, n, volK, sup_density) -> BoundReport:
    """|K| t^n ||f_X||_inf."""
    t, n, volK = _pos("t", t, allow_zero=True), _dim(n), _pos("volK", volK)
    sd = _pos("sup_density", sup_density)
    return BoundReport("sup_density", volK * t**n * sd, "bounded-density",
                       {"t": t, "n": n, "volK": volK, "sup_density": sd})


def high_smoothness_bound(t, n, volK, sobolev_norm, params: SobolevParams) -> BoundReport:
    """|S^{n-1}| (1/(beta p - n) + 1/n)^(1/p) |K| t^n ||f_X||_{beta,p}, for beta p > n."""
    t, n, volK = _pos("t", t, allow_zero=True), _dim(n), _pos("volK", volK)
    norm = _pos("sobolev_norm", sobolev_norm, allow_zero=True)
    bp = params.beta * params.p
    if not bp > n:
        raise NotApplicableError(f"needs beta*p > n, got beta*p={bp}, n={n}")
    value = sphere_area(n) * (1 / (bp - n) + 1 / n) ** (1 / params.p) * volK * t**n * norm
    return BoundReport("high_smoothness", value, "n-beta*p<0",
                       {"t": t, "n": n, "volK": volK, "sobolev_norm": norm,
                        "beta": params.beta, "p": params.p})


def _unit_open(name: str, v) -> float:
    v = float(v)
    if not (0 < v < 1):
        raise ParameterError(f"{name} must lie in (0,1), got {v}")
    return v


def lo_bound(t, n, volK, gammaK, C_K, b, gamma, alpha, C_abs: float = 1.0) -> BoundReport:
    """Littlewood-Offord bound for X = sum delta_k a_k.

    (|K| / gamma_n(K)) (C_K / pi)^n ((C_abs t / (gamma sqrt b))^n + exp(-b alpha^2)).
    The caller is responsible for t >= sqrt(n) / LCD_{alpha,gamma}(A).
    """
    t, n, volK = _pos("t", t), _dim(n), _pos("volK", volK)
    gammaK = _gamma_k(gammaK)
    C_K = _ck(C_K)
    b = _unit_open("b", b)
    gamma = _unit_open("gamma", gamma)
    alpha = _pos("alpha", alpha)
    C_abs = _pos("C_abs", C_abs)
    inner = (C_abs * t / (gamma * math.sqrt(b))) ** n + math.exp(-b * alpha * alpha)
    value = volK / gammaK * (C_K / math.pi) ** n * inner
    return BoundReport("lo", value, "general-quasi-norm",
                       {"t": t, "n": n, "volK": volK, "gammaK": gammaK, "C_K": C_K, "b": b,
                        "gamma": gamma, "alpha": alpha, "C_abs": C_abs})


def lp_corollary_constant(p: float) -> float:
    """min(2^(1/p-1), 1). For p < 1 this is 1, not the quasi-norm constant."""
    p = _pos("p", p)
    return min(2.0 ** (1.0 / p - 1.0), 1.0) if not math.isinf(p) else 0.5


def lo_bound_lp_corollary(t, n, p, b, gamma, alpha, C: float = 1.0) -> BoundReport:
    """(C C_p)^n ((t / (gamma sqrt b))^n + exp(-b alpha^2)), bounding P(|X|_p <= t n^(1/p)).

    C_p is min(2^(1/p-1), 1); the branch label flags that
    this disagrees with the quasi-norm constant when p < 1.
    """
    t, n = _pos("t", t), _dim(n)
    b = _unit_open("b", b)
    gamma = _unit_open("gamma", gamma)
    alpha = _pos("alpha", alpha)
    C = _pos("C", C)
    Cp = lp_corollary_constant(p)
    value = (C * Cp) ** n * ((t / (gamma * math.sqrt(b))) ** n + math.exp(-b * alpha * alpha))
    branch = "lp-corollary" + (" (min-form C_p; suspect for p<1)" if float(p) < 1 else "")
    return BoundReport("lo_lp_corollary", value, branch,
                       {"t": t, "n": n, "p": float(p), "b": b, "gamma": gamma, "alpha": alpha, "C": C, "C_p": Cp})
