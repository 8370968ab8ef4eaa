"""Command-line experiment runner.

Exit codes: 0 all checks pass, 1 a bound violation or oracle failure,
2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Dict, List, Optional

import numpy as np

from . import _rng
from .bounds import (BoundReport, SobolevParams, fourier_l1_bound, gamma_tail_bound,
                     high_smoothness_bound, lo_bound, lo_bound_lp_corollary, smoothed_bound,
                     sobolev_M, sobolev_small_ball_bound, sup_density_bound, weight_lp_norm_bound)
from .errors import NotApplicableError, SmallBallError
from .geometry import DEFAULT_CONFIDENCE, QuasiNormSpec, gaussian_measure
from .lcd import LcdParams, check_lower_isometry, integer_structure_bound, lcd_search, lo_rhs_integral
from .models import VectorModel, spread_parameter, sup_density
from .oracles import LO_Z_GRID, SUITE_ALIASES, SUITES
from .quadrature import (charfun_l1_norm, estimate_small_ball_grid, sobolev_norm_numeric,
                         weighted_charfun_integral)

VERIFY_COLUMNS = ("t", "p_hat", "ci_low", "ci_high", "bound_value", "branch", "pass")
ESTIMATE_COLUMNS = ("t", "p_hat", "ci_low", "ci_high", "samples", "hits")
SWEEP_COLUMNS = ("t", "bound_value", "branch")


class ConfigError(SmallBallError):
    pass


# ---------------------------------------------------------------- config


def load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def _settings(args, cfg: dict) -> dict:
    out = cfg.get("output", {}) or {}
    s = {
        "seed": args.seed if args.seed is not None else cfg.get("seed", 0),
        "samples": args.samples if args.samples is not None else cfg.get("samples", 10**6),
        "confidence": args.confidence if args.confidence is not None else cfg.get("confidence", DEFAULT_CONFIDENCE),
        "out": args.out if args.out is not None else out.get("path"),
        "format": args.format if args.format is not None else out.get("format", "csv"),
    }
    if int(s["samples"]) < 1:
        raise ConfigError("samples must be >= 1")
    if not 0 < float(s["confidence"]) < 1:
        raise ConfigError("confidence must lie in (0,1)")
    if s["format"] not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    s["seed"], s["samples"], s["confidence"] = int(s["seed"]), int(s["samples"]), float(s["confidence"])
    return s


def _t_grid(cfg: dict) -> List[float]:
    grid = cfg.get("t_grid")
    if not grid:
        raise ConfigError("config needs a non-empty t_grid")
    grid = [float(t) for t in grid]
    if any(not t > 0 for t in grid):
        raise ConfigError("t_grid entries must be > 0")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("t_grid must be strictly increasing")
    return grid


def _model_norm(cfg: dict):
    if "model" not in cfg or "norm" not in cfg:
        raise ConfigError("config needs 'model' and 'norm' sections")
    model = VectorModel.from_dict(cfg["model"])
    norm = QuasiNormSpec.from_dict(cfg["norm"])
    if norm.n != model.n:
        raise ConfigError(f"norm dimension {norm.n} does not match model dimension {model.n}")
    return model, norm


# ----------------------------------------------------- bound derivation


class BoundContext:
    """Evaluates one configured bound at many t, caching t-independent inputs."""

    def __init__(self, theorem: str, params: dict, model: VectorModel, norm: QuasiNormSpec, settings: dict):
        self.theorem = theorem
        self.params = dict(params)
        self.model, self.norm, self.s = model, norm, settings
        self._cache: Dict[str, float] = {}
        if theorem not in DERIVED:
            raise ConfigError(f"unknown theorem {theorem!r}; choose from {sorted(DERIVED)}")

    def get(self, key: str, compute):
        if key in self.params:
            return float(self.params[key])
        if key not in self._cache:
            self._cache[key] = compute()
        return self._cache[key]

    def require(self, key: str) -> float:
        if key not in self.params:
            raise ConfigError(f"bound '{self.theorem}' needs parameter '{key}'")
        return float(self.params[key])

    @property
    def n(self) -> int:
        return self.model.n

    def volK(self):
        return self.get("volK", lambda: self.norm.volume)

    def C_K(self):
        return self.get("C_K", lambda: self.norm.constant)

    def gammaK(self):
        # Monte Carlo measures use the lower confidence limit: dividing by it keeps the bound conservative
        return self.get("gammaK", lambda: gaussian_measure(self.norm, 1.0, self.s["samples"], self.s["seed"] + 1,
                                                           self.s["confidence"]).lower)

    def sobolev(self):
        sp = SobolevParams(self.require("beta"), self.require("p"))

        def norm():
            if self.model.kind != "standard-gaussian":
                raise NotApplicableError("numeric Sobolev norms are available for the standard Gaussian only")
            return sobolev_norm_numeric(self.n, sp).value

        return sp, self.get("sobolev_norm", norm)

    def evaluate(self, t: float) -> BoundReport:
        return DERIVED[self.theorem](self, t)

    def check_all(self, t_grid: List[float]) -> None:
        pre = PRECHECK.get(self.theorem)
        if pre is not None:
            pre(self, t_grid)


def _d_fourier(c: BoundContext, t):
    l1 = c.get("l1_phi", lambda: charfun_l1_norm(c.model))
    return fourier_l1_bound(t, c.n, c.volK(), l1)


def _d_smoothed(c: BoundContext, t):
    w = c.params.get("weighted_integral")
    if w is None:
        q = weighted_charfun_integral(c.model, t, c.s["samples"], c.s["seed"] + 2, c.s["confidence"])
        w = q.value + q.abs_error_estimate  # upper end keeps the bound conservative
    return smoothed_bound(t, c.n, c.volK(), c.gammaK(), c.C_K(), w)


def _d_sobolev(c: BoundContext, t):
    sp, norm = c.sobolev()
    return sobolev_small_ball_bound(t, c.n, c.volK(), c.gammaK(), c.C_K(), norm, sp)


def _d_sup(c: BoundContext, t):
    def sd():
        v = sup_density(c.model)
        if v is None:
            raise NotApplicableError("model has no bounded density")
        return v

    return sup_density_bound(t, c.n, c.volK(), c.get("sup_density", sd))


def _d_high(c: BoundContext, t):
    sp, norm = c.sobolev()
    return high_smoothness_bound(t, c.n, c.volK(), norm, sp)


def _spread(c: BoundContext):
    if c.model.kind != "weighted-sum":
        raise NotApplicableError("Littlewood-Offord bounds need a weighted-sum model")
    return c.get("b", lambda: spread_parameter(c.model.law))


def _d_lo(c: BoundContext, t):
    b = _spread(c)
    return lo_bound(t, c.n, c.volK(), c.gammaK(), c.C_K(), b, c.require("gamma"), c.require("alpha"),
                    float(c.params.get("C_abs", 1.0)))


def _d_integer(c: BoundContext, t):
    b = _spread(c)
    z_grid = [float(z) for z in c.params.get("z_grid", LO_Z_GRID)]
    rhs = lo_rhs_integral(c.model.matrix, t, b, z_grid, int(c.params.get("rhs_samples", 10**5)), c.s["seed"] + 3)
    value = integer_structure_bound(c.volK(), c.gammaK(), c.C_K(), c.n, rhs,
                                    bool(c.params.get("gaussian_normalization", True)))
    return BoundReport("integer_structure", value, "finite-z-grid",
                       {"t": t, "n": c.n, "b": b, "rhs": rhs, "z_grid": z_grid})


def _pre_lo(c: BoundContext, t_grid):
    if c.model.kind != "weighted-sum":
        raise NotApplicableError("Littlewood-Offord bounds need a weighted-sum model")
    A = c.model.matrix
    check_lower_isometry(A)
    if "lcd_lower" in c.params:
        lower = float(c.params["lcd_lower"])
    else:
        res = lcd_search(A, LcdParams(c.require("alpha"), c.require("gamma")),
                         float(c.params.get("radius_max", 6.0)), float(c.params.get("grid_step", 1e-3)))
        lower = res.lower_certified
    t_min = math.sqrt(c.n) / lower if lower > 0 else math.inf
    bad = [t for t in t_grid if t < t_min]
    if bad:
        raise ConfigError(f"t must be >= sqrt(n)/LCD = {t_min!r}; offending t: {bad}")


def _pre_fourier(c: BoundContext, t_grid):
    if math.isinf(c.get("l1_phi", lambda: charfun_l1_norm(c.model))):
        raise NotApplicableError("the characteristic function is not integrable (atoms or lattice law); "
                                 "use the smoothed bound")


DERIVED = {
    "fourier_l1": _d_fourier,
    "smoothed": _d_smoothed,
    "sobolev": _d_sobolev,
    "sup_density": _d_sup,
    "high_smoothness": _d_high,
    "lo": _d_lo,
    "integer_structure": _d_integer,
}
PRECHECK = {"lo": _pre_lo, "fourier_l1": _pre_fourier}


def _bound_context(cfg: dict, settings: dict) -> BoundContext:
    model, norm = _model_norm(cfg)
    spec = cfg.get("bound")
    if not isinstance(spec, dict) or "theorem" not in spec:
        raise ConfigError("config needs a 'bound' section with a 'theorem'")
    return BoundContext(spec["theorem"], spec.get("params", {}) or {}, model, norm, settings)


# --------------------------------------------------------------- output


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(rows: List[dict], columns, fmt: str, meta: dict) -> str:
    if fmt == "json":
        return json.dumps({"meta": meta, "rows": rows}, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def emit(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _meta(settings: dict, cfg: dict) -> dict:
    return {"seed": settings["seed"], "samples": settings["samples"], "confidence": settings["confidence"],
            "chunk_size": _rng.CHUNK_SIZE, "bound": cfg.get("bound"), "model": cfg.get("model"),
            "norm": cfg.get("norm")}


# ------------------------------------------------------------- commands


SCALAR_BOUNDS = {
    "fourier_l1": (fourier_l1_bound, ("t", "n", "volK", "l1_phi")),
    "smoothed": (smoothed_bound, ("t", "n", "volK", "gammaK", "C_K", "weighted_integral")),
    "sup_density": (sup_density_bound, ("t", "n", "volK", "sup_density")),
    "lo": (lo_bound, ("t", "n", "volK", "gammaK", "C_K", "b", "gamma", "alpha")),
    "lo_lp_corollary": (lo_bound_lp_corollary, ("t", "n", "p", "b", "gamma", "alpha")),
}
SOBOLEV_BOUNDS = {
    "weight_lp_norm": (weight_lp_norm_bound, ("n", "t")),
    "sobolev_M": (sobolev_M, ("n", "t")),
    "sobolev": (sobolev_small_ball_bound, ("t", "n", "volK", "gammaK", "C_K", "sobolev_norm")),
    "high_smoothness": (high_smoothness_bound, ("t", "n", "volK", "sobolev_norm")),
}


def _parse_kv(items: List[str]) -> dict:
    out = {}
    for it in items:
        if "=" not in it:
            raise ConfigError(f"expected key=value, got {it!r}")
        k, v = it.split("=", 1)
        try:
            out[k.strip()] = json.loads(v)
        except json.JSONDecodeError:
            out[k.strip()] = v
    return out


def _fill_geometry(params: dict, settings: dict) -> None:
    # norm_p=<p> derives volK, C_K and gammaK for the l_p ball in R^n
    if "norm_p" in params and "n" in params:
        spec = QuasiNormSpec(float(params["norm_p"]), int(params["n"]))
        params.setdefault("volK", spec.volume)
        params.setdefault("C_K", spec.constant)
        if "gammaK" not in params:
            params["gammaK"] = gaussian_measure(spec, 1.0, settings["samples"], settings["seed"] + 1,
                                                settings["confidence"]).lower


def cmd_bound(args, cfg) -> int:
    settings = _settings(args, cfg)
    params = dict((cfg.get("bound") or {}).get("params", {}) or {})
    theorem = args.theorem or (cfg.get("bound") or {}).get("theorem")
    params.update(_parse_kv(args.params))
    if theorem is None:
        raise ConfigError("name a theorem")
    if theorem == "gamma_tail":
        x, a = float(params["x"]), float(params["alpha"])
        rep = BoundReport("gamma_tail", gamma_tail_bound(x, a), "x>=alpha>=1", {"x": x, "alpha": a})
    elif theorem in SCALAR_BOUNDS or theorem in SOBOLEV_BOUNDS:
        if "n" in params:
            params["n"] = int(params["n"])
        _fill_geometry(params, settings)
        fn, keys = SCALAR_BOUNDS.get(theorem) or SOBOLEV_BOUNDS[theorem]
        missing = [k for k in keys if k not in params]
        if theorem in SOBOLEV_BOUNDS:
            missing += [k for k in ("beta", "p") if k not in params]
        if missing:
            raise ConfigError(f"bound '{theorem}' is missing parameters: {', '.join(missing)}")
        kwargs = {k: params[k] for k in keys}
        if theorem in SOBOLEV_BOUNDS:
            kwargs["params"] = SobolevParams(params["beta"], params["p"])
        if theorem == "lo" and "C_abs" in params:
            kwargs["C_abs"] = float(params["C_abs"])
        if theorem == "lo_lp_corollary" and "C" in params:
            kwargs["C"] = float(params["C"])
        rep = fn(**kwargs)
    else:
        raise ConfigError(f"unknown theorem {theorem!r}")
    d = rep.to_dict()
    if args.clamp:
        d["display_value"] = min(rep.value, 1.0)
    emit(json.dumps(d, indent=2) + "\n", settings["out"])
    return 0


def cmd_estimate(args, cfg) -> int:
    s = _settings(args, cfg)
    model, norm = _model_norm(cfg)
    grid = _t_grid(cfg)
    ests = estimate_small_ball_grid(model, norm, grid, s["samples"], s["seed"], s["confidence"])
    rows = [{"t": t, "p_hat": e.p_hat, "ci_low": e.ci_low, "ci_high": e.ci_high,
             "samples": e.samples, "hits": e.hits} for t, e in zip(grid, ests)]
    emit(render(rows, ESTIMATE_COLUMNS, s["format"], _meta(s, cfg)), s["out"])
    return 0


def cmd_sweep(args, cfg) -> int:
    s = _settings(args, cfg)
    ctx = _bound_context(cfg, s)
    grid = _t_grid(cfg)
    ctx.check_all(grid)
    rows = []
    for t in grid:
        rep = ctx.evaluate(t)
        rows.append({"t": t, "bound_value": rep.value, "branch": rep.branch})
    emit(render(rows, SWEEP_COLUMNS, s["format"], _meta(s, cfg)), s["out"])
    return 0


def cmd_verify(args, cfg) -> int:
    s = _settings(args, cfg)
    ctx = _bound_context(cfg, s)
    grid = _t_grid(cfg)
    ctx.check_all(grid)
    ests = estimate_small_ball_grid(ctx.model, ctx.norm, grid, s["samples"], s["seed"], s["confidence"])
    rows = []
    for t, e in zip(grid, ests):
        rep = ctx.evaluate(t)
        rows.append({"t": t, "p_hat": e.p_hat, "ci_low": e.ci_low, "ci_high": e.ci_high,
                     "bound_value": rep.value, "branch": rep.branch, "pass": e.ci_high <= rep.value})
    emit(render(rows, VERIFY_COLUMNS, s["format"], _meta(s, cfg)), s["out"])
    return 0 if all(r["pass"] for r in rows) else 1


def read_matrix(path: str) -> np.ndarray:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read matrix file {path}: {exc}") from exc
    try:
        data = json.loads(text)
        A = np.asarray(data.get("matrix", data) if isinstance(data, dict) else data, dtype=float)
    except (json.JSONDecodeError, ValueError, TypeError):
        try:
            A = np.loadtxt(io.StringIO(text), ndmin=2, dtype=float)
        except ValueError as exc:
            raise ConfigError(f"malformed matrix file {path}: {exc}") from exc
    if A.ndim == 1:
        A = A[None, :]
    if A.ndim != 2 or A.size == 0 or not np.all(np.isfinite(A)):
        raise ConfigError(f"malformed matrix file {path}: need a finite N x n array")
    return A


def cmd_lcd(args, cfg) -> int:
    s = _settings(args, cfg)
    A = read_matrix(args.matrix)
    res = lcd_search(A, LcdParams(args.alpha, args.gamma), args.radius_max, args.grid_step)
    d = res.to_dict()
    d.update({"alpha": args.alpha, "gamma": args.gamma, "radius_max": args.radius_max, "shape": list(A.shape)})
    emit(json.dumps(d, indent=2) + "\n", s["out"])
    return 0


def cmd_oracle(args, cfg) -> int:
    s = _settings(args, cfg)
    name = SUITE_ALIASES.get(args.suite, args.suite)
    if name not in SUITES:
        raise ConfigError(f"unknown suite {args.suite!r}; choose from {sorted(SUITES)}")
    rep = SUITES[name]()
    emit(json.dumps(rep.to_dict(with_details=args.details), indent=2, default=float) + "\n", s["out"])
    return 0 if rep.passed else 1


# --------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int)
    common.add_argument("--samples", type=int)
    common.add_argument("--confidence", type=float, help="confidence level (default 0.99)")
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("csv", "json"))

    p = argparse.ArgumentParser(prog="smallball", description="Small-ball bounds and their numerical oracles.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bound", parents=[common], help="evaluate one bound")
    b.add_argument("theorem", nargs="?")
    b.add_argument("params", nargs="*", help="key=value parameters")
    b.add_argument("--clamp", action="store_true", help="also report min(value, 1)")
    b.set_defaults(func=cmd_bound)

    for name, fn, hlp in (("estimate", cmd_estimate, "Monte Carlo small-ball estimates over t_grid"),
                          ("verify", cmd_verify, "bound vs Monte Carlo over t_grid"),
                          ("sweep", cmd_sweep, "bound values over t_grid")):
        sp = sub.add_parser(name, parents=[common], help=hlp)
        sp.set_defaults(func=fn)

    l = sub.add_parser("lcd", parents=[common], help="certified LCD bracket")
    l.add_argument("matrix", help="matrix file (JSON array or whitespace table)")
    l.add_argument("--alpha", type=float, required=True)
    l.add_argument("--gamma", type=float, required=True)
    l.add_argument("--radius-max", type=float, default=6.0)
    l.add_argument("--grid-step", type=float, default=1e-3)
    l.set_defaults(func=cmd_lcd)

    o = sub.add_parser("oracle", parents=[common], help="run an oracle suite")
    o.add_argument("suite")
    o.add_argument("--details", action="store_true")
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 2
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except (SmallBallError, ValueError, KeyError, TypeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
