"""Acceptance criteria AC-1 .. AC-9.

Each test prints one ``AC-k PASS|FAIL`` line (also collected into the
terminal summary) and then asserts the criterion exactly as stated.
"""
import math
import time

import mpmath
import numpy as np
from scipy import stats

from conftest import ACCEPTANCE_LINES
from _helpers import brute_force_has_member
from smallball import (LcdParams, QuasiNormSpec, SobolevParams, binomial_ci, dist_to_lattice,
                       estimate_small_ball_grid, fourier_l1_bound, gaussian_measure, lcd_search, lo_bound,
                       lp_quasinorm, sobolev_norm_numeric, sobolev_small_ball_bound,
                       standard_gaussian, two_point, weighted_sum)
from smallball.cli import main as cli_main
from smallball.lcd import check_lower_isometry
from smallball.oracles import (LO_ATOM, LO_PARAMS, lo_fixture, lo_t_grid, run_gamma_tail,
                               run_lo_lemma, run_m_identity, run_weight_norm)

CONFIDENCE = 0.99
MC_SAMPLES = 10**6


def report(key, ok, detail):
    line = f"{key} {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES[key] = line
    print(line)


def test_ac1_weight_norm_oracle():
    start = time.perf_counter()
    rep = run_weight_norm()
    # independent high-precision reference for the quadrature error
    worst_rel = 0.0
    for d in rep.details:
        n, bp, c = d["n"], d["beta"] * d["p"], 0.5 * d["p"] * d["t"] ** 2
        f = lambda r: r ** (n - 1) * (1 if r <= 1 else r ** (-bp)) * mpmath.exp(-c * r * r)
        ref = float(mpmath.quad(f, [0, 1, mpmath.inf]))
        worst_rel = max(worst_rel, abs(d["quadrature"] - ref) / ref)
    elapsed = time.perf_counter() - start
    boundaries = {
        "pt^2=2": any(math.isclose(d["p"] * d["t"] ** 2, 2.0) for d in rep.details),
        "pt^2=n": any(math.isclose(d["p"] * d["t"] ** 2, d["n"]) for d in rep.details),
    }
    ok = (rep.checked >= 36 and rep.failures == 0 and rep.extra["all_branches_hit"]
          and all(boundaries.values()) and worst_rel <= 1e-8 and elapsed < 60)
    report("AC-1", ok, f"{rep.checked} points, {rep.failures} violations, "
                       f"{len(rep.extra['branches_hit'])}/6 regimes, boundaries {boundaries}, "
                       f"max quadrature rel. error {worst_rel:.1e}, {elapsed:.1f}s")
    assert ok


def test_ac2_m_identity():
    rep = run_m_identity()
    ok = rep.failures == 0 and rep.extra["max_relative_deviation"] <= 1e-12
    report("AC-2", ok, f"{rep.checked} points, max relative deviation {rep.extra['max_relative_deviation']:.1e}")
    assert ok


AC3_TS = (0.05, 0.1, 0.2, 0.5)
AC3_PS = (2.0, 1.0, 0.5)


def test_ac3_fourier_domination():
    start = time.perf_counter()
    violations, rows = [], []
    ratios = {}
    for n in (1, 2, 3):
        model = standard_gaussian(n)
        l1 = (2 * math.pi) ** (n / 2)
        for p in AC3_PS:
            K = QuasiNormSpec(p, n)
            ests = estimate_small_ball_grid(model, K, AC3_TS, MC_SAMPLES, seed=n, confidence=CONFIDENCE)
            for t, e in zip(AC3_TS, ests):
                b = fourier_l1_bound(t, n, K.volume, l1).value
                rows.append((n, p, t, e, b))
                if not e.ci_high <= b:
                    violations.append((n, p, t, e.ci_high, b))
                if n == 1 and p == 2.0 and t <= 0.1:
                    ratios[t] = b / e.p_hat
    tight = all(1.0 <= r <= 1.1 for r in ratios.values())
    elapsed = time.perf_counter() - start
    ok = not violations and tight and elapsed < 120
    worst = max(violations, key=lambda v: v[3] / v[4], default=None)
    report("AC-3", ok, f"{len(rows) - len(violations)}/{len(rows)} points with ci_high <= bound"
                       + (f", worst ci_high/bound {worst[3] / worst[4]:.4f} at n={worst[0]}, p={worst[1]}, t={worst[2]}"
                          if worst else "")
                       + f", near-tightness ratios {', '.join(f't={t}: {r:.4f}' for t, r in ratios.items())}"
                       + f", {elapsed:.1f}s")
    assert ok


def test_fourier_bound_dominates_exact_gaussian_probability():
    # diagnostic for AC-3: the bound dominates the exact probability and the lower confidence limit everywhere
    for n in (1, 2, 3):
        for t in AC3_TS:
            b = fourier_l1_bound(t, n, QuasiNormSpec(2, n).volume, (2 * math.pi) ** (n / 2)).value
            assert stats.chi2.cdf(t * t, n) <= b
    for n in (1, 2, 3):
        for p in AC3_PS:
            K = QuasiNormSpec(p, n)
            ests = estimate_small_ball_grid(standard_gaussian(n), K, AC3_TS, MC_SAMPLES, seed=n)
            for t, e in zip(AC3_TS, ests):
                assert e.ci_low <= fourier_l1_bound(t, n, K.volume, (2 * math.pi) ** (n / 2)).value


def test_ac4_gamma_tail():
    rep = run_gamma_tail()
    ok = rep.checked > 0 and rep.failures == 0
    report("AC-4", ok, f"{rep.checked} points, {rep.failures} violations, worst relative margin {rep.worst_margin:.3f}")
    assert ok


AC5_PARAMS = ((1.0, 2.0), (2.0, 2.0), (0.5, 1.5))
AC5_TS = (0.05, 0.1, 0.5, 2.0)


def test_ac5_sobolev_domination():
    start = time.perf_counter()
    checked, violations, tightest = 0, [], 0.0
    for n in (1, 2):
        K = QuasiNormSpec(2.0, n)
        gK = gaussian_measure(K).lower
        ests = estimate_small_ball_grid(standard_gaussian(n), K, AC5_TS, MC_SAMPLES, seed=10 + n,
                                        confidence=CONFIDENCE)
        for beta, p in AC5_PARAMS:
            sp = SobolevParams(beta, p)
            norm = sobolev_norm_numeric(n, sp).value
            for t, e in zip(AC5_TS, ests):
                b = sobolev_small_ball_bound(t, n, K.volume, gK, K.constant, norm, sp).value
                checked += 1
                tightest = max(tightest, e.ci_high / b)
                if not e.ci_high <= b:
                    violations.append((n, beta, p, t))
    elapsed = time.perf_counter() - start
    ok = not violations and elapsed < 180
    report("AC-5", ok, f"{checked - len(violations)}/{checked} points dominated, "
                       f"largest ci_high/bound {tightest:.3f}, {elapsed:.1f}s")
    assert ok


AC6_CASES = (("[[1]], gamma=1/2", np.array([[1.0]]), LcdParams(10, 0.5), 2 / 3),
             ("[[2]], gamma=1/2", np.array([[2.0]]), LcdParams(10, 0.5), 1 / 3),
             ("I_2, gamma=1/2, alpha=1", np.eye(2), LcdParams(1, 0.5), 2 / 3))


def test_ac6_lcd_correctness():
    start = time.perf_counter()
    parts, ok = [], True
    for label, A, params, exact in AC6_CASES:
        res = lcd_search(A, params, radius_max=2.0, grid_step=1e-3)
        contains = res.lower_certified <= exact <= res.upper_witness
        reverified = not brute_force_has_member(A, params, res.lower_certified, res.resolution / 10)
        ok &= contains and reverified
        parts.append(f"{label}: [{res.lower_certified:.6f}, {res.upper_witness:.6f}] "
                     f"{'contains' if contains else 'MISSES'} {exact:.6f}"
                     f"{'' if reverified else ' (finer scan found a member)'}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 60
    report("AC-6", ok, "; ".join(parts) + f"; {elapsed:.1f}s")
    assert ok


def _minimal_c_abs(ci_high, t, n, volK, gammaK, C_K, b, gamma, alpha):
    pref = volK / gammaK * (C_K / math.pi) ** n
    need = (ci_high / pref - math.exp(-b * alpha * alpha)) / (t / (gamma * math.sqrt(b))) ** n
    return max(1.0, need ** (1 / n) if need > 0 else 1.0)


def test_ac7_lo_domination_with_bounded_slack():
    A = lo_fixture()
    n = A.shape[1]
    sigma = check_lower_isometry(A)
    lcd_res, ts = lo_t_grid(A)
    model = weighted_sum(A, two_point(LO_ATOM))
    b, gamma, alpha = 0.5, LO_PARAMS.gamma, LO_PARAMS.alpha
    norms = [QuasiNormSpec(2.0, n), QuasiNormSpec(1.0, n)]
    gks = {K.p: gaussian_measure(K, seed=1).lower for K in norms}

    c_abs = 1.0
    for K in norms:
        for t, e in zip(ts, estimate_small_ball_grid(model, K, ts, MC_SAMPLES, seed=20, confidence=CONFIDENCE)):
            c_abs = max(c_abs, _minimal_c_abs(e.ci_high, t, n, K.volume, gks[K.p], K.constant, b, gamma, alpha))
    fresh_ok = True
    for K in norms:
        for t, e in zip(ts, estimate_small_ball_grid(model, K, ts, MC_SAMPLES, seed=21, confidence=CONFIDENCE)):
            bound = lo_bound(t, n, K.volume, gks[K.p], K.constant, b, gamma, alpha, c_abs).value
            fresh_ok &= e.ci_high <= bound
    ok = sigma >= 1 and ts[0] >= math.sqrt(n) / lcd_res.lower_certified and c_abs <= 16 and fresh_ok
    report("AC-7", ok, f"sigma_min {sigma:.4f}, LCD in [{lcd_res.lower_certified:.6f}, {lcd_res.upper_witness:.6f}], "
                       f"t_min {ts[0]:.4f}, minimal C_abs {c_abs:.3f} (<= 16), fresh-seed domination {fresh_ok}")
    assert ok


AC8_ENLARGED_Z = tuple(np.geomspace(1 / (2 * math.pi), 64.0, 48))


def test_ac8_integer_structure_lemma():
    rep = run_lo_lemma(samples=MC_SAMPLES, rhs_samples=10**5, seed=0, gaussian_normalization=False)
    enlarged = None
    if not rep.passed:
        # a finite z grid only lower-bounds the supremum: enlarge before calling it a defect
        from smallball import lo_rhs_integral
        enlarged = []
        for d in rep.details:
            if d["ok"]:
                continue
            rhs = lo_rhs_integral(lo_fixture(), d["t"], 0.5, AC8_ENLARGED_Z, 10**5, 3)
            scale = d["bound"] / d["rhs"]
            enlarged.append((d["p"], d["t"], d["p_hat"], scale * rhs, scale))
    still = [e for e in (enlarged or []) if not e[2] <= e[3]]
    ok = rep.passed or not still
    detail = f"{rep.checked - rep.failures}/{rep.checked} points with p_hat <= bound"
    if enlarged is not None:
        detail += (f"; after enlarging z to {len(AC8_ENLARGED_Z)} points up to 64, {len(still)} still fail, e.g. "
                   + ", ".join(f"p={p}, t={t:.3f}: p_hat {ph:.4f} > bound {bd:.4f} (ceiling {sc:.4f})"
                               for p, t, ph, bd, sc in still[:2]))
    report("AC-8", ok, detail)
    assert ok


def test_integer_structure_lemma_with_lebesgue_integral():
    # the same check with the Lebesgue integral (Gaussian average times (2 pi)^(n/2))
    rep = run_lo_lemma(samples=MC_SAMPLES, rhs_samples=10**5, seed=0, gaussian_normalization=True)
    assert rep.passed, rep.details


def test_ac9_property_suites(tmp_path, capsys):
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    counts = {}

    # quasi-triangle inequality
    bad = 0
    for p in (0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 4.0, math.inf):
        x = rng.standard_normal((100_000, 5)) * rng.exponential(1.0, (100_000, 1))
        y = rng.standard_normal((100_000, 5)) * (rng.random((100_000, 5)) < 0.5)
        C = QuasiNormSpec(p, 5).constant
        bad += int(np.sum(lp_quasinorm(x + y, p) > C * (lp_quasinorm(x, p) + lp_quasinorm(y, p)) * (1 + 1e-12)))
    counts["quasi-triangle"] = bad

    # lattice distance: periodicity, symmetry, bounds
    v = rng.uniform(-100, 100, (200_000, 4))
    k = rng.integers(-1000, 1000, (200_000, 4))
    d = dist_to_lattice(v)
    bad = int(np.sum(np.abs(dist_to_lattice(v + k) - d) > 1e-9))
    bad += int(np.sum(np.abs(dist_to_lattice(-v) - d) > 1e-12))
    bad += int(np.sum((d < 0) | (d > math.sqrt(4) / 2 + 1e-12)))
    counts["lattice"] = bad

    # Clopper-Pearson coverage
    bad = 0
    for p in (0.01, 0.1, 0.5):
        hits = rng.binomial(1000, p, size=10**4)
        lo, hi = binomial_ci(hits, np.full(10**4, 1000), CONFIDENCE)
        bad += int(np.mean((lo <= p) & (p <= hi)) < CONFIDENCE - 0.005)
    counts["ci-coverage"] = bad

    # CSV byte determinism
    cfg = tmp_path / "c.json"
    cfg.write_text('{"model": {"kind": "standard-gaussian", "n": 2}, "norm": {"p": 0.5, "n": 2},'
                   '"bound": {"theorem": "fourier_l1"}, "t_grid": [1.0, 2.0]}')
    blobs = []
    for i in range(3):
        out = tmp_path / f"o{i}.csv"
        cli_main(["verify", "--config", str(cfg), "--samples", "100000", "--seed", "5", "--out", str(out)])
        blobs.append(out.read_bytes())
    capsys.readouterr()
    counts["csv-determinism"] = int(len(set(blobs)) != 1 or b"\r" in blobs[0])

    elapsed = time.perf_counter() - start
    ok = not any(counts.values()) and elapsed < 120
    report("AC-9", ok, ", ".join(f"{k}: {v} violations" for k, v in counts.items()) + f", {elapsed:.1f}s")
    assert ok
