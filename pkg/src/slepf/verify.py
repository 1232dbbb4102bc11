"""Verification suites: exact identities, residual checks, statistical tests.

Each suite returns a dict with a boolean "passed" and enough detail to see
what was measured.  The acceptance tests and the command-line `pf verify`,
`fusion check`, and `coulomb check` commands all run these functions, so the
tolerances live in exactly one place.
"""

from __future__ import annotations

import math
import os
import time

import numpy as np

from . import coulomb as coulomb_mod
from . import fusion as fusion_mod
from .exact_pf import (PATTERN_NESTED, PATTERN_SEP, c_kappa, pfaffian_form,
                       z_four, z_pair, z_total)
from .ising import IsingConfig, corner_marks, crossing_experiment
from .linkpat import LinkPattern
from .loewner import (LoewnerChain, constant_driving, evolve,
                      evolve_chordal_ensemble, hcap_estimate, sample_driving)
from .mc_pf import CascadeConfig, estimate_z, symmetry_check
from .params import derive_params, kac_weight
from .pde import asy_check, martingale_check, mobius_check, pde_residual, random_mobius


def _default_threads():
    return min(8, os.cpu_count() or 1)


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    out["runtime_s"] = round(time.perf_counter() - t0, 3)
    return out


def _rand_config(rng, n_pts, spread=4.0, min_gap=0.05):
    while True:
        xs = np.sort(rng.uniform(-spread, spread, size=n_pts))
        if np.diff(xs).min() > min_gap:
            return xs


# ----------------------------------------------------------------- criterion 1

def suite_params(tol=1e-15):
    def run():
        p3 = derive_params(3.0)
        checks = {
            "h(3)=1/2": abs(p3.h - 0.5),
            "c(3)=1/2": abs(p3.c - 0.5),
            "h(6)=0": abs(derive_params(6.0).h),
            "h11=0": abs(kac_weight(5.37, 1)),
            "h13(6)=1/3": abs(kac_weight(6.0, 3) - 1.0 / 3.0),
            "h(4)=1/4": abs(derive_params(4.0).h - 0.25),
            "c(4)=1": abs(derive_params(4.0).c - 1.0),
        }
        return {"suite": "params", "passed": max(checks.values()) <= tol,
                "max_abs_err": max(checks.values()), "tol": tol, "checks": checks}
    return _timed(run)


# ----------------------------------------------------------------- criterion 2

def suite_pde(kappas=(3.0, 4.0, 6.0), tol=1e-4, control_min=1e-2):
    def run():
        worst = 0.0
        details = {}
        for kappa in kappas:
            evals = {
                "z_pair": (lambda q, k=kappa: z_pair(k, q[0], q[1]), (0.0, 1.0)),
                "z_sep": (lambda q, k=kappa: z_four(k, PATTERN_SEP, q), (0.0, 1.0, 2.0, 4.0)),
                "z_nested": (lambda q, k=kappa: z_four(k, PATTERN_NESTED, q), (0.0, 1.0, 2.0, 4.0)),
            }
            for name, (f, pts) in evals.items():
                for i in range(len(pts)):
                    r = abs(pde_residual(f, kappa, i, pts))
                    details[f"{name} k={kappa} i={i + 1}"] = r
                    worst = max(worst, r)
        # negative control: a pure product of the two-point functions is not
        # a solution away from the decoupled case
        kappa = 3.0

        def control(q):
            return abs(q[1] - q[0]) ** -1.0 * abs(q[3] - q[2]) ** -1.0

        ctrl = max(abs(pde_residual(control, kappa, i, (0.0, 1.0, 2.0, 4.0)))
                   for i in range(4))
        passed = worst <= tol and ctrl >= control_min
        return {"suite": "pde", "passed": passed, "max_residual": worst,
                "tol": tol, "negative_control": ctrl,
                "control_min": control_min, "details": details}
    return _timed(run)


# ----------------------------------------------------------------- criterion 3

def suite_cov(n_maps=100, tol=1e-8, seed=20240901):
    def run():
        rng = np.random.default_rng(seed)
        kappas = (3.0, 4.0, 6.0)
        worst = 0.0
        count = 0
        while count < n_maps:
            kappa = kappas[count % len(kappas)]
            pts2 = _rand_config(rng, 2)
            pts4 = _rand_config(rng, 4)
            for f, pts in (
                (lambda q, k=kappa: z_pair(k, q[0], q[1]), pts2),
                (lambda q, k=kappa: z_four(k, PATTERN_SEP, q), pts4),
                (lambda q, k=kappa: z_four(k, PATTERN_NESTED, q), pts4),
            ):
                coeffs = random_mobius(rng, pts)
                worst = max(worst, mobius_check(f, kappa, coeffs, pts))
            count += 1
        return {"suite": "cov", "passed": worst <= tol, "n_maps": n_maps,
                "max_rel_discrepancy": worst, "tol": tol}
    return _timed(run)


# ----------------------------------------------------------------- criterion 4

def suite_asy(kappa=3.0, tol=1e-4):
    def run():
        pts = (0.0, 1.0, 2.0, 4.0)
        cases = [
            ("sep", 1, lambda q: z_pair(kappa, q[2], q[3])),
            ("sep", 2, None),
            ("nested", 1, None),
            ("nested", 2, lambda q: z_pair(kappa, q[0], q[3])),
            ("sep", 3, lambda q: z_pair(kappa, q[0], q[1])),
            ("nested", 3, None),
        ]
        worst = 0.0
        details = {}
        for name, j, target in cases:
            alpha = PATTERN_SEP if name == "sep" else PATTERN_NESTED
            f = lambda q, a=alpha: z_four(kappa, a, q)
            res = asy_check(f, kappa, j, np.asarray(pts))
            want = target(pts) if target else 0.0
            err = abs(res.limit - want) / max(abs(want), 1.0)
            details[f"{name} j={j}"] = {"limit": res.limit, "want": want, "err": err}
            worst = max(worst, err)
        return {"suite": "asy", "passed": worst <= tol, "max_err": worst,
                "tol": tol, "details": details}
    return _timed(run)


# ----------------------------------------------------------------- criterion 5

def suite_bounds(kappas=(3.0, 4.0, 6.0), n_grid=1000, seed=7):
    def run():
        rng = np.random.default_rng(seed)
        min_margin_b = math.inf
        min_margin_m = math.inf
        for kappa in kappas:
            h = derive_params(kappa).h
            for _ in range(n_grid // len(kappas) + 1):
                xs = _rand_config(rng, 4)
                for alpha in (PATTERN_SEP, PATTERN_NESTED):
                    z = z_four(kappa, alpha, xs)
                    if z <= 0:
                        return {"suite": "bounds", "passed": False,
                                "reason": f"nonpositive value at {xs}"}
                    bnd = np.prod([abs(xs[b - 1] - xs[a - 1]) ** (-2 * h)
                                   for a, b in alpha.links])
                    malek = np.prod([
                        min(abs(xs[i] - xs[j]) for j in range(4) if j != i) ** (-h)
                        for i in range(4)
                    ])
                    min_margin_b = min(min_margin_b, (bnd - z) / bnd)
                    min_margin_m = min(min_margin_m, (malek - z) / malek)
        passed = min_margin_b > 0 and min_margin_m > 0
        return {"suite": "bounds", "passed": passed,
                "min_rel_margin_strong_bound": min_margin_b,
                "min_rel_margin_malek": min_margin_m, "n_grid": n_grid}
    return _timed(run)


# ----------------------------------------------------------------- criterion 6

def suite_c_kappa():
    def run():
        err4 = abs(c_kappa(4.0) - 1.0)
        err8 = abs(c_kappa(8.0))
        lo_ok = all(c_kappa(k) > 1.0 for k in np.linspace(0.2, 3.9, 20))
        hi_ok = all(0.0 < c_kappa(k) < 1.0 for k in np.linspace(4.1, 7.9, 20))
        passed = err4 <= 1e-12 and err8 <= 1e-10 and lo_ok and hi_ok
        return {"suite": "c_kappa", "passed": passed, "err_at_4": err4,
                "err_at_8": err8, "range_(0,4)_gt_1": lo_ok,
                "range_(4,8)_in_(0,1)": hi_ok}
    return _timed(run)


# ----------------------------------------------------------------- criterion 7

def suite_pfaffian(n_configs=100, tol=1e-10, seed=11):
    def run():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(n_configs):
            xs = _rand_config(rng, 4)
            zt = z_total(3.0, xs)
            pf = pfaffian_form(xs)
            worst = max(worst, abs(zt - pf) / abs(pf))
        return {"suite": "pfaffian", "passed": worst <= tol,
                "max_rel_err": worst, "tol": tol, "n_configs": n_configs}
    return _timed(run)


# ----------------------------------------------------------------- criterion 8

def suite_loewner(seed=13):
    def run():
        out = {"suite": "loewner"}
        # slit-map closed form: W=0 gives g_t(x) = sqrt(x^2+4t), g' = x/g
        chain = LoewnerChain.from_driving(constant_driving(1.0, 1e-4), [3.0, 5.0])
        evolve(chain, 1.0)
        g_err = max(abs(chain.g[0] - math.sqrt(13.0)) / math.sqrt(13.0),
                    abs(chain.g[1] - math.sqrt(29.0)) / math.sqrt(29.0))
        gp_err = abs(chain.gp[0] - 3.0 / math.sqrt(13.0)) / (3.0 / math.sqrt(13.0))
        out["slit_rel_err"] = max(g_err, gp_err)
        gp_in_range = bool(0.0 < chain.gp[0] <= 1.0 and 0.0 < chain.gp[1] <= 1.0)
        # hcap = 2t within 1% at T=1, dt=1e-4, kappa=3 driving
        drv = sample_driving(3.0, 1.0, 1e-4, seed)
        chain2 = LoewnerChain.from_driving(drv, [1e4])
        evolve(chain2, 1.0)
        out["hcap_rel_err"] = abs(hcap_estimate(chain2, 0) - 2.0) / 2.0
        # Poisson ratios in [0,1] over 1000 chordal samples (kappa=3)
        rng = np.random.default_rng(seed + 1)
        spect = np.tile(np.array([2.0, 3.0]), (1000, 1))
        st = evolve_chordal_ensemble(3.0, 0.0, 1.0, spect, rng)
        log_r = (st["lgp"][:, 0] + st["lgp"][:, 1]
                 + 2.0 * math.log(3.0 - 2.0) - 2.0 * st["ldiff"][:, 0])
        ratios = np.exp(log_r)
        out["poisson_min"] = float(ratios.min())
        out["poisson_max"] = float(ratios.max())
        ratios_ok = bool(ratios.min() > 0.0 and ratios.max() <= 1.0 + 1e-9)
        # phase checks: kappa=3 outside points never swallowed; kappa=6 some are
        rng3 = np.random.default_rng(seed + 2)
        st3 = evolve_chordal_ensemble(
            3.0, 0.0, 1.0, np.tile(np.array([-0.5, 1.5]), (1000, 1)), rng3,
            allow_swallow=True, swallow_ratio=1e-8)
        out["kappa3_swallowed"] = int(st3["swallowed"].sum())
        rng6 = np.random.default_rng(seed + 3)
        st6 = evolve_chordal_ensemble(
            6.0, 0.0, 1.0, np.tile(np.array([-0.5, 0.5, 1.5]), (300, 1)), rng6,
            allow_swallow=True, swallow_ratio=1e-8)
        frac6 = float(st6["swallowed"].any(axis=1).mean())
        out["kappa6_swallow_fraction"] = frac6
        out["passed"] = bool(
            out["slit_rel_err"] <= 1e-6 and gp_in_range
            and out["hcap_rel_err"] <= 0.01
            and ratios_ok
            and out["kappa3_swallowed"] == 0
            and frac6 > 0.0
        )
        return out
    return _timed(run)


# ----------------------------------------------------------------- criterion 9

def suite_mc(samples=100_000, sym_samples=20_000, seed=1234, threads=None):
    def run():
        threads_ = threads or _default_threads()
        pts = (0.0, 1.0, 2.0, 4.0)
        out = {"suite": "mc", "cases": {}}
        ok = True
        for name, alpha in (("sep", PATTERN_SEP), ("nested", PATTERN_NESTED)):
            cfg = CascadeConfig(kappa=3.0, alpha=alpha, pts=pts,
                                samples=samples, seed=seed, threads=threads_)
            est = estimate_z(cfg)
            exact = z_four(3.0, alpha, pts)
            dev = (est.value - exact) / est.abs_error
            rel_se = est.abs_error / est.value
            case_ok = abs(dev) <= 3.0 and rel_se <= 0.01
            ok = ok and case_ok
            out["cases"][name] = {
                "mc": est.value, "se": est.abs_error, "exact": exact,
                "deviation_se_units": dev, "rel_se": rel_se, "passed": case_ok,
            }
        for name, alpha, l1, l2 in (
            ("sym_sep", PATTERN_SEP, (1, 2), (3, 4)),
            ("sym_nested", PATTERN_NESTED, (2, 3), (1, 4)),
        ):
            cfg = CascadeConfig(kappa=3.0, alpha=alpha, pts=pts,
                                samples=sym_samples, seed=seed + 17,
                                threads=threads_)
            rep = symmetry_check(cfg, l1, l2)
            ok = ok and rep.passed
            out["cases"][name] = {
                "links": (l1, l2), "z_score": rep.z_score,
                "values": (rep.estimate1.value, rep.estimate2.value),
                "pooled_se": rep.pooled_se, "passed": rep.passed,
            }
        out["passed"] = ok
        return out
    return _timed(run)


# ---------------------------------------------------------------- criterion 10

def suite_martingale(n_samples=10_000, total_time=0.2, seed=99):
    def run():
        out = {"suite": "martingale", "cases": {}}
        kappa = 3.0
        cases = {
            "z_pair": (lambda q: z_pair(kappa, q[0], q[1]), (0.0, 1.0), 1e-4),
            "z_sep": (lambda q: z_four(kappa, PATTERN_SEP, q),
                      (0.0, 1.0, 2.0, 4.0), 1e-4),
            "z_nested": (lambda q: z_four(kappa, PATTERN_NESTED, q),
                         (0.0, 1.0, 2.0, 4.0), 1e-4),
        }
        ok = True
        for name, (f, pts, dt_cap) in cases.items():
            res = martingale_check(kappa, f, pts, 0, total_time, n_samples,
                                   seed, dt_cap=dt_cap)
            case_ok = abs(res.z_score) <= 3.0
            ok = ok and case_ok
            out["cases"][name] = {"z": res.z_score, "mean": res.mean,
                                  "m0": res.m0, "passed": case_ok}
        # negative control: multiplying by (1 + 0.1 x1) breaks the drift;
        # a tightly spaced configuration makes the broken drift large
        def bad(q):
            return z_four(kappa, PATTERN_SEP, q) * (1.0 + 0.1 * q[0])

        ctrl_pts = (0.0, 0.3, 0.6, 1.2)
        res = martingale_check(kappa, bad, ctrl_pts, 0, total_time, n_samples,
                               seed + 1, dt_cap=5e-5, truncation_radius=0.04)
        ctrl_ok = abs(res.z_score) > 3.0
        out["cases"]["perturbed_control"] = {"z": res.z_score, "passed": ctrl_ok}
        out["passed"] = ok and ctrl_ok
        return out
    return _timed(run)


# ---------------------------------------------------------------- criterion 11

def suite_fusion():
    def run():
        out = {"suite": "fusion"}
        res3 = fusion_mod.fused_pde_residual(3.0, 0.0, 1.0, 2.0)
        res5 = fusion_mod.fused_pde_residual(5.0, 0.0, 1.0, 3.0)
        out["pde_residual_k3"] = res3.max_abs
        out["pde_residual_k5"] = res5.max_abs
        lim = fusion_mod.numeric_fusion_limit(3.0, 0.0, 1.0, 2.0)
        want = fusion_mod.fused_z4(3.0, 0.0, 1.0, 2.0)
        out["fusion_limit_rel_err"] = abs(lim - want) / want
        lead_exp, lead_coeff, sub_exp, zp = fusion_mod.ope_coefficients(3.0, 1.0, 2.0)
        h = derive_params(3.0).h
        out["ope_lead_exp_err"] = abs(lead_exp + 2.0 * h)
        out["ope_sub_exp_err"] = abs(sub_exp - 2.0 / 3.0)
        out["ope_coeff_rel_err"] = abs(lead_coeff - zp) / zp
        # collapse constants at the (2,2,s) corners, plus one Gamma evaluation
        nu1 = fusion_mod.nu_const(2, 2, 1, 5.3)
        nu3 = fusion_mod.nu_const(2, 2, 3, 5.3)
        b3 = fusion_mod.b_const(2, 2, 3, 5.3)
        b1_6 = fusion_mod.b_const(2, 2, 1, 6.0)
        want_b1 = math.gamma(1.0 / 3.0) ** 2 / math.gamma(2.0 / 3.0)
        out["constants_err"] = max(abs(nu1 - 1.0), abs(nu3 - 1.0), abs(b3 - 1.0),
                                   abs(b1_6 - want_b1) / want_b1)
        out["passed"] = bool(
            res3.max_abs < 1e-4 and res5.max_abs < 1e-4
            and out["fusion_limit_rel_err"] < 1e-4
            and out["ope_lead_exp_err"] < 1e-2 and out["ope_sub_exp_err"] < 1e-2
            and out["ope_coeff_rel_err"] < 1e-3
            and out["constants_err"] < 1e-12
        )
        return out
    return _timed(run)


# ---------------------------------------------------------------- criterion 12

def suite_coulomb(kappas=(4.5, 5.0, 5.5, 6.0, 6.5, 7.0), n_configs=20,
                  tol_n1=1e-8, tol_n2=1e-6, seed=5):
    def run():
        rng = np.random.default_rng(seed)
        worst1 = 0.0
        for kappa in kappas:
            for _ in range(4):
                x1, x2 = sorted(rng.uniform(-3.0, 3.0, size=2))
                if x2 - x1 < 0.1:
                    continue
                v = coulomb_mod.coulomb_n1(kappa, x1, x2)
                w = z_pair(kappa, x1, x2)
                worst1 = max(worst1, abs(v - w) / abs(w))
        worst2 = 0.0
        configs = [_rand_config(rng, 4) for _ in range(n_configs)]
        for kappa in kappas:
            for xs in configs:
                for alpha in (PATTERN_SEP, PATTERN_NESTED):
                    v = coulomb_mod.coulomb_n2(kappa, alpha, xs)
                    w = z_four(kappa, alpha, xs)
                    worst2 = max(worst2, abs(v - w) / abs(w))
        passed = worst1 <= tol_n1 and worst2 <= tol_n2
        return {"suite": "coulomb", "passed": passed,
                "max_rel_err_n1": worst1, "tol_n1": tol_n1,
                "max_rel_err_n2": worst2, "tol_n2": tol_n2,
                "kappas": list(kappas), "n_configs": n_configs}
    return _timed(run)


# ---------------------------------------------------------------- criterion 13

def suite_ising(sizes=(64, 128), samples=10_000, seed=2024, threads=None,
                burn_in=None):
    # measured integrated autocorrelation times of the connectivity are
    # hundreds to thousands of sweeps, so decorrelated samples come from
    # independent chains (one retained configuration each) rather than from
    # spacing along a single chain
    def run():
        threads_ = threads or _default_threads()
        burns = burn_in or {64: 2500, 128: 4000}
        out = {"suite": "ising", "sizes": {}}
        gaps = []
        for size in sizes:
            cfg = IsingConfig(
                width=size, height=size, marks=corner_marks(size, size),
                samples=samples, n_chains=samples,
                burn_in=burns.get(size, 4000), seed=seed,
            )
            res = crossing_experiment(cfg, threads=threads_)
            gap = res.max_abs_gap()
            gaps.append(gap)
            out["sizes"][size] = {
                "frequencies": {str(a): f for a, f in res.frequencies.items()},
                "predicted": {str(a): p for a, p in res.predicted.items()},
                "stderr": {str(a): e for a, e in res.stderr.items()},
                "max_abs_gap": gap,
                "n_samples": res.n_samples,
            }
        tol = {64: 0.03, 128: 0.02}
        ok = all(gaps[i] <= tol.get(sizes[i], 0.02) for i in range(len(sizes)))
        shrink = gaps[-1] <= gaps[0]
        out["gap_tolerances"] = tol
        out["finite_size_shrinkage"] = shrink
        out["passed"] = bool(ok and shrink)
        return out
    return _timed(run)


ALL_SUITES = {
    "params": suite_params,
    "pde": suite_pde,
    "cov": suite_cov,
    "asy": suite_asy,
    "bounds": suite_bounds,
    "c_kappa": suite_c_kappa,
    "pfaffian": suite_pfaffian,
    "loewner": suite_loewner,
    "mc": suite_mc,
    "martingale": suite_martingale,
    "fusion": suite_fusion,
    "coulomb": suite_coulomb,
    "ising": suite_ising,
}
