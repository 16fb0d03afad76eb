"""Acceptance gate: every graduation criterion at its stated tolerance.

Each test prints one PASS/FAIL line (visible with -s or on failure); the
assertions pin the tolerances exactly as specified, nothing is deferred
to later calibration.
"""

import json
import math
import subprocess
import sys
import time

import numpy as np

from conftest import random_smooth_profiles
from hypfrac._goldens import ODD_KERNEL_FD_ORACLE
from hypfrac.funcspace import (RadialFunction, assemble_local_forms,
                               dirichlet_sq, lp_norm, make_grid,
                               norm_lambda_sq, schwarz_rearrange,
                               seminorm_s_sq)
from hypfrac.kernel import build_kernel_table, kernel
from hypfrac.solver import (ProblemSpec, mountain_pass_level_subcritical,
                            nehari_project, nehari_scale,
                            search_threshold_seed, weak_max_check)

DIMS = (2, 3, 4, 5)
ORDERS = (0.25, 0.5, 0.75)


def report(num, passed, detail):
    status = "PASS" if passed else "FAIL"
    print(f"criterion {num:2d}: {status} -- {detail}")
    assert passed, f"criterion {num}: {detail}"


def embedding_family(grid):
    out = []
    r = grid.nodes
    for c in (0.0, 0.5, 1.0, 2.0, 4.0, 8.0):
        for sig in (0.25, 0.5, 1.0, 2.0, 3.0):
            out.append(np.exp(-((r - c) / sig) ** 2))
    for c in (0.5, 1.0, 2.0, 4.0):
        for sig in (0.3, 0.6, 1.2, 2.4, 4.0):
            out.append((r / (c + sig)) ** 2 * np.exp(-((r - c) / sig) ** 2))
    for v in out:
        v[-1] = 0.0
    assert len(out) == 50
    return out


def test_criterion_1_kernel_law():
    rho = np.geomspace(1e-3, 20.0, 200)
    t0 = time.monotonic()
    ok = True
    for n_dim in DIMS:
        for s in ORDERS:
            vals = np.asarray(kernel(n_dim, s, rho))
            ok &= bool(np.all(vals > 0.0) and np.all(np.diff(vals) < 0.0))
    took = time.monotonic() - t0
    report(1, ok and took < 30.0,
           f"12 pairs positive and strictly decreasing, {took:.1f}s (< 30s)")


def test_criterion_2_kernel_asymptotics():
    worst_near, worst_far, worst_time = 0.0, 0.0, 0.0
    for n_dim in DIMS:
        for s in ORDERS:
            t0 = time.monotonic()
            tab = build_kernel_table(n_dim, s, 1e-4, 30.0, 400)
            worst_time = max(worst_time, time.monotonic() - t0)
            worst_near = max(worst_near, abs(tab.near_exponent + n_dim + 2 * s))
            worst_far = max(worst_far,
                            abs(tab.far_rate - (n_dim - 1)) / (n_dim - 1))
    report(2, worst_near < 0.05 and worst_far < 0.01 and worst_time < 10.0,
           f"near slope dev {worst_near:.4f} (< 0.05), far rate dev "
           f"{worst_far:.2%} (< 1%), slowest pair {worst_time:.1f}s (< 10s)")


def test_criterion_3_odd_exactness():
    worst = 0.0
    for (n_dim, s), rows in ODD_KERNEL_FD_ORACLE.items():
        rho = np.array([r for r, _ in rows])
        ref = np.array([v for _, v in rows])
        got = np.asarray(kernel(n_dim, s, rho))
        worst = max(worst, float(np.max(np.abs(got / ref - 1.0))))
    report(3, worst < 1e-6,
           f"term algebra vs finite-difference oracle, worst {worst:.2e} (< 1e-6)")


def test_criterion_4_embedding_stability(setup3, setup3_fine):
    ratios = {}
    for grid, forms in ((setup3[0], setup3[2]), (setup3_fine[0], setup3_fine[2])):
        vals = []
        for v in embedding_family(grid):
            u = RadialFunction(grid, v)
            vals.append(seminorm_s_sq(u, forms) / dirichlet_sq(u, forms))
        ratios[grid.n] = np.asarray(vals)
    max_ratio = float(ratios[400].max())
    drift = float(np.max(np.abs(ratios[800] / ratios[400] - 1.0)))
    report(4, math.isfinite(max_ratio) and drift < 0.02,
           f"max ratio {max_ratio:.4f} finite, doubling drift {drift:.2%} (< 2%)")


def test_criterion_5_spectral_bottom(setup3):
    grid, _, forms = setup3
    bound = (grid.dim - 1.0) ** 2 / 4.0
    qmin = math.inf
    for v in embedding_family(grid):
        u = RadialFunction(grid, v)
        qmin = min(qmin, dirichlet_sq(u, forms) / lp_norm(u, 2.0) ** 2)
    big = make_grid(3, r_max=80.0, n=1600)
    stiff, mass = assemble_local_forms(big)
    prof = (big.r_max - big.nodes) * np.exp(-big.nodes * (big.dim - 1) / 2.0)
    prof[-1] = 0.0
    q_broad = float(prof @ stiff @ prof) / float(prof @ mass @ prof)
    report(5, qmin >= 0.98 * bound and bound <= q_broad <= 1.05 * bound,
           f"family min {qmin:.4f} >= {0.98 * bound:.4f}, broad probe "
           f"{q_broad:.4f} within 5% of {bound:.4f}")


def test_criterion_6_nehari_mechanics(setup3):
    grid, _, forms = setup3
    spec = ProblemSpec(N=3, s=0.5, lam=0.0, p=3.0, mode="subcritical")
    worst_t, worst_scale = 0.0, 0.0
    for v in random_smooth_profiles(grid, 100, seed=606):
        u = RadialFunction(grid, v)
        proj = nehari_project(u, spec, forms)
        worst_t = max(worst_t, abs(nehari_scale(proj, spec, forms) - 1.0))
        peak = float(np.abs(proj.values).max())
        for alpha in (0.1, 10.0):
            again = nehari_project(RadialFunction(grid, alpha * v), spec, forms)
            worst_scale = max(
                worst_scale,
                float(np.max(np.abs(again.values - proj.values))) / peak)
    report(6, worst_t < 1e-10 and worst_scale < 1e-12,
           f"idempotence dev {worst_t:.2e} (< 1e-10), projection scale "
           f"invariance {worst_scale:.2e} (< 1e-12), 100 profiles")


def test_criterion_7_subcritical_solve(setup3, subcritical_report):
    grid, _, forms = setup3
    from hypfrac.solver import solve_subcritical

    spec = ProblemSpec(N=3, s=0.5, lam=0.0, p=3.0, mode="subcritical")
    init = RadialFunction(grid, np.exp(-grid.nodes ** 2))
    t0 = time.monotonic()
    rep = solve_subcritical(spec, init, forms, tol=1e-6)
    took = time.monotonic() - t0
    u = rep.solution
    unorm = math.sqrt(norm_lambda_sq(u, 0.0, forms))
    peak = float(u.values.max())
    identity = abs(rep.energy - 0.25 * lp_norm(u, 4.0) ** 4) / abs(rep.energy)
    ok = (rep.converged
          and rep.residual < 1e-6 * unorm
          and bool(np.all(u.values >= -1e-8 * peak))
          and bool(np.all(np.diff(u.values) <= 1e-8 * peak))
          and identity < 1e-8
          and took < 120.0)
    report(7, ok,
           f"converged, residual {rep.residual / unorm:.2e} (< 1e-6 rel), "
           f"nonnegative nonincreasing, identity {identity:.2e} (< 1e-8), "
           f"{took:.1f}s (< 120s)")


def test_criterion_8_level_agreement(setup3, subcritical_report):
    grid, _, forms = setup3
    spec, rep = subcritical_report
    level = mountain_pass_level_subcritical(spec, rep.solution, forms)
    dev = abs(level - rep.c_star) / rep.c_star
    report(8, dev < 0.01,
           f"path minimax {level:.6f} vs Nehari minimum {rep.c_star:.6f}, "
           f"agreement {dev:.3%} (< 1%)")


def test_criterion_9_critical_outcome(setup3, cache_dir, tmp_path):
    grid, _, forms = setup3
    spec = ProblemSpec(N=3, s=0.5, lam=0.5, p=3.0, mode="critical_perturbed")
    runs = [search_threshold_seed(spec, forms) for _ in range(2)]
    same = (runs[0].best_check.sup_value == runs[1].best_check.sup_value
            and runs[0].best_check.threshold == runs[1].best_check.threshold
            and (runs[0].seed is None) == (runs[1].seed is None))

    if runs[0].seed is not None:
        from hypfrac.solver import solve_critical

        reports = [solve_critical(spec, run.seed, forms, tol=1e-6)
                   for run in runs]
        ok = (same
              and all(r.converged and r.residual < 1e-6 for r in reports)
              and all(r.beta <= r.mp_level_m < r.threshold for r in reports)
              and reports[0].mp_level_m == reports[1].mp_level_m)
        detail = (f"seed passes; m = {reports[0].mp_level_m:.6f} reproduced, "
                  f"residual {reports[0].residual:.2e}")
    else:
        # documented threshold failure: the CLI must exit 4 with the pair
        # printed, reproducibly
        cfg = tmp_path / "crit.json"
        cfg.write_text(json.dumps({
            "problem": {"N": 3, "s": 0.5, "lambda": 0.5, "p": 3.0,
                        "mode": "critical_perturbed"},
            "grid": {"R_max": 20.0, "node_count": 400, "spacing": "graded"},
            "io": {"out_dir": str(tmp_path / "out"),
                   "cache_dir": str(cache_dir)},
        }))
        outs = []
        for _ in range(2):
            proc = subprocess.run(
                [sys.executable, "-m", "hypfrac.cli", "solve",
                 "--config", str(cfg)],
                capture_output=True, text=True)
            outs.append((proc.returncode, proc.stdout))
        ok = (same
              and outs[0][0] == outs[1][0] == 4
              and "sup_value=" in outs[0][1]
              and outs[0][1] == outs[1][1])
        detail = (f"threshold failure documented (exit 4), best sup "
                  f"{runs[0].best_check.sup_value:.4f} vs threshold "
                  f"{runs[0].best_check.threshold:.4f}, reproduced")
    report(9, ok, detail)


def test_criterion_10_symmetrization(setup3):
    grid, _, forms = setup3
    fine = make_grid(3, r_max=20.0, n=2000)
    worst_lq = 0.0
    for v in random_smooth_profiles(fine, 100, seed=1010):
        u = RadialFunction(fine, v)
        star = schwarz_rearrange(u)
        for q in (2.0, 4.0, 6.0):
            worst_lq = max(worst_lq, abs(lp_norm(star, q) / lp_norm(u, q) - 1.0))
    worst_energy = -1.0
    for v in random_smooth_profiles(grid, 100, seed=1010):
        u = RadialFunction(grid, v)
        star = schwarz_rearrange(u)
        d0, d1 = dirichlet_sq(u, forms), dirichlet_sq(star, forms)
        s0, s1 = seminorm_s_sq(u, forms), seminorm_s_sq(star, forms)
        worst_energy = max(worst_energy, (d1 - d0) / d0, (s1 - s0) / s0)
    report(10, worst_lq < 1e-3 and worst_energy < 1e-3,
           f"100 profiles: L^q drift {worst_lq:.2e} (< 1e-3), energy "
           f"increase {worst_energy:.2e} (< 1e-3)")


def test_criterion_11_weak_maximum_principle(setup3, setup5,
                                             subcritical_report,
                                             critical_report):
    grid, _, forms = setup3
    spec, rep = subcritical_report
    sub_ok = weak_max_check(rep.solution, spec, forms).passes

    spec5, _, rep5 = critical_report
    crit_ok = weak_max_check(rep5.solution, spec5, setup5[2]).passes

    bad = np.exp(-grid.nodes ** 2) \
        - 0.4 * np.exp(-((grid.nodes - 3.0) / 0.7) ** 2)
    bad[-1] = 0.0
    neg = weak_max_check(RadialFunction(grid, bad), spec, forms)
    report(11, sub_ok and crit_ok and not neg.passes,
           "converged solutions pass, synthetic sign-changing profile fails")


def test_criterion_12_verify_all(cache_dir):
    t0 = time.monotonic()
    proc = subprocess.run(
        [sys.executable, "-m", "hypfrac.cli", "verify", "--suite", "all",
         "--cache-dir", str(cache_dir)],
        capture_output=True, text=True)
    took = time.monotonic() - t0
    ok = proc.returncode == 0 and took < 600.0
    report(12, ok,
           f"`verify --suite all` exit {proc.returncode} in {took:.0f}s (< 600s)")
    if not ok:
        print(proc.stdout[-3000:])
