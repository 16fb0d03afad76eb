"""Property-verification suites behind `hypfrac verify`.

Each suite runs the testable conclusions for one slice of the theory --
kernel structure, embedding and spectral bounds, Nehari mechanics with the
subcritical solve, the weak maximum principle, and the critically
perturbed solve -- and reports one pass/fail line per property.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import solver
from ._goldens import ODD_KERNEL_FD_ORACLE
from .funcspace import (RadialFunction, assemble_local_forms, dirichlet_sq,
                        lp_norm, make_grid, norm_lambda_sq, schwarz_rearrange,
                        seminorm_s_sq)
from .kernel import build_kernel_table, kernel
from .pipeline import build_forms

SUITE_NAMES = ("kernel", "embedding", "nehari", "maxprinciple", "critical")

KERNEL_DIMS = (2, 3, 4, 5)
KERNEL_ORDERS = (0.25, 0.5, 0.75)


@dataclass
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str = ""


def _profile_family(grid, count=50):
    """Bumps and rings spanning widths and centers; last node pinned."""
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
    return out[:count]


def _random_smooth_profiles(grid, count, seed=20240709):
    """Nonnegative random mixtures of Gaussians.

    Widths stay several cells wide and centers inside r <= 6 so every
    member is resolved by the default grid; rearrangement identities are
    only meaningful for profiles the grid can represent.
    """
    rng = np.random.default_rng(seed)
    r = grid.nodes
    out = []
    for _ in range(count):
        k = rng.integers(2, 6)
        v = np.zeros_like(r)
        for _ in range(k):
            c = rng.uniform(0.0, 6.0)
            sig = rng.uniform(0.5, 2.5)
            a = rng.uniform(0.1, 2.0)
            v += a * np.exp(-((r - c) / sig) ** 2)
        v[-1] = 0.0
        out.append(v)
    return out


def suite_kernel(cache_dir=None) -> list[CheckResult]:
    res = []

    t0 = time.monotonic()
    law_ok, law_bad = True, ""
    rho = np.geomspace(1e-3, 20.0, 200)
    for n_dim in KERNEL_DIMS:
        for s in KERNEL_ORDERS:
            vals = np.asarray(kernel(n_dim, s, rho))
            if not (np.all(vals > 0.0) and np.all(np.diff(vals) < 0.0)):
                law_ok, law_bad = False, f"violation at N={n_dim}, s={s}"
                break
    took = time.monotonic() - t0
    res.append(CheckResult(
        "kernel", "positive and strictly decreasing (12 pairs x 200 pts)",
        law_ok and took < 30.0, law_bad or f"{took:.1f}s"))

    for n_dim in KERNEL_DIMS:
        for s in KERNEL_ORDERS:
            t0 = time.monotonic()
            try:
                tab = build_kernel_table(n_dim, s, 1e-4, 30.0, 400)
                took = time.monotonic() - t0
                ok = took < 10.0
                detail = (f"near {tab.near_exponent:+.3f} (want {-(n_dim + 2 * s)}), "
                          f"far {tab.far_rate:.3f} (want {n_dim - 1}), {took:.1f}s")
            except Exception as exc:  # table rejection is what we're testing for
                ok, detail = False, str(exc)
            res.append(CheckResult("kernel", f"asymptotics N={n_dim} s={s}", ok, detail))

    worst = 0.0
    for (n_dim, s), table in ODD_KERNEL_FD_ORACLE.items():
        rhos = np.array([row[0] for row in table])
        ref = np.array([row[1] for row in table])
        got = np.asarray(kernel(n_dim, s, rhos))
        worst = max(worst, float(np.max(np.abs(got / ref - 1.0))))
    res.append(CheckResult(
        "kernel", "odd-N exact algebra vs finite-difference oracle",
        worst < 1e-6, f"worst rel dev {worst:.2e}"))
    return res


def suite_embedding(cache_dir=None) -> list[CheckResult]:
    res = []
    grids = {}
    for n_nodes in (400, 800):
        grid, _, forms = build_forms(3, 0.5, r_max=20.0, n=n_nodes,
                                     cache_dir=cache_dir)
        grids[n_nodes] = (grid, forms)

    ratios = {}
    for n_nodes, (grid, forms) in grids.items():
        fam = _profile_family(grid)
        ratios[n_nodes] = np.array([
            seminorm_s_sq(RadialFunction(grid, v), forms)
            / dirichlet_sq(RadialFunction(grid, v), forms)
            for v in fam])
    drift = float(np.max(np.abs(ratios[800] / ratios[400] - 1.0)))
    max_ratio = float(ratios[400].max())
    res.append(CheckResult(
        "embedding", "seminorm/Dirichlet ratio finite, stable under doubling",
        np.isfinite(max_ratio) and drift < 0.02,
        f"max ratio {max_ratio:.4f}, drift {drift:.2%}"))

    # embedding constants per order at N = 3
    for s in KERNEL_ORDERS:
        grid, _, forms = build_forms(3, s, r_max=20.0, n=400, cache_dir=cache_dir)
        fam = _profile_family(grid)
        c_emb = max(
            seminorm_s_sq(RadialFunction(grid, v), forms)
            / dirichlet_sq(RadialFunction(grid, v), forms)
            for v in fam)
        res.append(CheckResult(
            "embedding", f"[u]_s^2 <= C grad-energy at s={s}",
            np.isfinite(c_emb) and c_emb > 0.0, f"C = {c_emb:.4f}"))

    # spectral bottom over the family
    grid, forms = grids[400]
    bound = (grid.dim - 1.0) ** 2 / 4.0
    quotients = []
    for v in _profile_family(grid):
        u = RadialFunction(grid, v)
        quotients.append(dirichlet_sq(u, forms) / lp_norm(u, 2.0) ** 2)
    qmin = float(min(quotients))
    res.append(CheckResult(
        "embedding", "Rayleigh quotients >= 0.98 (N-1)^2/4 across family",
        qmin >= 0.98 * bound, f"min {qmin:.4f} vs bound {bound:.4f}"))

    # broad profile approaches the bottom from above (local forms suffice)
    big = make_grid(3, r_max=80.0, n=1600)
    stiff, mass = assemble_local_forms(big)
    prof = (big.r_max - big.nodes) * np.exp(-big.nodes * (big.dim - 1) / 2.0)
    prof[-1] = 0.0
    q_broad = float(prof @ stiff @ prof) / float(prof @ mass @ prof)
    res.append(CheckResult(
        "embedding", "broad profile within 5% of the spectral bottom",
        bound <= q_broad <= 1.05 * bound, f"{q_broad:.5f} vs {bound:.5f}"))
    return res


def _subcritical_setup(cache_dir=None):
    grid, _, forms = build_forms(3, 0.5, r_max=20.0, n=400, cache_dir=cache_dir)
    spec = solver.ProblemSpec(N=3, s=0.5, lam=0.0, p=3.0, mode="subcritical")
    init = RadialFunction(grid, np.exp(-grid.nodes ** 2))
    report = solver.solve_subcritical(spec, init, forms, tol=1e-6)
    return grid, forms, spec, init, report


def suite_nehari(cache_dir=None) -> list[CheckResult]:
    res = []
    grid, forms, spec, init, report = _subcritical_setup(cache_dir)

    worst_t, worst_scale = 0.0, 0.0
    for v in _random_smooth_profiles(grid, 100):
        u = RadialFunction(grid, v)
        proj = solver.nehari_project(u, spec, forms)
        worst_t = max(worst_t, abs(solver.nehari_scale(proj, spec, forms) - 1.0))
        again = solver.nehari_project(RadialFunction(grid, 10.0 * v), spec, forms)
        scale_dev = float(np.max(np.abs(again.values - proj.values)))
        worst_scale = max(worst_scale, scale_dev / max(np.abs(proj.values).max(), 1e-30))
    res.append(CheckResult(
        "nehari", "projection idempotent and scale invariant (100 profiles)",
        worst_t < 1e-10 and worst_scale < 1e-12,
        f"t dev {worst_t:.2e}, scale dev {worst_scale:.2e}"))

    u = report.solution
    unorm = np.sqrt(norm_lambda_sq(u, spec.lam, forms))
    peak = float(np.abs(u.values).max())
    ident = abs(report.energy - 0.25 * lp_norm(u, spec.p + 1.0) ** (spec.p + 1.0))
    res.append(CheckResult(
        "nehari", "subcritical ground state at (3, 0.5, 0, 3)",
        report.converged and report.residual < 1e-6 * unorm
        and bool(np.all(u.values >= -1e-8 * peak))
        and bool(np.all(np.diff(u.values) <= 1e-8 * peak))
        and ident < 1e-8 * abs(report.energy),
        f"c* = {report.c_star:.6f}, residual {report.residual:.2e}, "
        f"identity dev {ident / abs(report.energy):.2e}"))

    level = solver.mountain_pass_level_subcritical(spec, u, forms)
    dev = abs(level - report.c_star) / report.c_star
    res.append(CheckResult(
        "nehari", "path minimax equals Nehari minimum within 1%",
        dev < 0.01, f"c = {level:.6f}, c* = {report.c_star:.6f}, dev {dev:.2%}"))

    spec_shift = solver.ProblemSpec(N=3, s=0.5, lam=0.5, p=3.0, mode="subcritical")
    rep_shift = solver.solve_subcritical(spec_shift, init, forms, tol=1e-6)
    res.append(CheckResult(
        "nehari", "minimum level decreases as lambda increases",
        rep_shift.converged and rep_shift.c_star < report.c_star,
        f"{rep_shift.c_star:.6f} < {report.c_star:.6f}"))

    # L^q preservation is limited by the level resolution |grad u| * h of
    # the coarsest cells, so it is measured on a finer grid (no forms
    # needed there); the energy comparisons stay on the assembled grid
    fine = make_grid(3, r_max=20.0, n=2000)
    worst_lq = 0.0
    for v in _random_smooth_profiles(fine, 100, seed=777):
        u0 = RadialFunction(fine, v)
        star = schwarz_rearrange(u0)
        for q in (2.0, 4.0, 6.0):
            worst_lq = max(worst_lq, abs(lp_norm(star, q) / lp_norm(u0, q) - 1.0))
    worst_energy = -1.0
    for v in _random_smooth_profiles(grid, 100, seed=777):
        u0 = RadialFunction(grid, v)
        star = schwarz_rearrange(u0)
        d0, d1 = dirichlet_sq(u0, forms), dirichlet_sq(star, forms)
        s0, s1 = seminorm_s_sq(u0, forms), seminorm_s_sq(star, forms)
        worst_energy = max(worst_energy, (d1 - d0) / max(d0, 1e-30),
                           (s1 - s0) / max(s0, 1e-30))
    res.append(CheckResult(
        "nehari", "rearrangement preserves L^q, does not increase energies",
        worst_lq < 1e-3 and worst_energy < 1e-3,
        f"L^q drift {worst_lq:.2e}, energy increase {worst_energy:.2e}"))
    return res


def suite_maxprinciple(cache_dir=None) -> list[CheckResult]:
    res = []
    grid, forms, spec, _, report = _subcritical_setup(cache_dir)
    check = solver.weak_max_check(report.solution, spec, forms)
    res.append(CheckResult(
        "maxprinciple", "converged solution passes the negative-part test",
        report.converged and check.passes,
        f"min {check.min_value:.2e}, |u^-|_l^2 {check.neg_norm_lambda_sq:.2e}"))

    bad = np.exp(-grid.nodes ** 2) - 0.5 * np.exp(-((grid.nodes - 3.0) / 0.8) ** 2)
    bad[-1] = 0.0
    check_bad = solver.weak_max_check(RadialFunction(grid, bad), spec, forms)
    res.append(CheckResult(
        "maxprinciple", "sign-changing profile fails the test",
        not check_bad.passes, f"min {check_bad.min_value:.3f}"))
    return res


CRITICAL_PINNED = dict(N=3, s=0.5, lam=0.5, p=3.0)
CRITICAL_RESOLVED = dict(N=5, s=0.5, lam=1.0, p=2.0, r_max=12.0)


def suite_critical(cache_dir=None) -> list[CheckResult]:
    res = []

    # pinned configuration: record the (deterministic) outcome of the seed
    # search; at this parameter point the documented outcome matters, not a
    # particular branch
    grid, _, forms = build_forms(3, 0.5, r_max=20.0, n=400, cache_dir=cache_dir)
    spec = solver.ProblemSpec(N=CRITICAL_PINNED["N"], s=CRITICAL_PINNED["s"],
                              lam=CRITICAL_PINNED["lam"], p=CRITICAL_PINNED["p"],
                              mode="critical_perturbed")
    first = solver.search_threshold_seed(spec, forms)
    second = solver.search_threshold_seed(spec, forms)
    deterministic = (
        first.best_check.sup_value == second.best_check.sup_value
        and first.best_check.threshold == second.best_check.threshold
        and (first.seed is None) == (second.seed is None)
    )
    outcome = "seed found" if first.seed is not None else "threshold failure"
    res.append(CheckResult(
        "critical", "seed search at (3, 0.5, 0.5, 3) deterministic",
        deterministic,
        f"{outcome}: best sup {first.best_check.sup_value:.4f} "
        f"vs threshold {first.best_check.threshold:.4f}"))

    if first.seed is not None:
        report = solver.solve_critical(spec, first.seed, forms, tol=1e-6)
        res.append(CheckResult(
            "critical", "mountain-pass solve at the pinned configuration",
            report.converged and report.beta <= report.mp_level_m < report.threshold,
            f"m = {report.mp_level_m:.5f}"))

    # resolved configuration: the full mountain-pass pipeline end to end
    cfg = CRITICAL_RESOLVED
    grid5, _, forms5 = build_forms(cfg["N"], cfg["s"], r_max=cfg["r_max"],
                                   n=400, cache_dir=cache_dir)
    spec5 = solver.ProblemSpec(N=cfg["N"], s=cfg["s"], lam=cfg["lam"],
                               p=cfg["p"], mode="critical_perturbed")
    found = solver.search_threshold_seed(spec5, forms5)
    if found.seed is None:
        res.append(CheckResult("critical", "resolved configuration seed search",
                               False, "no passing seed"))
        return res
    report = solver.solve_critical(spec5, found.seed, forms5, tol=1e-6)
    unorm = np.sqrt(norm_lambda_sq(report.solution, cfg["lam"], forms5))
    u0norm = np.sqrt(norm_lambda_sq(found.seed, cfg["lam"], forms5))
    res.append(CheckResult(
        "critical", "mountain-pass solve at (5, 0.5, 1, 2)",
        report.converged and report.residual < 1e-6
        and report.beta <= report.mp_level_m < report.threshold
        and unorm > 0.01 * u0norm,
        f"beta {report.beta:.4f} <= m {report.mp_level_m:.4f} "
        f"< threshold {report.threshold:.4f}, residual {report.residual:.2e}"))

    ray = solver.critical_ray_level(spec5, found.seed, forms5)
    dev = abs(ray - report.mp_level_m) / report.mp_level_m
    res.append(CheckResult(
        "critical", "independent ray-maximization level within 2%",
        dev < 0.02, f"ray {ray:.5f} vs m {report.mp_level_m:.5f} ({dev:.3%})"))

    check = solver.weak_max_check(report.solution, spec5, forms5)
    res.append(CheckResult(
        "critical", "critical solution passes the negative-part test",
        check.passes, f"min {check.min_value:.2e}"))
    return res


_SUITES = {
    "kernel": suite_kernel,
    "embedding": suite_embedding,
    "nehari": suite_nehari,
    "maxprinciple": suite_maxprinciple,
    "critical": suite_critical,
}


def run_suites(names, cache_dir=None, out=print) -> bool:
    results = []
    for name in names:
        t0 = time.monotonic()
        results.extend(_SUITES[name](cache_dir=cache_dir))
        out(f"[{name}] completed in {time.monotonic() - t0:.1f}s")
    width = max(len(r.name) for r in results) + 2
    all_ok = True
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        out(f"  {status}  [{r.suite}] {r.name:<{width}} {r.detail}")
        all_ok &= r.passed
    failing = [r for r in results if not r.passed]
    if failing:
        out(f"{len(failing)} failing invariant(s):")
        for r in failing:
            out(f"  - [{r.suite}] {r.name}")
    else:
        out(f"all {len(results)} checks passed")
    return all_ok
