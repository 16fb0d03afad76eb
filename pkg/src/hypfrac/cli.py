"""Batch front-end: kernel tabulation, solves, and the verification suites.

Exit codes: 0 success; 1 failing verification suite; 2 validation or
usage error; 3 numerical failure; 4 energy-threshold failure in critical
mode.  Reports are deterministic for a fixed config (timestamps go to a
separate metadata file), so repeated runs are byte-identical and
diff-able.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, solver
from .cache import default_cache_dir
from .errors import (ConvergenceError, DomainError, QuadratureError,
                     ReducedKernelError, TableRejectionError,
                     ThresholdNotMetError)
from .funcspace import RadialFunction, lp_norm
from .kernel import build_kernel_table
from .pipeline import build_forms
from .verify import SUITE_NAMES, run_suites

EXIT_OK = 0
EXIT_SUITE_FAILURE = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_THRESHOLD = 4


@dataclass
class RunConfig:
    """Validated run configuration; mirrors the JSON schema in the docs."""

    problem: solver.ProblemSpec
    r_max: float = 20.0
    node_count: int = 400
    spacing: str = "graded"
    tol: float = 1e-6
    max_iter: int = 400
    path_nodes: int = 48
    out_dir: Path = Path("out")
    cache_dir: Path | None = None
    formats: tuple = ("json", "csv")

    @classmethod
    def from_file(cls, path, mode_override=None) -> "RunConfig":
        with open(path) as fh:
            raw = json.load(fh)
        prob = raw.get("problem", {})
        mode = mode_override or prob.get("mode", "subcritical")
        if mode == "critical":
            mode = "critical_perturbed"
        spec = solver.ProblemSpec(
            N=int(prob["N"]), s=float(prob["s"]),
            lam=float(prob.get("lambda", 0.0)),
            p=float(prob.get("p", 3.0)), mode=mode,
        )
        grid = raw.get("grid", {})
        sol = raw.get("solver", {})
        io = raw.get("io", {})
        cache_dir = io.get("cache_dir")
        return cls(
            problem=spec,
            r_max=float(grid.get("R_max", 20.0)),
            node_count=int(grid.get("node_count", 400)),
            spacing=str(grid.get("spacing", "graded")),
            tol=float(sol.get("tol", 1e-6)),
            max_iter=int(sol.get("max_iter", 400)),
            path_nodes=int(sol.get("path_nodes", 48)),
            out_dir=Path(io.get("out_dir", "out")),
            cache_dir=Path(cache_dir) if cache_dir else None,
            formats=tuple(io.get("formats", ("json", "csv"))),
        )


def _write_json(path: Path, payload: dict):
    path.write_text(json.dumps(payload, indent=1) + "\n")


def cmd_kernel(args) -> int:
    try:
        table = build_kernel_table(args.dim, args.s, args.rho_min,
                                   args.rho_max, args.points)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (TableRejectionError, QuadratureError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(out)
    print(f"wrote {args.points}-point table to {out} "
          f"(near exponent {table.near_exponent:+.4f}, far rate {table.far_rate:.4f})")
    return EXIT_OK


def _solve_outputs(cfg: RunConfig, report: solver.SolveReport, extras: dict):
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    profile_name = "profile.csv"
    report.solution.to_csv(cfg.out_dir / profile_name)
    payload = report.to_dict(solution_ref=profile_name)
    _write_json(cfg.out_dir / "report.json", payload)
    with open(cfg.out_dir / "convergence.csv", "w") as fh:
        fh.write("iteration,energy\n")
        for i, e in enumerate(report.energy_history):
            fh.write(f"{i},{e:.17g}\n")
    metadata = {"timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
                "hypfrac_version": __version__}
    metadata.update(extras)
    _write_json(cfg.out_dir / "metadata.json", metadata)


def cmd_solve(args) -> int:
    try:
        cfg = RunConfig.from_file(args.config, mode_override=args.mode)
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError,
            DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    try:
        grid, _, forms = build_forms(
            cfg.problem.N, cfg.problem.s, r_max=cfg.r_max, n=cfg.node_count,
            spacing=cfg.spacing, cache_dir=cfg.cache_dir)
    except (QuadratureError, TableRejectionError, ReducedKernelError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    spec = cfg.problem
    try:
        if spec.mode == "subcritical":
            init = RadialFunction(grid, np.exp(-grid.nodes ** 2))
            report = solver.solve_subcritical(spec, init, forms, tol=cfg.tol,
                                              max_iter=cfg.max_iter)
            check = solver.weak_max_check(report.solution, spec, forms)
            identity = abs(report.energy
                           - (0.5 - 1.0 / (spec.p + 1.0))
                           * lp_norm(report.solution, spec.p + 1.0) ** (spec.p + 1.0))
            invariants_ok = (check.passes
                             and identity < 1e-8 * abs(report.energy)
                             and report.c_star > 0.0)
            extras = {"mode": spec.mode}
        else:
            search = solver.search_threshold_seed(spec, forms)
            if search.seed is None:
                print(f"threshold failure: sup_value={search.best_check.sup_value:.8g} "
                      f"threshold={search.best_check.threshold:.8g}")
                return EXIT_THRESHOLD
            report = solver.solve_critical(spec, search.seed, forms, tol=cfg.tol,
                                           path_nodes=cfg.path_nodes)
            check = solver.weak_max_check(report.solution, spec, forms)
            invariants_ok = check.passes
            extras = {"mode": spec.mode, "seed_candidates_tried": search.tried}
    except ThresholdNotMetError as exc:
        print(f"threshold failure: sup_value={exc.sup_value:.8g} "
              f"threshold={exc.threshold:.8g}")
        return EXIT_THRESHOLD
    except (ConvergenceError, QuadratureError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    _solve_outputs(cfg, report, extras)
    status = "converged" if report.converged else "NOT converged"
    print(f"{status}: energy {report.energy:.8f}, residual {report.residual:.3e}, "
          f"outputs in {cfg.out_dir}")
    return EXIT_OK if (report.converged and invariants_ok) else EXIT_NUMERICAL


def cmd_verify(args) -> int:
    names = SUITE_NAMES if args.suite == "all" else (args.suite,)
    cache = Path(args.cache_dir) if args.cache_dir else default_cache_dir()
    ok = run_suites(names, cache_dir=cache)
    return EXIT_OK if ok else EXIT_SUITE_FAILURE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypfrac",
        description="Hyperbolic mixed local-nonlocal kernels, forms, and solves",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    k = sub.add_parser("kernel", help="tabulate the radial kernel to CSV")
    k.add_argument("--dim", type=int, required=True)
    k.add_argument("--s", type=float, required=True)
    k.add_argument("--rho-min", type=float, required=True)
    k.add_argument("--rho-max", type=float, required=True)
    k.add_argument("--points", type=int, required=True)
    k.add_argument("--out", default="kernel_table.csv")
    k.set_defaults(func=cmd_kernel)

    s = sub.add_parser("solve", help="run a ground-state or mountain-pass solve")
    s.add_argument("--config", required=True)
    s.add_argument("--mode", choices=("subcritical", "critical"), default=None)
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="run the property-verification suites")
    v.add_argument("--suite", choices=SUITE_NAMES + ("all",), required=True)
    v.add_argument("--cache-dir", default=None)
    v.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
