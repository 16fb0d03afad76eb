import numpy as np
import pytest

from hypfrac.pipeline import build_forms


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("hypfrac_cache")


@pytest.fixture(scope="session")
def setup3(cache_dir):
    """Grid, reduced kernel, forms at (N, s) = (3, 0.5), 400 nodes."""
    return build_forms(3, 0.5, r_max=20.0, n=400, cache_dir=cache_dir)


@pytest.fixture(scope="session")
def setup3_fine(cache_dir):
    """Doubled-resolution companion of setup3."""
    return build_forms(3, 0.5, r_max=20.0, n=800, cache_dir=cache_dir)


@pytest.fixture(scope="session")
def setup5(cache_dir):
    """Grid, reduced kernel, forms at (N, s) = (5, 0.5) for critical runs."""
    return build_forms(5, 0.5, r_max=12.0, n=400, cache_dir=cache_dir)


@pytest.fixture(scope="session")
def subcritical_report(setup3):
    from hypfrac.funcspace import RadialFunction
    from hypfrac.solver import ProblemSpec, solve_subcritical

    grid, _, forms = setup3
    spec = ProblemSpec(N=3, s=0.5, lam=0.0, p=3.0, mode="subcritical")
    init = RadialFunction(grid, np.exp(-grid.nodes ** 2))
    return spec, solve_subcritical(spec, init, forms, tol=1e-6)


@pytest.fixture(scope="session")
def critical_report(setup5):
    from hypfrac.solver import ProblemSpec, search_threshold_seed, solve_critical

    grid, _, forms = setup5
    spec = ProblemSpec(N=5, s=0.5, lam=1.0, p=2.0, mode="critical_perturbed")
    search = search_threshold_seed(spec, forms)
    assert search.seed is not None
    return spec, search, solve_critical(spec, search.seed, forms, tol=1e-6)


def random_smooth_profiles(grid, count, seed=20240709):
    """Resolved nonnegative random Gaussian mixtures (shared test family)."""
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
