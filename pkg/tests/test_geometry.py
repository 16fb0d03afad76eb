import math

import numpy as np
import pytest
from scipy.integrate import quad

from hypfrac.errors import DomainError
from hypfrac.geometry import (BallPoint, ball_volume, geodesic_distance,
                              mobius_translate, radial_volume_weight,
                              sphere_area)

RNG = np.random.default_rng(42)


def random_point(dim=3, rmax=0.9):
    v = RNG.normal(size=dim)
    v *= RNG.uniform(0.0, rmax) / np.linalg.norm(v)
    return BallPoint(v)


def test_distance_coincident_points():
    x = random_point()
    assert float(geodesic_distance(x, x)) == 0.0


def test_distance_origin_to_half_radius():
    # log((1 + 1/2) / (1 - 1/2)) = log 3
    x = BallPoint([0.5, 0.0, 0.0])
    o = BallPoint([0.0, 0.0, 0.0])
    assert float(geodesic_distance(o, x)) == pytest.approx(math.log(3.0), rel=1e-14)


def test_distance_symmetry():
    for _ in range(20):
        x, y = random_point(), random_point()
        assert float(geodesic_distance(x, y)) == pytest.approx(
            float(geodesic_distance(y, x)), rel=1e-13)


def test_triangle_inequality():
    for _ in range(50):
        x, y, z = random_point(), random_point(), random_point()
        dxz = float(geodesic_distance(x, z))
        dxy = float(geodesic_distance(x, y))
        dyz = float(geodesic_distance(y, z))
        assert dxz <= dxy + dyz + 1e-12


def test_mobius_sends_center_to_origin():
    a = random_point()
    assert mobius_translate(a, a).norm() == pytest.approx(0.0, abs=1e-15)


def test_mobius_at_origin_preserves_norm():
    o = BallPoint([0.0, 0.0, 0.0])
    for _ in range(10):
        x = random_point()
        assert mobius_translate(o, x).norm() == pytest.approx(x.norm(), rel=1e-14)


def test_mobius_is_isometry():
    for _ in range(30):
        a, x, y = random_point(), random_point(), random_point()
        before = float(geodesic_distance(x, y))
        after = float(geodesic_distance(mobius_translate(a, x),
                                        mobius_translate(a, y)))
        assert after == pytest.approx(before, abs=1e-10)


def test_near_boundary_rejected():
    with pytest.raises(DomainError):
        BallPoint([1.0 - 1e-13, 0.0, 0.0])
    with pytest.raises(DomainError):
        BallPoint([1.1, 0.0, 0.0])


def test_volume_weight_vanishes_at_origin():
    for n in (2, 3, 4, 5):
        assert radial_volume_weight(n, 0.0) == 0.0


def test_volume_weight_closed_form_n3():
    assert radial_volume_weight(3, 1.0) == pytest.approx(
        4.0 * math.pi * math.sinh(1.0) ** 2, rel=1e-14)


def test_volume_weight_rejects_low_dimension():
    with pytest.raises(DomainError):
        radial_volume_weight(1, 1.0)


def test_volume_matches_quadrature_oracle():
    # volume in ball coordinates: integrate the conformal density over the
    # Euclidean radius t = tanh(r/2)
    for n, rr in ((2, 1.5), (3, 2.0), (4, 1.0)):
        t_max = math.tanh(rr / 2.0)
        oracle, _ = quad(
            lambda t: sphere_area(n) * (2.0 / (1.0 - t * t)) ** n * t ** (n - 1),
            0.0, t_max, limit=200)
        assert ball_volume(n, rr) == pytest.approx(oracle, rel=1e-8)


def test_volume_weight_exponential_growth_rate():
    for n in (2, 3, 5):
        ratio = radial_volume_weight(n, 30.0) / math.exp((n - 1) * 30.0)
        assert ratio == pytest.approx(sphere_area(n) / 2.0 ** (n - 1), rel=1e-6)
