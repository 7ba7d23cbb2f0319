import math

import numpy as np
import pytest

from maxsobolev.measures import (check_spherical_like, cube_boundary, dirac, from_points,
                                 make_measure, spherical_like_constant,
                                 spherical_like_search, unit_ball, unit_sphere)


@pytest.mark.parametrize("build", [unit_sphere, unit_ball, cube_boundary])
@pytest.mark.parametrize("n", [2, 3])
def test_probability_and_centred(build, n):
    mu = build(n)
    assert mu.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.abs(mu.weights @ mu.nodes).max() < 1e-10


@pytest.mark.parametrize("n", [2, 3])
def test_sphere_nodes_on_sphere(n):
    mu = unit_sphere(n, 500)
    assert mu.integrate(lambda z: np.sum(z**2, axis=1)) == pytest.approx(1.0, abs=1e-14)
    assert mu.R == 1.0


def test_sphere_second_moments_isotropic():
    mu = unit_sphere(3, 4096)
    cov = (mu.nodes * mu.weights[:, None]).T @ mu.nodes
    assert np.allclose(cov, np.eye(3) / 3, atol=1e-3)


def test_ball_second_moment():
    # int_0^1 r^2 * 3 r^2 dr = 3/5 in three dimensions, 1/2 in two
    assert unit_ball(3).integrate(lambda z: np.sum(z**2, axis=1)) == pytest.approx(0.6, abs=1e-3)
    assert unit_ball(2).integrate(lambda z: np.sum(z**2, axis=1)) == pytest.approx(0.5, abs=1e-3)
    # fourth moment is not built in: 3/7 in three dimensions
    assert unit_ball(3).integrate(lambda z: np.sum(z**2, axis=1) ** 2) == pytest.approx(
        3 / 7, abs=2e-3)
    assert unit_ball(1, 2001).integrate(lambda z: z[:, 0] ** 2) == pytest.approx(1 / 3, abs=1e-6)


def test_cube_boundary_faces_and_moment():
    mu = cube_boundary(2, 400)
    on_side = np.isclose(mu.nodes[:, 0], 1.0)
    assert on_side.sum() / len(mu) == 0.25
    assert mu.integrate(lambda z: np.sum(z**2, axis=1)) == pytest.approx(4 / 3, abs=1e-3)
    assert mu.R == pytest.approx(math.sqrt(2))


def test_from_points_normalizes():
    mu = from_points([[0.0, 1.0], [0.0, -1.0]], [2.0, 2.0])
    assert np.array_equal(mu.weights, [0.5, 0.5])
    again = from_points(mu.nodes, mu.weights)
    assert np.array_equal(again.weights, mu.weights)
    d = dirac(2)
    assert d.R == 0.0 and len(d) == 1


@pytest.mark.parametrize("points,weights", [
    ([[0.0, 0.0]], [-1.0]),
    ([[0.0, 0.0]], [0.0]),
    ([[0.0, 0.0], [1.0, 0.0]], [1.0]),
])
def test_from_points_rejects(points, weights):
    with pytest.raises(ValueError):
        from_points(points, weights)


def test_make_measure_unknown_label():
    with pytest.raises(ValueError, match="circle"):
        make_measure("circle", 2)


# --- spherical-like constant ----------------------------------------------

def test_dirac_flagged_divergent():
    rep = check_spherical_like(dirac(2))
    assert rep.flags["divergent"]
    est = rep.column("estimate")
    assert np.allclose(est[1:] / est[:-1], 2.0)


def test_sphere_not_flagged():
    rep = check_spherical_like(unit_sphere(2, 512), levels=3)
    assert not rep.flags["divergent"]


def arc_fraction(r):
    # mass of the unit circle inside B(x, r) for x on the circle
    return 2 * np.arcsin(np.minimum(r / 2, 1.0)) / math.pi


def test_circle_on_circle_centres_give_one_half():
    mu = unit_sphere(2, 4096)
    r = np.append(np.linspace(0.05, 4.0, 400), 2.0)
    oracle = np.max(arc_fraction(r) / r)
    assert oracle == pytest.approx(0.5, abs=1e-12)
    assert r[np.argmax(arc_fraction(r) / r)] == 2.0
    est = spherical_like_constant(mu, mu.nodes[::64], r)
    assert est == pytest.approx(oracle, rel=0.05)


def test_circle_supremum_over_all_centres_is_one():
    # a ball of radius slightly above 1 centred at 0 holds the whole circle
    mu = unit_sphere(2, 2048)
    est, x, r = spherical_like_search(mu, [[0.0, 0.0]], [1.0, 1.0 + 1e-9])
    assert est == pytest.approx(1.0, abs=1e-8)
    assert r > 1.0


def lens_area(d, r):
    """Area of B(0, 1) intersected with B(x, r), |x| = d."""
    if d >= 1 + r:
        return 0.0
    if d <= abs(1 - r):
        return math.pi * min(1.0, r) ** 2
    a = r * r * math.acos((d * d + r * r - 1) / (2 * d * r))
    b = math.acos((d * d + 1 - r * r) / (2 * d))
    c = 0.5 * math.sqrt((-d + r + 1) * (d + r - 1) * (d - r + 1) * (d + r + 1))
    return a + b - c


def test_unit_disk_matches_brute_force():
    ds = np.linspace(0.0, 2.0, 41)
    rs = np.linspace(0.02, 4.0, 200)
    oracle = max(lens_area(d, r) / (math.pi * r) for d in ds for r in rs)
    est = spherical_like_constant(unit_ball(2))
    assert est == pytest.approx(oracle, rel=0.05)


def test_search_rejects_bad_ladder():
    mu = unit_sphere(2, 16)
    with pytest.raises(ValueError):
        spherical_like_search(mu, [[0.0, 0.0]], [])
    with pytest.raises(ValueError):
        spherical_like_search(mu, [[0.0, 0.0]], [0.0, 1.0])


def test_measure_check_echo_and_seed():
    a = check_spherical_like(unit_sphere(2, 256), levels=2, extra_samples=5, seed=3)
    b = check_spherical_like(unit_sphere(2, 256), levels=2, extra_samples=5, seed=3)
    assert a.to_json() == b.to_json()
    assert a.params["seed"] == 3 and a.params["extra_samples"] == 5
