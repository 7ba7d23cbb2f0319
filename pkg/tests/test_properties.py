import json
import math

import numpy as np
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from maxsobolev import grid as G
from maxsobolev.grid import AnalyticFunction
from maxsobolev.measures import from_points, spherical_like_search, unit_sphere
from maxsobolev.operators import (ScaleLadder, dyadic_band, maximal, riesz_potential,
                                  truncate_between)
from maxsobolev.report import Report
from maxsobolev.verify import gradient_level_profile, truncation_partition_check

settings.register_profile("repo", deadline=None, max_examples=40)
settings.load_profile("repo")

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
positive = st.floats(1e-3, 1e3)
M = 9


def grid_of(values, L=1.0):
    return G.GridFunction(values.ndim, L, values.shape[0], values)


field2 = arrays(np.float64, (M, M), elements=finite)
nonneg2 = arrays(np.float64, (M, M), elements=st.floats(0, 10))


@given(field2, finite, st.sampled_from([1.0, 1.5, 2.0, 3.0, np.inf]))
def test_lp_norm_homogeneous(v, c, p):
    u = grid_of(v)
    lhs = G.lp_norm(u * c, p)
    rhs = abs(c) * G.lp_norm(u, p)
    assert math.isclose(lhs, rhs, rel_tol=1e-12, abs_tol=1e-300)


@given(field2, field2, st.sampled_from([1.0, 2.0, 4.0, np.inf]))
def test_lp_norm_triangle(a, b, p):
    u, v = grid_of(a), grid_of(b)
    assert G.lp_norm(u + v, p) <= G.lp_norm(u, p) + G.lp_norm(v, p) + 1e-12 * (
        1 + G.lp_norm(u, p) + G.lp_norm(v, p))


@given(st.floats(-0.3, 0.3), st.floats(-0.3, 0.3))
def test_translate_round_trip(y0, y1):
    f = AnalyticFunction("gaussian-bump", {"sigma": 0.4})
    u = G.sample(f, 2, 2.0, 81)
    back = G.translate(G.translate(u, [y0, y1]), [-y0, -y1])
    far = u.radius() < 2.0 - 2 * math.hypot(y0, y1) - 2 * u.h
    err = np.abs(back.values - u.values)[far].max()
    # two interpolations, each within h^2 / 8 * n * max |D^2 f| = h^2 / 8 * 2 / sigma^2
    assert err <= 2 * u.h**2 / 8 * 2 / 0.16


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_gradient_of_linear_exact(a, b, c):
    u = G.sample(lambda x: a * x[:, 0] + b * x[:, 1] + c, 2, 1.0, 11)
    g = G.gradient(u)
    inner = (slice(1, -1),) * 2
    assert np.allclose(g.components[0].values[inner], a, atol=1e-12 * (1 + abs(a) + abs(c)))
    assert np.allclose(g.components[1].values[inner], b, atol=1e-12 * (1 + abs(b) + abs(c)))


@given(arrays(np.float64, st.integers(1, 20), elements=st.floats(1e-300, 1e300)))
def test_dyadic_band_brackets(v):
    k = dyadic_band(v).astype(float)
    assert np.all(2.0 ** (k - 2) < v)
    assert np.all(v <= 2.0 ** (k - 1))


@given(nonneg2)
def test_truncation_partition_exact_on_random(v):
    rep = truncation_partition_check(grid_of(v))
    assert rep["abs_error"] <= 1e-12 * max(1.0, rep["total"])


@given(nonneg2, st.lists(st.floats(0, 10), min_size=2, max_size=8))
def test_level_profile_monotone(v, levels):
    levels = sorted(levels)
    rep = gradient_level_profile(grid_of(v), levels)
    assert np.all(np.diff(rep.column("phi")) >= 0)


@given(field2, st.floats(-5, 5), st.floats(0.01, 5))
def test_truncation_bounded_and_lipschitz(v, t, width):
    u = grid_of(v)
    w = truncate_between(u, t, t + width).values
    assert w.min() >= 0 and w.max() <= width * (1 + 1e-15)
    dv = np.abs(np.diff(v, axis=0))
    dw = np.abs(np.diff(w, axis=0))
    assert np.all(dw <= dv + 1e-12)


def interior(v):
    out = np.zeros((M + 2, M + 2))
    out[1:-1, 1:-1] = v
    return grid_of(out, 2.0)


@given(nonneg2, nonneg2)
def test_maximal_sublinear_and_homogeneous(a, b):
    mu = unit_sphere(2, 16)
    lad = ScaleLadder(0.3, 1.2, 2.0)
    u, v = interior(a), interior(b)
    Su = maximal(u, mu, lad, "direct").values
    Sv = maximal(v, mu, lad, "direct").values
    Suv = maximal(u + v, mu, lad, "direct").values
    assert np.all(Suv <= Su + Sv + 1e-12 * (1 + Su + Sv))
    S3 = maximal(u * 3.0, mu, lad, "direct").values
    assert np.allclose(S3, 3 * Su, rtol=1e-12, atol=1e-12)


@given(nonneg2)
def test_maximal_grows_with_ladder(a):
    mu = unit_sphere(2, 16)
    u = interior(a)
    coarse = maximal(u, mu, ScaleLadder(0.3, 1.2, 2.0)).values
    fine = maximal(u, mu, ScaleLadder(0.3, 1.2, 2.0).refined()).values
    assert np.all(fine >= coarse - 1e-12)


@given(nonneg2, nonneg2, st.floats(0, 10))
def test_riesz_linear_and_positive(a, b, c):
    u, v = grid_of(a), grid_of(b)
    Iu = riesz_potential(u).values
    Iv = riesz_potential(v).values
    I = riesz_potential(u + v * c).values
    scale = 1 + np.abs(Iu).max() + c * np.abs(Iv).max()
    assert np.abs(I - (Iu + c * Iv)).max() <= 1e-10 * scale
    assert Iu.min() >= -1e-10 * scale


@given(st.lists(st.tuples(finite, finite), min_size=1, max_size=10),
       st.lists(st.floats(0.01, 10), min_size=10, max_size=10))
def test_from_points_normalized_and_idempotent(pts, w):
    w = w[: len(pts)]
    mu = from_points(pts, w)
    assert math.isclose(mu.weights.sum(), 1.0, abs_tol=1e-12)
    again = from_points(mu.nodes, mu.weights)
    assert np.allclose(again.weights, mu.weights, rtol=1e-14)


@given(st.lists(st.tuples(st.floats(-2, 2), st.floats(-2, 2)), min_size=1, max_size=5))
def test_more_samples_never_lower_estimate(extra):
    mu = unit_sphere(2, 64)
    r = [0.25, 0.5, 1.0, 2.0]
    base = spherical_like_search(mu, [[1.0, 0.0]], r)[0]
    more = spherical_like_search(mu, [[1.0, 0.0]] + [list(e) for e in extra], r)[0]
    assert more >= base


@given(st.dictionaries(st.text(min_size=1, max_size=5), st.one_of(finite, st.integers()),
                       max_size=5),
       st.lists(st.floats(allow_nan=True, allow_infinity=True), max_size=5))
def test_report_json_deterministic(scalars, values):
    rep = Report("x", {"a": 1}, scalars, rows=[{"v": v} for v in values])
    text = rep.to_json()
    assert text == Report("x", {"a": 1}, dict(scalars), rows=[{"v": v} for v in values]).to_json()
    loaded = json.loads(text)
    for row, v in zip(loaded["rows"], values):
        if math.isnan(v):
            assert row["v"] == "nan"
        elif math.isinf(v):
            assert row["v"] in ("divergent", "-divergent")
        else:
            assert row["v"] == v
