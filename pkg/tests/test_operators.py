import math

import numpy as np
import pytest

from maxsobolev import grid as G
from maxsobolev.grid import AnalyticFunction
from maxsobolev.measures import cube_boundary, unit_ball, unit_sphere
from maxsobolev.operators import (ScaleLadder, average, average_field, cell_kernel_constant,
                                  dyadic_band, hardy_littlewood, maximal, maximal_at,
                                  riesz_kernel, riesz_potential, riesz_potential_at,
                                  t_operator, truncate_between, truncate_dyadic)

# 12 * int_0^{pi/4} log(1 + sec^2 phi) dphi, evaluated with mpmath at 30 digits
CELL_CONSTANT_3D = 7.674124222443732023552317


# --- ladders ------------------------------------------------------------

def test_ladder_scales_and_refinement():
    lad = ScaleLadder(0.1, 1.6, 2.0)
    assert np.allclose(lad.scales, [0.1, 0.2, 0.4, 0.8, 1.6])
    fine = lad.refined()
    assert len(fine) == 9
    assert set(np.round(lad.scales, 12)) <= set(np.round(fine.scales, 12))


def test_ladder_extra_scales_are_exact():
    lad = ScaleLadder(0.1, 1.0).with_extra([0.3333, 0.5])
    assert 0.3333 in lad.scales and 0.5 in lad.scales


@pytest.mark.parametrize("args", [(0.0, 1.0), (1.0, 0.5), (0.1, 1.0, 1.0)])
def test_ladder_validation(args):
    with pytest.raises(ValueError):
        ScaleLadder(*args)


# --- averages -------------------------------------------------------------

def test_average_of_one_is_one():
    u = G.sample(AnalyticFunction("constant"), 2, 2.0, 33)
    assert average(u, unit_sphere(2, 64), 0.25, [0.0, 0.0]) == pytest.approx(1.0, abs=1e-15)


def test_average_of_square_on_sphere():
    u = G.sample(AnalyticFunction("polynomial-radial"), 2, 1.75, 257)
    val = average(u, unit_sphere(2, 4096), 0.5, [1.0, 0.0])
    assert val == pytest.approx(1.25, abs=1e-4)


def test_average_of_indicator_arc():
    # |x + 2 w|^2 = 8 (1 + cos theta) <= 1 picks out cos theta <= -7/8
    theta = (np.arange(10**6) + 0.5) * 2 * np.pi / 10**6
    brute = np.mean(8 * (1 + np.cos(theta)) <= 1.0)
    assert brute == pytest.approx(math.acos(7 / 8) / math.pi, abs=1e-6)
    u = G.sample(AnalyticFunction("ball-indicator"), 2, 4.5, 1501)
    val = average(u, unit_sphere(2, 8192), 2.0, [2.0, 0.0])
    assert val == pytest.approx(brute, abs=1e-3)


def test_signed_average_is_oscillation():
    u = G.sample(AnalyticFunction("constant", {"value": 2.0}), 2, 2.0, 17)
    assert average(u, unit_sphere(2, 32), 0.5, [0.0, 0.0], signed=True) == 0.0


def test_average_rejects_nonpositive_scale():
    u = G.grid_for(2, 1.0, 9)
    with pytest.raises(ValueError):
        average(u, unit_sphere(2, 8), 0.0, [0.0, 0.0])


@pytest.mark.parametrize("mu", [unit_sphere(2, 256), unit_ball(2, 512), cube_boundary(2, 256)])
def test_fft_and_direct_fields_agree_for_one_signed_u(mu):
    u = G.enforce_zero_boundary(G.sample(AnalyticFunction("gaussian-bump"), 2, 2.0, 41))
    a = average_field(u, mu, 0.37, "direct").values
    b = average_field(u, mu, 0.37, "fft").values
    assert np.abs(a - b).max() < 1e-12


def test_field_matches_pointwise_average():
    u = G.enforce_zero_boundary(G.sample(AnalyticFunction("gaussian-bump"), 2, 2.0, 41))
    mu = unit_sphere(2, 128)
    field = average_field(u, mu, 0.41)
    pts = u.coords()[10:30:7, 5:35:9].reshape(-1, 2)
    direct = average(u, mu, 0.41, pts)
    idx = [u.node_index(p) for p in pts]
    assert np.allclose([field.values[i] for i in idx], direct, atol=1e-12)


def test_signed_input_uses_direct_path():
    u = G.enforce_zero_boundary(G.sample(lambda x: x[:, 0] * np.exp(-np.sum(x**2, 1)), 2, 2.0, 33))
    mu = unit_sphere(2, 64)
    auto = average_field(u, mu, 0.3).values
    direct = average_field(u, mu, 0.3, "direct").values
    assert np.array_equal(auto, direct)


# --- maximal functions ------------------------------------------------------

def test_maximal_on_plateau():
    u = G.enforce_zero_boundary(G.sample(
        AnalyticFunction("cutoff-ramp", {"inner": 1.0, "outer": 1.5}), 2, 2.0, 65))
    S = maximal(u, unit_sphere(2, 256), ScaleLadder(2 * u.h, 0.5))
    assert S.values[32, 32] == pytest.approx(1.0, abs=1e-12)


def test_spherical_maximal_of_disk_at_centre():
    u = G.enforce_zero_boundary(G.sample(AnalyticFunction("ball-indicator"), 2, 2.0, 65))
    S = maximal(u, unit_sphere(2, 256), ScaleLadder(2 * u.h, 1.0))
    assert S.values[32, 32] == pytest.approx(1.0, abs=1e-12)


def test_hardy_littlewood_1d_closed_form():
    # |[2 - t, 2 + t] and [-1, 1] overlap| / 2t = (t - 1) / 2t up to t = 3, then 1/t
    t = np.append(np.linspace(0.5, 6, 100001), 3.0)
    overlap = np.clip(np.minimum(2 + t, 1) - np.maximum(2 - t, -1), 0, None) / (2 * t)
    assert overlap.max() == pytest.approx(1 / 3, abs=1e-8)
    u = G.sample(AnalyticFunction("ball-indicator"), 1, 5.0, 1001)
    lad = ScaleLadder(2 * u.h, 5.0, 2 ** (1 / 16))
    val, t_best = maximal_at(u, unit_ball(1, 2001), lad, [[2.0]])
    assert val[0] == pytest.approx(1 / 3, rel=0.02)
    assert t_best[0] == pytest.approx(3.0, rel=0.05)
    Mu = hardy_littlewood(u, lad, 2001, method="fft")
    assert Mu.values[u.node_index([2.0])] == pytest.approx(val[0], abs=1e-12)


def test_maximal_warns_when_support_touches_boundary():
    u = G.sample(AnalyticFunction("constant"), 2, 1.0, 9)
    with pytest.warns(RuntimeWarning):
        maximal(u, unit_sphere(2, 16), ScaleLadder(0.5, 0.5))


def test_maximal_dominates_each_average():
    u = G.enforce_zero_boundary(G.sample(AnalyticFunction("gaussian-bump"), 2, 2.0, 33))
    mu = unit_ball(2, 256)
    lad = ScaleLadder(2 * u.h, 1.0)
    S = maximal(u, mu, lad).values
    for t in lad.scales[::3]:
        assert np.all(S >= average_field(u, mu, float(t)).values)


# --- Riesz potential ---------------------------------------------------------

def test_cell_kernel_constants():
    assert cell_kernel_constant(1) == 1.0
    assert cell_kernel_constant(2) == pytest.approx(4 * math.log(1 + math.sqrt(2)), rel=1e-15)
    assert cell_kernel_constant(3) == pytest.approx(CELL_CONSTANT_3D, rel=1e-12)


def test_riesz_of_zero():
    g = G.grid_for(2, 1.0, 17)
    assert np.all(riesz_potential(g).values == 0.0)


def test_riesz_disk_2pi():
    g = G.sample(AnalyticFunction("ball-indicator"), 2, 2.0, 257)
    val = riesz_potential(g).values[128, 128]
    assert val == pytest.approx(2 * math.pi, rel=0.01)


def test_riesz_ball_4pi():
    g = G.sample(AnalyticFunction("ball-indicator"), 3, 1.5, 129)
    val = riesz_potential_at(g, [[0.0, 0.0, 0.0]])[0]
    assert val == pytest.approx(4 * math.pi, rel=0.01)


def test_riesz_fft_matches_direct():
    g = G.sample(AnalyticFunction("gaussian-bump"), 2, 2.0, 33)
    a = riesz_potential(g, "fft").values
    b = riesz_potential(g, "direct").values
    assert np.abs(a - b).max() <= 1e-8 * np.abs(b).max()


def test_riesz_kernel_shape_and_centre():
    K = riesz_kernel(2, 5, 0.5)
    assert K.shape == (9, 9)
    assert K[4, 4] == pytest.approx(cell_kernel_constant(2) * 0.5)
    assert K[5, 4] == pytest.approx(0.5**2 / 0.5)


def test_riesz_rejects_unknown_method():
    with pytest.raises(ValueError):
        riesz_potential(G.grid_for(1, 1.0, 5), "spectral")


# --- comparison operator --------------------------------------------------

def test_t_operator_of_zero():
    u = G.grid_for(2, 1.0, 17)
    assert np.all(t_operator(u, ScaleLadder(0.25, 0.5)).values == 0.0)


def test_t_operator_gaussian_at_origin():
    # M u(0) = u(0) = 1 for a radially decreasing bump, and in the plane
    # I|grad u|(0) = 2 pi int_0^inf (r / sigma^2) exp(-r^2 / 2 sigma^2) dr = 2 pi
    oracle = 1.0 + 2 * math.pi
    u = G.enforce_zero_boundary(G.sample(AnalyticFunction("gaussian-bump"), 2, 3.0, 193))
    T = t_operator(u, ScaleLadder(2 * u.h, 1.5), ball_nodes=2048)
    assert T.values[96, 96] == pytest.approx(oracle, rel=0.02)
    M = hardy_littlewood(u, ScaleLadder(2 * u.h, 1.5), 2048)
    assert T.values[96, 96] >= M.values[96, 96]
    assert M.values[96, 96] <= u.values[96, 96] + 1e-12


# --- truncations -----------------------------------------------------------

def test_truncate_between_cases():
    one = G.sample(AnalyticFunction("constant"), 2, 1.0, 9)
    assert np.all(truncate_between(one, 0.25, 0.75).values == 0.5)
    assert np.all(truncate_between(one, 2.0, 3.0).values == 0.0)
    with pytest.raises(ValueError):
        truncate_between(one, 0.5, 0.5)


def test_truncated_ramp_keeps_gradient_inside_band():
    v = G.sample(lambda x: x[:, 0], 1, 1.0, 41)
    w = truncate_between(v, 0.2, 0.6)
    gv = G.gradient(v).components[0].values
    gw = G.gradient(w).components[0].values
    x = v.axis
    # central differences see both neighbours, so stay one node inside
    strict = (x > 0.2 + v.h * 1.5) & (x < 0.6 - v.h * 1.5)
    assert np.array_equal(gw[strict], gv[strict])
    assert np.all(gw[(x < 0.2 - v.h) | (x > 0.6 + v.h)] == 0.0)


def test_truncate_dyadic_extremes():
    small = G.sample(AnalyticFunction("constant", {"value": 0.1}), 2, 1.0, 9)
    assert np.all(truncate_dyadic(small, 0).values == 0.0)      # band (1/4, 1/2]
    big = G.sample(AnalyticFunction("constant", {"value": -5.0}), 2, 1.0, 9)
    assert np.all(truncate_dyadic(big, 2).values == 1.0)        # 2^(k-2) = 1


@pytest.mark.parametrize("v,k", [(1.0, 1), (0.5, 0), (0.75, 1), (2.0, 2), (3.0, 3),
                                 (-3.0, 3), (2.0 ** -40, -39), (0.5000001, 1)])
def test_dyadic_band_examples(v, k):
    assert int(dyadic_band([v])[0]) == k
    assert 2.0 ** (k - 2) < abs(v) <= 2.0 ** (k - 1)


def test_dyadic_bands_tile_a_ramp():
    u = G.sample(AnalyticFunction("cutoff-ramp", {"inner": 0.2, "outer": 1.8}), 2, 2.0, 81)
    pos = u.values > 0
    bands = dyadic_band(u.values[pos])
    counted = 0
    for k in np.unique(bands):
        w = truncate_dyadic(u, int(k)).values[pos]
        lo, hi = 2.0 ** (k - 2), 2.0 ** (k - 1)
        inside = bands == k
        # on its own band the truncation equals |u| - 2^(k-2)
        assert np.allclose(w[inside], u.values[pos][inside] - lo, atol=1e-15)
        assert np.all(w[inside] <= hi - lo)
        counted += inside.sum()
    assert counted == pos.sum()
