"""Quadrature representations of spherical-like probability measures.

A measure is a finite set of nodes with nonnegative weights summing to one.
Rescaling by ``t`` is never materialized: averaging routines evaluate the
integrand at ``x + t * z_i`` instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .report import Report

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    n: int
    nodes: np.ndarray
    weights: np.ndarray
    R: float
    label: str = "custom"
    # closed-form spherical-like constant, when known
    exact_M: float | None = field(default=None)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float).reshape(-1, self.n)
        weights = np.asarray(self.weights, dtype=float).ravel()
        if len(nodes) != len(weights):
            raise ValueError("nodes and weights have different lengths")
        if np.any(weights < 0):
            raise ValueError("weights must be nonnegative")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {weights.sum()}, not 1")
        if len(nodes) and np.linalg.norm(nodes, axis=1).max() > self.R + 1e-12:
            raise ValueError("a node lies outside the support radius")
        nodes.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return len(self.weights)

    def integrate(self, f) -> float:
        """Integral of a vectorized callable against the measure."""
        return float(np.dot(self.weights, f(self.nodes)))

    def to_rows(self) -> list[dict]:
        rows = []
        for z, w in zip(self.nodes, self.weights):
            row = {f"z{k}": float(z[k]) for k in range(self.n)}
            row["weight"] = float(w)
            rows.append(row)
        return rows


def _fibonacci_sphere(count: int) -> np.ndarray:
    """Antipodally symmetric Fibonacci lattice on S^2 (``count`` rounded up to even)."""
    half = (count + 1) // 2
    total = 2 * half
    i = np.arange(half)
    y = 1.0 - (2 * i + 1) / total
    rho = np.sqrt(1.0 - y * y)
    phi = i * GOLDEN_ANGLE
    upper = np.column_stack([rho * np.cos(phi), y, rho * np.sin(phi)])
    return np.vstack([upper, -upper])


def _circle(count: int, phase: float = 0.0) -> np.ndarray:
    th = 2.0 * np.pi * (np.arange(count) + phase) / count
    return np.column_stack([np.cos(th), np.sin(th)])


def _equal(nodes, n, R, label, exact_M=None) -> DiscreteMeasure:
    w = np.full(len(nodes), 1.0 / len(nodes))
    return DiscreteMeasure(n, nodes, w, R, label, exact_M)


def unit_sphere(n: int, node_count: int = 2048) -> DiscreteMeasure:
    """Normalized surface measure on the unit sphere S^{n-1}, n in {2, 3}."""
    if node_count < 8:
        raise ValueError("need at least 8 nodes")
    if n == 2:
        nodes = _circle(node_count)
    elif n == 3:
        nodes = _fibonacci_sphere(node_count)
    else:
        raise ValueError(f"unit_sphere supports n = 2, 3; got {n}")
    nodes /= np.linalg.norm(nodes, axis=1, keepdims=True)
    # the closed ball around the origin of radius r -> 1+ gives mass 1
    return _equal(nodes, n, 1.0, "sphere", exact_M=1.0)


def unit_ball(n: int, node_count: int = 8192) -> DiscreteMeasure:
    """Normalized Lebesgue measure on the unit ball via a shell/angle product rule.

    Each radial shell ``[k/K, (k+1)/K]`` carries weight equal to its volume
    fraction, spread evenly over nodes on one sphere inside the shell. That
    sphere has the shell's root-mean-square radius, so second moments are
    exact.
    """
    if n == 1:
        nodes = (-1.0 + (2 * np.arange(node_count) + 1) / node_count)[:, None]
        return _equal(nodes, 1, 1.0, "ball", exact_M=1.0)
    if n == 2:
        K = max(2, round(math.sqrt(node_count / math.pi)))
    elif n == 3:
        K = max(2, round((3 * node_count / (4 * math.pi)) ** (1 / 3)))
    else:
        raise ValueError(f"unit_ball supports n = 1, 2, 3; got {n}")
    edges = np.arange(K + 1) / K
    vol = edges[1:] ** n - edges[:-1] ** n
    mids = np.sqrt(n / (n + 2) * (edges[1:] ** (n + 2) - edges[:-1] ** (n + 2)) / vol)
    nodes, weights = [], []
    for k in range(K):
        count = max(8 if n == 3 else 4, round(node_count * vol[k]))
        if n == 2:
            pts = _circle(count, phase=0.5 * (k % 2))
        else:
            pts = _fibonacci_sphere(count)
        nodes.append(mids[k] * pts)
        weights.append(np.full(len(pts), vol[k] / len(pts)))
    weights = np.concatenate(weights)
    weights /= weights.sum()
    return DiscreteMeasure(n, np.vstack(nodes), weights, 1.0, "ball", exact_M=1.0)


def cube_boundary(n: int, node_count: int = 2048) -> DiscreteMeasure:
    """Normalized surface measure on the boundary of [-1, 1]^n, n in {2, 3}.

    Every face gets the same number of midpoint-rule nodes, so the actual
    node count is rounded to a multiple of 4 (n = 2) or 6 k^2 (n = 3).
    """
    if n == 2:
        k = max(2, node_count // 4)
        s = -1.0 + (2 * np.arange(k) + 1) / k
        one = np.ones(k)
        nodes = np.vstack([
            np.column_stack([one, s]), np.column_stack([-one, s]),
            np.column_stack([s, one]), np.column_stack([s, -one]),
        ])
    elif n == 3:
        k = max(2, round(math.sqrt(node_count / 6)))
        s = -1.0 + (2 * np.arange(k) + 1) / k
        a, b = (g.ravel() for g in np.meshgrid(s, s, indexing="ij"))
        one = np.ones(k * k)
        faces = []
        for axis in range(3):
            for sign in (1.0, -1.0):
                cols = [a, b]
                cols.insert(axis, sign * one)
                faces.append(np.column_stack(cols))
        nodes = np.vstack(faces)
    else:
        raise ValueError(f"cube_boundary supports n = 2, 3; got {n}")
    return _equal(nodes, n, math.sqrt(n), "cube-boundary")


def from_points(points, weights, label: str = "custom") -> DiscreteMeasure:
    """Probability measure from arbitrary nodes and nonnegative weights."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    w = np.asarray(weights, dtype=float).ravel()
    if len(pts) != len(w):
        raise ValueError(f"{len(pts)} points but {len(w)} weights")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    total = w.sum()
    if not total > 0:
        raise ValueError("at least one weight must be positive")
    w = w / total
    R = float(np.linalg.norm(pts, axis=1).max())
    return DiscreteMeasure(pts.shape[1], pts, w, R, label)


def dirac(n: int) -> DiscreteMeasure:
    return from_points(np.zeros((1, n)), [1.0], label="dirac")


MEASURES = {
    "sphere": unit_sphere,
    "ball": unit_ball,
    "cube-boundary": cube_boundary,
    "dirac": lambda n, node_count=1: dirac(n),
}


def make_measure(label: str, n: int, node_count: int | None = None) -> DiscreteMeasure:
    if label not in MEASURES:
        raise ValueError(f"unknown measure {label!r}; known: {sorted(MEASURES)}")
    if node_count is None:
        return MEASURES[label](n)
    return MEASURES[label](n, node_count)


# --- spherical-like constant ----------------------------------------------

def default_r_ladder(mu: DiscreteMeasure, r_min: float | None = None,
                     ratio: float = 2 ** 0.125) -> np.ndarray:
    """Geometric radii from ``r_min`` (default 2R/128) up to 2R."""
    top = 2.0 * max(mu.R, 1e-3)
    r_min = top / 128 if r_min is None else r_min
    count = int(math.floor(math.log(top / r_min) / math.log(ratio) + 1e-9)) + 1
    return r_min * ratio ** np.arange(count)


def default_x_samples(mu: DiscreteMeasure, spacing: float | None = None) -> np.ndarray:
    """Nodes of the measure together with an ambient grid over [-2R, 2R]^n."""
    extent = 2.0 * max(mu.R, 1e-3)
    spacing = extent / 8 if spacing is None else spacing
    k = int(round(extent / spacing))
    ax = np.linspace(-extent, extent, 2 * k + 1)
    grid = np.stack(np.meshgrid(*([ax] * mu.n), indexing="ij"), -1).reshape(-1, mu.n)
    return np.vstack([mu.nodes, grid])


def spherical_like_search(mu: DiscreteMeasure, x_samples, r_ladder) -> tuple:
    """Return ``(estimate, x, r)`` maximizing ``mu(B(x, r)) / r^(n-1)``.

    Balls are open. This is a lower estimate of the true supremum.
    """
    r = np.sort(np.asarray(r_ladder, dtype=float).ravel())
    if r.size == 0:
        raise ValueError("empty radius ladder")
    if np.any(r <= 0):
        raise ValueError("radii must be positive")
    xs = np.atleast_2d(np.asarray(x_samples, dtype=float))
    denom = r ** (mu.n - 1)
    best, best_x, best_r = -1.0, None, None
    chunk = max(1, 2_000_000 // max(1, len(mu)))
    for start in range(0, len(xs), chunk):
        block = xs[start:start + chunk]
        d = np.linalg.norm(block[:, None, :] - mu.nodes[None, :, :], axis=2)
        order = np.argsort(d, axis=1, kind="stable")
        ds = np.take_along_axis(d, order, axis=1)
        cw = np.concatenate(
            [np.zeros((len(block), 1)), np.cumsum(mu.weights[order], axis=1)], axis=1)
        for i in range(len(block)):
            counts = np.searchsorted(ds[i], r, side="left")
            ratios = cw[i, counts] / denom
            j = int(np.argmax(ratios))
            if ratios[j] > best:
                best, best_x, best_r = float(ratios[j]), block[i].copy(), float(r[j])
    return best, best_x, best_r


def spherical_like_constant(mu: DiscreteMeasure, x_samples=None, r_ladder=None) -> float:
    """Sampled lower estimate of ``sup_{x, r} mu(B(x, r)) / r^(n-1)``."""
    xs = default_x_samples(mu) if x_samples is None else x_samples
    rl = default_r_ladder(mu) if r_ladder is None else r_ladder
    return spherical_like_search(mu, xs, rl)[0]


def check_spherical_like(mu: DiscreteMeasure, levels: int = 4,
                         growth: float = 1.5, extra_samples: int = 0,
                         seed: int = 0) -> Report:
    """Estimate M under successive refinement of the (x, r) sampling.

    Each level halves the smallest radius and the ambient spacing and takes
    the square root of the ladder ratio. The estimate is flagged divergent
    when it grows by at least ``growth`` at every refinement, the signature
    of a measure with too much mass at small scales (e.g. a Dirac mass).
    ``extra_samples`` uniform centres in ``[-2R, 2R]^n``, drawn once from
    ``seed``, are added at every level.
    """
    rows = []
    top = 2.0 * max(mu.R, 1e-3)
    extra = np.random.default_rng(seed).uniform(-top, top, size=(extra_samples, mu.n))
    r_min, ratio, spacing = top / 128, 2 ** 0.125, top / 8
    for level in range(levels):
        est, x, r = spherical_like_search(
            mu, np.vstack([default_x_samples(mu, spacing), extra]),
            default_r_ladder(mu, r_min, ratio))
        rows.append({"level": level, "r_min": r_min, "ladder_ratio": ratio,
                     "x_spacing": spacing, "estimate": est, "argmax_r": r,
                     "argmax_x": [float(c) for c in x]})
        r_min, ratio, spacing = r_min / 2, math.sqrt(ratio), spacing / 2
    est = np.array([row["estimate"] for row in rows])
    factors = est[1:] / est[:-1]
    divergent = bool(len(factors) and np.all(factors >= growth))
    return Report(
        name="measure_check",
        params={"measure": mu.label, "n": mu.n, "nodes": len(mu), "R": mu.R,
                "levels": levels, "growth_threshold": growth,
                "extra_samples": extra_samples, "seed": seed},
        scalars={"estimate": float(est[-1]), "is_lower_bound": True,
                 "exact_M": mu.exact_M, "divergent": divergent},
        rows=rows,
        flags={"divergent": divergent},
    )
