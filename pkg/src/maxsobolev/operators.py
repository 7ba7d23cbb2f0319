"""Averages against rescaled measures, maximal operators, the Riesz potential
of order one, the comparison operator ``T u = M u + I|grad u|``, and the
two truncation constructions used in the level-set argument.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, signal

from .grid import GridFunction, gradient, interpolate, shifted_values
from .measures import DiscreteMeasure, unit_ball


@dataclass(frozen=True)
class ScaleLadder:
    """Geometric scales ``t_min * ratio**k <= t_max`` standing in for sup over t > 0.

    ``extra`` scales are merged in; they let a ladder contain specific
    values exactly.
    """

    t_min: float
    t_max: float
    ratio: float = 2 ** 0.125
    extra: tuple = field(default=())

    def __post_init__(self):
        if not self.t_min > 0:
            raise ValueError("t_min must be positive")
        if not self.t_max >= self.t_min:
            raise ValueError("t_max must be >= t_min")
        if not self.ratio > 1:
            raise ValueError("ladder ratio must exceed 1")

    @property
    def scales(self) -> np.ndarray:
        count = int(math.floor(math.log(self.t_max / self.t_min)
                               / math.log(self.ratio) + 1e-9)) + 1
        base = self.t_min * self.ratio ** np.arange(count)
        return np.unique(np.concatenate([base, np.asarray(self.extra, dtype=float)]))

    def __len__(self):
        return len(self.scales)

    def refined(self) -> "ScaleLadder":
        return ScaleLadder(self.t_min, self.t_max, math.sqrt(self.ratio), self.extra)

    def with_extra(self, values) -> "ScaleLadder":
        return ScaleLadder(self.t_min, self.t_max, self.ratio,
                           tuple(self.extra) + tuple(float(v) for v in values))

    @classmethod
    def for_grid(cls, u: GridFunction, R: float = 1.0,
                 ratio: float = 2 ** 0.125) -> "ScaleLadder":
        """Default ladder: from two grid spacings up to ``L / (2R)``."""
        return cls(2.0 * u.h, u.L / (2.0 * max(R, 1e-12)), ratio)


# --- averages and maximal operators --------------------------------------

def average(u: GridFunction, mu: DiscreteMeasure, t: float, x,
            signed: bool = False) -> np.ndarray | float:
    """``sum_i w_i |u(x + t z_i)|`` at one point or an array of points.

    With ``signed=True`` the quantity ``sum_i w_i |u(x + t z_i) - u(x)|``
    is returned instead, i.e. the oscillation around the value at x.
    """
    if not t > 0:
        raise ValueError("scale t must be positive")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 1
    pts = x.reshape(-1, u.n)
    probe = pts[:, None, :] + t * mu.nodes[None, :, :]
    vals = interpolate(u, probe.reshape(-1, u.n)).reshape(len(pts), len(mu))
    if signed:
        vals = vals - interpolate(u, pts)[:, None]
    out = np.abs(vals) @ mu.weights
    return float(out[0]) if scalar else out


def _splat_kernel(mu: DiscreteMeasure, t: float, h: float) -> np.ndarray:
    """Weights of the multilinear interpolant hit by ``t * z_i``, on integer offsets."""
    q = t * mu.nodes / h
    near = np.rint(q)
    q = np.where(np.abs(q - near) < 1e-9, near, q)
    D = int(math.ceil(np.abs(q).max())) + 1 if len(q) else 1
    K = np.zeros((2 * D + 1,) * mu.n)
    i0 = np.floor(q).astype(int)
    f = q - i0
    for corner in range(2**mu.n):
        bits = [(corner >> k) & 1 for k in range(mu.n)]
        w = mu.weights.copy()
        for k, b in enumerate(bits):
            w = w * (f[:, k] if b else 1.0 - f[:, k])
        idx = tuple(i0[:, k] + bits[k] + D for k in range(mu.n))
        np.add.at(K, idx, w)
    return K


def _average_field(u: GridFunction, mu: DiscreteMeasure, t: float, method: str) -> np.ndarray:
    if method == "direct":
        acc = np.zeros_like(u.values)
        for z, w in zip(mu.nodes, mu.weights):
            acc += w * np.abs(shifted_values(u, t * z))
        return acc
    # correlate |u| with the splatted measure
    K = _splat_kernel(mu, t, u.h)
    flipped = K[(slice(None, None, -1),) * u.n]
    out = signal.convolve(np.abs(u.values), flipped, mode="same", method="auto")
    return np.maximum(out, 0.0)


def _resolve_method(u: GridFunction, method: str) -> str:
    if method not in ("auto", "direct", "fft"):
        raise ValueError(f"unknown method {method!r}")
    if method != "auto":
        return method
    v = u.values
    return "fft" if (v >= 0).all() or (v <= 0).all() else "direct"


def average_field(u: GridFunction, mu: DiscreteMeasure, t: float,
                  method: str = "auto") -> GridFunction:
    """The average at scale t evaluated at every node.

    ``"direct"`` interpolates u at every shifted node and takes absolute
    values, exactly as :func:`average`. ``"fft"`` correlates the
    interpolant of |u| with the measure splatted onto the grid; the two
    coincide when u has one sign, which ``"auto"`` checks.
    """
    return u.with_values(_average_field(u, mu, t, _resolve_method(u, method)))


def _warn_boundary(u: GridFunction):
    if u.boundary_max() > 0:
        warnings.warn("function does not vanish on the boundary layer; "
                      "large-scale averages treat the exterior as zero",
                      RuntimeWarning, stacklevel=3)


def maximal(u: GridFunction, mu: DiscreteMeasure, ladder: ScaleLadder,
            method: str = "auto") -> GridFunction:
    """Nodewise max over the ladder of the mu_t-averages of |u|."""
    _warn_boundary(u)
    method = _resolve_method(u, method)
    best = np.zeros_like(u.values)
    for t in ladder.scales:
        np.maximum(best, _average_field(u, mu, float(t), method), out=best)
    return u.with_values(best)


def maximal_at(u: GridFunction, mu: DiscreteMeasure, ladder: ScaleLadder,
               points) -> np.ndarray:
    """Maximal function at selected points, together with the maximizing scale."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    scales = ladder.scales
    table = np.stack([average(u, mu, float(t), pts) for t in scales], axis=1)
    return table.max(axis=1), scales[np.argmax(table, axis=1)]


def hardy_littlewood(u: GridFunction, ladder: ScaleLadder,
                     node_count: int | None = None, method: str = "auto") -> GridFunction:
    """Centered Hardy-Littlewood maximal function (averages over balls)."""
    nu = unit_ball(u.n) if node_count is None else unit_ball(u.n, node_count)
    return maximal(u, nu, ladder, method)


# --- Riesz potential ------------------------------------------------------

@lru_cache(maxsize=None)
def cell_kernel_constant(n: int) -> float:
    """``int over [-1/2, 1/2]^n of |y|^(1-n) dy``.

    Splitting the cube into 2n pyramids over its faces turns this into
    ``n * int over [-1/2, 1/2]^(n-1) of (1/4 + |s|^2)^((1-n)/2) ds``.
    """
    if n == 1:
        return 1.0
    if n == 2:
        return 4.0 * math.asinh(1.0)
    if n == 3:
        def inner(y):
            a = math.sqrt(0.25 + y * y)
            return 2.0 / a * math.atan(0.5 / a)
        val, _ = integrate.quad(inner, -0.5, 0.5, epsabs=1e-13, epsrel=1e-12)
        return 3.0 * val
    raise ValueError(f"unsupported dimension {n}")


def riesz_kernel(n: int, m: int, h: float) -> np.ndarray:
    """Quadrature weights ``h^n |y|^(1-n)`` on offsets ``-(m-1)..(m-1)``.

    The zero offset carries the exact integral of the kernel over its cell.
    """
    e = np.arange(-(m - 1), m) * h
    r = np.linalg.norm(np.stack(np.meshgrid(*([e] * n), indexing="ij"), -1), axis=-1)
    K = np.empty_like(r)
    nz = r > 0
    K[nz] = r[nz] ** (1 - n) * h**n
    K[~nz] = cell_kernel_constant(n) * h
    return K


def riesz_potential(g: GridFunction, method: str = "fft") -> GridFunction:
    """``I g(x) = int g(z) |x - z|^(1-n) dz`` at every node.

    ``"direct"`` is the plain double sum and serves as the reference;
    ``"fft"`` evaluates the same sum by fast convolution.
    """
    K = riesz_kernel(g.n, g.m, g.h)
    if method == "fft":
        out = signal.fftconvolve(g.values, K, mode="same")
    elif method == "direct":
        out = np.empty_like(g.values)
        for idx in np.ndindex(g.values.shape):
            out[idx] = _riesz_direct_at(g, K, idx)
    else:
        raise ValueError(f"unknown method {method!r}")
    return g.with_values(out)


def _riesz_direct_at(g: GridFunction, K: np.ndarray, idx) -> float:
    window = tuple(slice(g.m - 1 - i, 2 * g.m - 1 - i) for i in idx)
    return float(np.sum(K[window] * g.values))


def riesz_potential_at(g: GridFunction, points) -> np.ndarray:
    """Direct-sum Riesz potential at grid nodes given by coordinates."""
    K = riesz_kernel(g.n, g.m, g.h)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return np.array([_riesz_direct_at(g, K, g.node_index(p)) for p in pts])


def t_operator(u: GridFunction, ladder: ScaleLadder, ball_nodes: int | None = None,
               method: str = "auto") -> GridFunction:
    """``M u + I |grad u|`` nodewise."""
    mu = hardy_littlewood(u, ladder, ball_nodes, method)
    return mu + riesz_potential(gradient(u).magnitude)


# --- truncations ----------------------------------------------------------

def truncate_between(v: GridFunction, t: float, s: float) -> GridFunction:
    """``s - t`` where v >= s, ``v - t`` on [t, s], 0 where v <= t."""
    if not t < s:
        raise ValueError(f"need t < s, got t={t}, s={s}")
    return v.with_values(np.clip(v.values, t, s) - t)


def truncate_dyadic(u: GridFunction, k: int) -> GridFunction:
    """Truncation of |u| between the levels ``2**(k-2)`` and ``2**(k-1)``."""
    return truncate_between(abs(u), 2.0 ** (k - 2), 2.0 ** (k - 1))


def dyadic_band(values) -> np.ndarray:
    """Index k with ``2**(k-2) < |v| <= 2**(k-1)``; meaningless where v = 0.

    Uses the exact binary exponent, so the assignment has no rounding.
    """
    a = np.abs(np.asarray(values, dtype=float))
    mant, expo = np.frexp(a)
    # a = mant * 2**expo with mant in [1/2, 1)
    k = np.where(mant == 0.5, expo, expo + 1)
    return k
