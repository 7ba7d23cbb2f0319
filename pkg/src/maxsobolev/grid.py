"""Functions sampled on uniform grids over the cube [-L, L]^n.

Values are stored as an n-dimensional array of shape ``(m,) * n`` with axis
``k`` running along the coordinate ``x_k`` (``indexing='ij'``). Everything
outside the cube is treated as zero, which is the setting of compactly
supported test functions.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

# Offsets this close to an integer index are snapped to it, so that
# grid-aligned shifts and lookups at nodes are exact.
_SNAP = 1e-9


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real function sampled at the nodes of a uniform grid on [-L, L]^n."""

    n: int
    L: float
    m: int
    values: np.ndarray

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.n}")
        if self.m < 3:
            raise ValueError(f"need at least 3 points per axis, got {self.m}")
        if not self.L > 0:
            raise ValueError(f"half-width must be positive, got {self.L}")
        values = np.asarray(self.values, dtype=float)
        if values.size != self.m**self.n:
            raise ValueError(
                f"values has {values.size} entries, expected {self.m ** self.n}")
        values = values.reshape((self.m,) * self.n).copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def h(self) -> float:
        return 2.0 * self.L / (self.m - 1)

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.L, self.L, self.m)

    @property
    def cell_volume(self) -> float:
        return self.h**self.n

    def coords(self) -> np.ndarray:
        """Node coordinates, shape ``(m,)*n + (n,)``."""
        mesh = np.meshgrid(*([self.axis] * self.n), indexing="ij")
        return np.stack(mesh, axis=-1)

    def radius(self) -> np.ndarray:
        return np.linalg.norm(self.coords(), axis=-1)

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.n, self.L, self.m, values)

    def same_grid(self, other: "GridFunction") -> bool:
        return (self.n, self.m) == (other.n, other.m) and np.isclose(self.L, other.L)

    def node_index(self, x) -> tuple:
        """Index of the node at point ``x``; raises if ``x`` is not a node."""
        idx = (np.asarray(x, dtype=float) + self.L) / self.h
        rounded = np.rint(idx)
        if np.any(np.abs(idx - rounded) > 1e-6) or np.any(rounded < 0) \
                or np.any(rounded > self.m - 1):
            raise ValueError(f"point {x} is not a grid node")
        return tuple(int(i) for i in rounded)

    def boundary_max(self) -> float:
        """Largest |value| on the outermost layer of nodes."""
        v = np.abs(self.values)
        out = 0.0
        for k in range(self.n):
            out = max(out, float(v.take(0, axis=k).max()), float(v.take(-1, axis=k).max()))
        return out

    def __add__(self, other):
        if isinstance(other, GridFunction):
            _check_same(self, other)
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + other)

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            _check_same(self, other)
            return self.with_values(self.values - other.values)
        return self.with_values(self.values - other)

    def __mul__(self, c):
        return self.with_values(self.values * c)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)

    def __abs__(self):
        return self.with_values(np.abs(self.values))


def _check_same(u: GridFunction, v: GridFunction):
    if not u.same_grid(v):
        raise ValueError("grid functions live on different grids")


@dataclass(frozen=True, eq=False)
class GradientField:
    components: tuple
    magnitude: GridFunction


# --- analytic catalog -----------------------------------------------------

def _smoothstep_down(s):
    """C^1 cubic going from 1 at s <= 0 to 0 at s >= 1."""
    s = np.clip(s, 0.0, 1.0)
    return 1.0 - s * s * (3.0 - 2.0 * s)


def _e1_core(r, n):
    a = 1.0 + (n - 1) / n
    with np.errstate(divide="ignore", invalid="ignore"):
        return r ** (1 - n) * (1.0 - np.log(r)) ** (-a)


def _e1_slope_at_one(n):
    # d/dr [r^{1-n} (1 - log r)^{-a}] at r = 1
    return (1 - n) + 1.0 + (n - 1) / n


def _radial_power_log(x, params):
    n = x.shape[-1]
    r = np.linalg.norm(x, axis=-1)
    out = np.zeros_like(r)
    inner = (r > 0) & (r <= 1.0)
    out[inner] = _e1_core(r[inner], n)
    # cubic Hermite from (1, 1, slope) down to (2, 0, 0)
    ramp = (r > 1.0) & (r < 2.0)
    s = r[ramp] - 1.0
    d = _e1_slope_at_one(n)
    h00 = 2 * s**3 - 3 * s**2 + 1
    h10 = s**3 - 2 * s**2 + s
    out[ramp] = h00 + h10 * d
    return out * params["scale"]


def _gaussian(x, params):
    c = np.atleast_1d(np.asarray(params["center"], dtype=float))
    d2 = np.sum((x - c[: x.shape[-1]]) ** 2, axis=-1)
    return params["amplitude"] * np.exp(-d2 / (2.0 * params["sigma"] ** 2))


def _ball(x, params):
    c = np.atleast_1d(np.asarray(params["center"], dtype=float))
    r = np.linalg.norm(x - c[: x.shape[-1]], axis=-1)
    return np.where(r <= params["radius"], 1.0, 0.0)


def _ball_smoothed(x, params):
    r = np.linalg.norm(x, axis=-1)
    return _smoothstep_down((r - params["radius"]) / params["width"])


def _cutoff_ramp(x, params):
    r = np.linalg.norm(x, axis=-1)
    r1, r2 = params["inner"], params["outer"]
    return np.clip((r2 - r) / (r2 - r1), 0.0, 1.0)


def _polynomial_radial(x, params):
    r = np.linalg.norm(x, axis=-1)
    return params["coefficient"] * r ** params["power"]


def _constant(x, params):
    return np.full(x.shape[:-1], float(params["value"]))


# tag -> (evaluator, defaults, one-line description)
CATALOG: dict[str, tuple[Callable, dict, str]] = {
    "constant": (_constant, {"value": 1.0}, "u(x) = value"),
    "ball-indicator": (
        _ball, {"radius": 1.0, "center": (0.0, 0.0, 0.0)},
        "u(x) = 1 if |x - center| <= radius else 0"),
    "ball-indicator-smoothed": (
        _ball_smoothed, {"radius": 1.0, "width": 0.25},
        "1 on |x| <= radius, C^1 cubic fall to 0 at |x| = radius + width"),
    "gaussian-bump": (
        _gaussian, {"amplitude": 1.0, "sigma": 0.5, "center": (0.0, 0.0, 0.0)},
        "u(x) = amplitude * exp(-|x - center|^2 / (2 sigma^2))"),
    "radial-power-log": (
        _radial_power_log, {"scale": 1.0},
        "u(x) = |x|^(1-n) * log(e/|x|)^(-1-(n-1)/n) on 0 < |x| <= 1, "
        "C^1 cubic to 0 on 1 <= |x| <= 2, u(0) = 0"),
    "polynomial-radial": (
        _polynomial_radial, {"coefficient": 1.0, "power": 2.0},
        "u(x) = coefficient * |x|^power"),
    "cutoff-ramp": (
        _cutoff_ramp, {"inner": 1.0, "outer": 2.0},
        "1 on |x| <= inner, linear to 0 at |x| = outer"),
}


@dataclass(frozen=True)
class AnalyticFunction:
    """A catalog function evaluable at arbitrary points of R^n."""

    tag: str
    params: Mapping = None

    def __post_init__(self):
        if self.tag not in CATALOG:
            raise ValueError(
                f"unknown function tag {self.tag!r}; known: {sorted(CATALOG)}")
        merged = dict(CATALOG[self.tag][1])
        for key, val in (self.params or {}).items():
            if key not in merged:
                raise ValueError(f"{self.tag}: unknown parameter {key!r}")
            merged[key] = val
        _validate(self.tag, merged)
        object.__setattr__(self, "params", merged)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 1
        if scalar:
            x = x[None, :]
        out = CATALOG[self.tag][0](x, self.params)
        return float(out[0]) if scalar else out

    def gradient(self, x) -> np.ndarray:
        """Analytic gradient; only for the smooth tags used as oracles."""
        x = np.asarray(x, dtype=float)
        if self.tag == "gaussian-bump":
            c = np.atleast_1d(np.asarray(self.params["center"], dtype=float))[: x.shape[-1]]
            val = self(x)
            return -(x - c) / self.params["sigma"] ** 2 * np.asarray(val)[..., None]
        if self.tag == "polynomial-radial":
            k, a = self.params["power"], self.params["coefficient"]
            r = np.linalg.norm(x, axis=-1, keepdims=True)
            with np.errstate(divide="ignore", invalid="ignore"):
                g = a * k * r ** (k - 2) * x
            return np.nan_to_num(g)
        if self.tag == "constant":
            return np.zeros_like(x)
        raise NotImplementedError(f"no analytic gradient for {self.tag}")

    def describe(self) -> str:
        return CATALOG[self.tag][2]


def _validate(tag, p):
    positive = {
        "ball-indicator": ("radius",),
        "ball-indicator-smoothed": ("radius", "width"),
        "gaussian-bump": ("sigma",),
        "cutoff-ramp": ("inner",),
    }.get(tag, ())
    for key in positive:
        if not p[key] > 0:
            raise ValueError(f"{tag}: {key} must be positive, got {p[key]}")
    if tag == "cutoff-ramp" and not p["outer"] > p["inner"]:
        raise ValueError("cutoff-ramp: outer radius must exceed inner radius")
    if tag == "polynomial-radial" and p["power"] < 0:
        raise ValueError("polynomial-radial: power must be nonnegative")


# --- operations -----------------------------------------------------------

def sample(f, n: int, L: float, m: int) -> GridFunction:
    """Sample ``f`` at every node of the grid on [-L, L]^n with m points per axis.

    ``f`` is an :class:`AnalyticFunction` or any callable taking an array of
    points of shape ``(..., n)``.
    """
    if m < 3:
        raise ValueError(f"need m >= 3, got {m}")
    if not L > 0:
        raise ValueError(f"need L > 0, got {L}")
    empty = GridFunction(n, L, m, np.zeros((m,) * n))
    x = empty.coords()
    vals = np.asarray(f(x.reshape(-1, n)), dtype=float).reshape((m,) * n)
    return empty.with_values(vals)


def enforce_zero_boundary(u: GridFunction) -> GridFunction:
    v = np.array(u.values)
    for k in range(u.n):
        idx = [slice(None)] * u.n
        idx[k] = 0
        v[tuple(idx)] = 0.0
        idx[k] = -1
        v[tuple(idx)] = 0.0
    return u.with_values(v)


def lp_norm(u, p: float) -> float:
    """Riemann-sum L^p norm; ``p = np.inf`` gives the max norm."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    a = np.abs(u.values)
    if np.isinf(p):
        return float(a.max())
    if p == 1:
        return float(np.sum(a) * u.cell_volume)
    top = a.max()
    if top == 0:
        return 0.0
    # factor out the max so |v|^p neither underflows nor overflows
    return float(top * (np.sum((a / top) ** p) * u.cell_volume) ** (1.0 / p))


def gradient(u: GridFunction) -> GradientField:
    """Central differences inside, one-sided on the boundary layer."""
    parts = np.gradient(u.values, u.h, edge_order=1)
    if u.n == 1:
        parts = [parts]
    comps = tuple(u.with_values(g) for g in parts)
    mag = np.sqrt(sum(g * g for g in parts))
    return GradientField(comps, u.with_values(mag))


def _shift_axis(v: np.ndarray, s: float, axis: int) -> np.ndarray:
    """Linear interpolation of ``v`` at index positions ``j + s`` along ``axis``."""
    m = v.shape[axis]
    pos = np.arange(m) + s
    near = np.rint(pos)
    pos = np.where(np.abs(pos - near) < _SNAP, near, pos)
    valid = (pos >= 0) & (pos <= m - 1)
    i0 = np.clip(np.floor(pos), 0, m - 2).astype(int)
    f = pos - i0
    f = np.where(valid, f, 0.0)
    shape = [1] * v.ndim
    shape[axis] = m
    f = f.reshape(shape)
    out = (1.0 - f) * np.take(v, i0, axis=axis) + f * np.take(v, i0 + 1, axis=axis)
    return out * valid.reshape(shape)


def shifted_values(u: GridFunction, offset) -> np.ndarray:
    """Multilinear interpolant of ``u`` evaluated at ``x + offset`` for every node x."""
    s = np.asarray(offset, dtype=float) / u.h
    v = u.values
    for k in range(u.n):
        if s[k] != 0.0:
            v = _shift_axis(v, s[k], k)
    return v


def translate(u: GridFunction, y) -> GridFunction:
    """The translate ``x -> u(x - y)``, zero outside the original cube."""
    y = np.asarray(y, dtype=float).reshape(u.n)
    return u.with_values(shifted_values(u, -y))


def interpolate(u: GridFunction, x) -> np.ndarray | float:
    """Multilinear interpolation at points ``x`` (shape ``(n,)`` or ``(N, n)``).

    Points outside the cube give 0.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 1
    pts = x.reshape(-1, u.n)
    idx = (pts + u.L) / u.h
    near = np.rint(idx)
    idx = np.where(np.abs(idx - near) < _SNAP, near, idx)
    valid = np.all((idx >= 0) & (idx <= u.m - 1), axis=1)
    i0 = np.clip(np.floor(idx), 0, u.m - 2).astype(int)
    f = idx - i0
    out = np.zeros(len(pts))
    for corner in range(2**u.n):
        bits = [(corner >> k) & 1 for k in range(u.n)]
        w = np.ones(len(pts))
        for k, b in enumerate(bits):
            w = w * (f[:, k] if b else 1.0 - f[:, k])
        vals = u.values[tuple(i0[:, k] + bits[k] for k in range(u.n))]
        out += w * vals
    out[~valid] = 0.0
    return float(out[0]) if scalar else out


def difference_quotient_ratio(u: GridFunction, y, p: float) -> float:
    """``||u_y - u||_p / |y|`` with ``u_y(x) = u(x - y)``."""
    y = np.asarray(y, dtype=float).reshape(u.n)
    ny = float(np.linalg.norm(y))
    if ny == 0:
        raise ValueError("shift must be nonzero")
    return lp_norm(translate(u, y) - u, p) / ny


def sobolev_conjugate(p: float, n: int) -> float:
    if not 1 <= p < n:
        raise ValueError(f"need 1 <= p < n, got p={p}, n={n}")
    return n * p / (n - p)


def grid_for(n: int, L: float, m: int) -> GridFunction:
    """Zero function on the given grid; convenient for coordinates."""
    return GridFunction(n, L, m, np.zeros((m,) * n))

