"""Condenser p-capacity of grid sets by projected accelerated descent.

The infimum of the p-energy over admissible functions on all of R^n is
replaced by the boxed problem: u = 1 on a one-cell dilation of the target,
u = 0 on the outer layer of [-L, L]^n, and 0 <= u <= 1 in between.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, ndimage, special

from .grid import grid_for
from .report import Report


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / special.gamma(n / 2 + 1)


@dataclass
class CapacityProblem:
    """Target set given as a predicate on node coordinates, shape ``(N, n)``."""

    n: int
    p: float
    target: Callable
    L: float
    m: int
    step: float | None = None
    max_iter: int = 3000
    tol: float = 1e-7
    label: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 1 < self.p < self.n:
            raise ValueError(f"need 1 < p < n, got p={self.p}, n={self.n}")
        mask = self.mask()
        if not mask.any():
            raise ValueError("target set contains no grid node")
        layer = np.zeros_like(mask)
        _boundary(layer, 2)
        if (mask & layer).any():
            raise ValueError("target set must stay strictly inside the box")

    @property
    def h(self) -> float:
        return 2.0 * self.L / (self.m - 1)

    def mask(self) -> np.ndarray:
        x = grid_for(self.n, self.L, self.m).coords().reshape(-1, self.n)
        return np.asarray(self.target(x), dtype=bool).reshape((self.m,) * self.n)

    def with_grid(self, m: int) -> "CapacityProblem":
        return CapacityProblem(self.n, self.p, self.target, self.L, m, self.step,
                               self.max_iter, self.tol, self.label, dict(self.params))

    @classmethod
    def ball(cls, n, p, radius, L, m, **kw) -> "CapacityProblem":
        def target(x):
            return np.linalg.norm(x, axis=1) <= radius * (1 + 1e-12)
        return cls(n, p, target, L, m, label="ball",
                   params={"radius": radius}, **kw)

    @classmethod
    def box(cls, n, p, half_width, L, m, **kw) -> "CapacityProblem":
        """Closed cube ``[-a, a]^n``; a tiny ``a`` selects the single central node."""
        def target(x):
            return np.all(np.abs(x) <= half_width * (1 + 1e-12), axis=1)
        return cls(n, p, target, L, m, label="cube",
                   params={"half_width": half_width}, **kw)


def _boundary(a: np.ndarray, width: int = 1):
    for k in range(a.ndim):
        idx = [slice(None)] * a.ndim
        idx[k] = slice(0, width)
        a[tuple(idx)] = True if a.dtype == bool else 0.0
        idx[k] = slice(a.shape[k] - width, None)
        a[tuple(idx)] = True if a.dtype == bool else 0.0


def energy_and_gradient(u: np.ndarray, h: float, p: float, need_grad: bool = True):
    """``h^n sum |D u|^p`` with forward differences on every cell corner."""
    n = u.ndim
    base = (slice(0, -1),) * n
    diffs = []
    for k in range(n):
        plus = list(base)
        plus[k] = slice(1, None)
        diffs.append((u[tuple(plus)] - u[base]) / h)
    sq = sum(d * d for d in diffs)
    vol = h**n
    E = vol * float(np.sum(sq ** (p / 2)))
    if not need_grad:
        return E, None
    with np.errstate(divide="ignore", invalid="ignore"):
        coef = np.where(sq > 0, p * sq ** ((p - 2) / 2), 0.0)
    grad = np.zeros_like(u)
    for k in range(n):
        flux = coef * diffs[k] * (vol / h)
        plus = list(base)
        plus[k] = slice(1, None)
        grad[tuple(plus)] += flux
        grad[base] -= flux
    return E, grad


def _prolong(u: np.ndarray) -> np.ndarray:
    """Multilinear prolongation from m to 2m - 1 points per axis."""
    for k in range(u.ndim):
        shape = list(u.shape)
        shape[k] = 2 * shape[k] - 1
        fine = np.empty(shape)
        even = [slice(None)] * u.ndim
        even[k] = slice(0, None, 2)
        odd = list(even)
        odd[k] = slice(1, None, 2)
        lo = [slice(None)] * u.ndim
        lo[k] = slice(0, -1)
        hi = list(lo)
        hi[k] = slice(1, None)
        fine[tuple(even)] = u
        fine[tuple(odd)] = 0.5 * (u[tuple(lo)] + u[tuple(hi)])
        u = fine
    return u


def _solve(prob: CapacityProblem, init: np.ndarray | None):
    n, m, h, p = prob.n, prob.m, prob.h, prob.p
    inner = ndimage.binary_dilation(prob.mask(), np.ones((3,) * n, dtype=bool))
    outer = np.zeros((m,) * n, dtype=bool)
    _boundary(outer)

    def project(v):
        v = np.clip(v, 0.0, 1.0)
        v[inner] = 1.0
        v[outer] = 0.0
        return v

    x = project(inner.astype(float) if init is None else np.array(init, dtype=float))
    Ex, _ = energy_and_gradient(x, h, p, need_grad=False)
    lip = prob.step and 1.0 / prob.step or 8.0 * n * h ** (n - 2) * max(1.0, p / 2)
    y, tk = x.copy(), 1.0
    energies = [Ex]
    converged = False
    for it in range(prob.max_iter):
        Ey, gy = energy_and_gradient(y, h, p)
        while True:
            z = project(y - gy / lip)
            d = z - y
            Ez, _ = energy_and_gradient(z, h, p, need_grad=False)
            if Ez <= Ey + float(np.sum(gy * d)) + 0.5 * lip * float(np.sum(d * d)) + 1e-15 * abs(Ey):
                break
            lip *= 2.0
        x_old = x
        if Ez <= Ex:
            x, Ex = z, Ez
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * tk * tk))
        y = x + (tk / t_new) * (z - x) + ((tk - 1.0) / t_new) * (x - x_old)
        # adaptive restart when momentum points uphill
        if float(np.sum(gy * (z - x_old))) > 0:
            t_new, y = 1.0, x.copy()
        tk = t_new
        energies.append(Ex)
        window = 25
        if it >= window and energies[-window - 1] - Ex <= prob.tol * Ex:
            converged = True
            break
    return x, energies, converged, inner


def estimate_p_capacity(prob: CapacityProblem, levels: int = 1,
                        init: np.ndarray | None = None):
    """Minimize the boxed p-energy; returns ``(energy, report)``.

    With ``levels > 1`` the problem is first solved on grids with
    ``(m - 1) / 2**k + 1`` points and the result is prolonged as the
    starting point for the next level. Any admissible iterate is an upper
    bound for the boxed capacity, so the returned energy is one even when
    the solver stops at ``max_iter``.
    """
    chain = [prob]
    for _ in range(levels - 1):
        mc = (chain[-1].m - 1) // 2 + 1
        if (chain[-1].m - 1) % 2 or mc < 9:
            break
        chain.append(chain[-1].with_grid(mc))
    chain.reverse()
    level_rows = []
    u = init
    energies = []
    for k, pr in enumerate(chain):
        if u is not None and u.shape[0] != pr.m:
            u = _prolong(u)
        u, energies, converged, inner = _solve(pr, u)
        level_rows.append({"level": k, "m": pr.m, "h": pr.h, "energy": energies[-1],
                           "iterations": len(energies) - 1, "converged": converged})
    if not converged:
        warnings.warn(f"capacity solver hit max_iter={prob.max_iter}; "
                      "energy is an upper bound only", RuntimeWarning, stacklevel=2)
    E = energies[-1]
    steps = np.diff(energies)
    report = Report(
        name="capacity",
        params={"n": prob.n, "p": prob.p, "L": prob.L, "m": prob.m, "target": prob.label,
                **prob.params, "max_iter": prob.max_iter, "tol": prob.tol,
                "levels": len(chain)},
        scalars={"energy": E, "converged": converged, "iterations": len(energies) - 1,
                 "max_energy_increase": float(steps.max()) if len(steps) else 0.0,
                 "dilated_nodes": int(inner.sum()),
                 "min_value": float(u.min()), "max_value": float(u.max())},
        rows=[{"iteration": i, "energy": e} for i, e in enumerate(energies)],
        fits={"levels": level_rows},
    )
    report.solution = u
    return E, report


def radial_capacity_oracle(n: int, p: float, r: float, L: float) -> float:
    """p-energy of the radial extremal between spheres of radii r < L.

    The profile is ``(rho^b - L^b) / (r^b - L^b)`` with ``b = (p - n)/(p - 1)``;
    its energy is integrated numerically over ``r < rho < L``.
    """
    if not 1 < p < n:
        raise ValueError(f"need 1 < p < n, got p={p}, n={n}")
    if not 0 < r < L:
        raise ValueError(f"need 0 < r < L, got r={r}, L={L}")
    b = (p - n) / (p - 1)
    denom = abs(r**b - L**b)
    area = n * unit_ball_volume(n)

    def integrand(s):
        rho = math.exp(s)
        slope = abs(b) * rho ** (b - 1) / denom
        return slope**p * rho ** (n - 1) * rho

    val, _ = integrate.quad(integrand, math.log(r), math.log(L),
                            epsabs=0.0, epsrel=1e-12, limit=200)
    return area * val
