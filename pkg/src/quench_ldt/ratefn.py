"""Legendre-Fenchel transform of the CGF rate into the work rate function.

``r(w) = sup_R [c(R) - w R]``. With coherent initial states ``c`` need
not be concave, so the supremum is taken globally: every sign change of
``dc/dR - w`` on a dense scan of ``R`` is refined by bisection and the
best stationary point wins. For concave ``c`` there is exactly one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .cgf import ModeTable, QuenchSpec, default_grid
from .quadrature import QuadratureGrid

__all__ = ["LegendreResult", "LegendreSolver", "rate_function", "susceptibility_lambda", "scan_points"]

# |r| below this is Legendre round-off; reported as exactly 0 (raw value kept)
ZERO_CLAMP = 1e-12


@dataclass(frozen=True)
class LegendreResult:
    w: float
    r: float
    argmin_R: float
    converged: bool
    supported: bool = True
    raw_r: float | None = None

    @property
    def finite(self) -> bool:
        return self.supported and math.isfinite(self.r)


def scan_points(r_max: float, step: float = 0.05, scale: float = 4.0) -> np.ndarray:
    """Symmetric sinh-spaced grid: ``step`` near zero, coarser toward ``r_max``."""
    du = step / scale
    u_max = np.arcsinh(r_max / scale)
    n = int(np.ceil(u_max / du))
    u = np.linspace(0.0, u_max, n + 1)
    pos = scale * np.sinh(u)
    pos[-1] = r_max
    return np.concatenate([-pos[:0:-1], pos])


class LegendreSolver:
    """Caches the ``R`` scan of one spec so many ``w`` are cheap."""

    def __init__(self, table: ModeTable, r_max: float | None = None, scan_step: float = 0.05,
                 tol: float = 1e-12, max_iter: int = 200):
        self.table = table
        self.r_max = r_max if r_max is not None else 500.0 / max(1.0, table.min_gap)
        self.scan_step = scan_step
        self.tol = tol
        self.max_iter = max_iter

    @classmethod
    def for_spec(cls, spec: QuenchSpec, grid: QuadratureGrid | None = None, **kw) -> "LegendreSolver":
        grid = grid if grid is not None else default_grid(spec)
        return cls(ModeTable.from_grid(spec, grid), **kw)

    @cached_property
    def scan(self):
        R = scan_points(self.r_max, self.scan_step)
        c = np.empty_like(R)
        dc = np.empty_like(R)
        for i in range(0, R.size, 256):
            c[i:i + 256], dc[i:i + 256] = self.table.c_and_dc(R[i:i + 256])
        return R, c, dc

    def _bisect(self, w, lo, hi):
        # invariant: dc(lo) - w > 0 >= dc(hi) - w
        for _ in range(self.max_iter):
            mid = 0.5 * (lo + hi)
            g = float(self.table.dc(mid)) - w
            if abs(g) < self.tol * (1.0 + abs(w)):
                return mid, True
            if g > 0:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-14 * max(1.0, abs(mid)):
                return 0.5 * (lo + hi), True
        return 0.5 * (lo + hi), False

    def solve(self, w: float) -> LegendreResult:
        w = float(w)
        R, c, dc = self.scan
        grad = dc - w
        if grad[-1] > 0 or grad[0] < 0:
            return LegendreResult(w, math.inf, math.copysign(math.inf, grad[-1]), False, supported=False)
        best = None
        crossings = np.flatnonzero((grad[:-1] > 0) & (grad[1:] <= 0))
        for i in crossings:
            if grad[i + 1] == 0:
                R_star, ok = R[i + 1], True
            else:
                R_star, ok = self._bisect(w, R[i], R[i + 1])
            val = float(self.table.c(R_star)) - w * R_star
            if best is None or val > best[0]:
                best = (val, R_star, ok)
        if best is None:
            # flat objective at machine precision; fall back to the scan maximum
            j = int(np.argmax(c - w * R))
            best = (float(c[j] - w * R[j]), float(R[j]), False)
        raw, R_star, ok = best
        r = raw
        if abs(raw) < ZERO_CLAMP:
            r = 0.0
        return LegendreResult(w, r, float(R_star), ok, True, raw)

    def solve_many(self, ws) -> list[LegendreResult]:
        return [self.solve(w) for w in ws]


def rate_function(w: float, spec: QuenchSpec, grid: QuadratureGrid | None = None, **kw) -> LegendreResult:
    """Work rate function ``r(w, t)`` of one spec."""
    return LegendreSolver.for_spec(spec, grid, **kw).solve(w)


def susceptibility_lambda(w: float, lambda_grid, quench_offset: float, template: QuenchSpec,
                          grid_factory=default_grid):
    """Finite-difference ``dr/dlambda`` along ``lambda' = lambda + quench_offset``.

    Central differences inside, one-sided at the ends; unsupported points
    are NaN and spoil their neighbours' differences.
    Returns ``(r_values, dr_dlambda)``.
    """
    lams = np.asarray(lambda_grid, dtype=float)
    if lams.size < 2 or np.any(np.diff(lams) <= 0):
        raise ValueError("lambda_grid must be strictly increasing with >= 2 points")
    r = np.empty_like(lams)
    for i, lam in enumerate(lams):
        spec = template.with_(lambda_initial=float(lam), lambda_quenched=float(lam + quench_offset))
        res = rate_function(w, spec, grid_factory(spec))
        r[i] = res.r if res.finite else np.nan
    return r, np.gradient(r, lams, edge_order=1)
