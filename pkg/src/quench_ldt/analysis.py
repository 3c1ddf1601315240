"""Parameter sweeps, kink detection, short-time fits and plateau checks."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .cgf import QuenchSpec, default_grid
from .ratefn import LegendreSolver
from .states import Thermodynamics

__all__ = [
    "SweepSeries",
    "KinkReport",
    "ResolutionError",
    "sweep",
    "detect_kinks",
    "short_time_fit",
    "plateau_check",
    "time_grid",
    "lambda_grid",
    "thread_count",
]

AXES = ("lambda", "time", "work_density")
KINK_FACTOR = 20.0
# jumps below this are indistinguishable from Legendre/quadrature noise
KINK_FLOOR = 1e-6
KINK_REFINE = 8
# a kink's measured jump varies in [1/4, 1] of its true size with its offset
# from the grid; a smooth bend loses refine**2 (64x), so 0.2 separates them
KINK_KEEP = 0.2


class ResolutionError(ValueError):
    """Series too short or too coarse for the requested analysis."""


def thread_count() -> int:
    env = os.environ.get("QUENCH_LDT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def spec_to_dict(spec: QuenchSpec) -> dict:
    d = asdict(spec)
    d["thermo"] = {"temperature": spec.thermo.temperature, "sigma": spec.thermo.sigma}
    return d


def spec_from_dict(d: dict) -> QuenchSpec:
    d = dict(d)
    d["thermo"] = Thermodynamics(**d["thermo"])
    return QuenchSpec(**d)


@dataclass
class SweepSeries:
    axis: str
    values: np.ndarray
    r: np.ndarray
    supported: np.ndarray
    argmin_R: np.ndarray
    template: QuenchSpec
    w: float | None = None
    quench_offset: float | None = None
    grid: dict = field(default_factory=dict)
    label: str = ""

    def __len__(self):
        return self.values.size

    @property
    def provenance(self) -> dict:
        return {
            "axis": self.axis,
            "values": self.values.tolist(),
            "w": self.w,
            "quench_offset": self.quench_offset,
            "template": spec_to_dict(self.template),
            "grid": self.grid,
        }


@dataclass
class KinkReport:
    locations: list
    strengths: list
    indices: list
    threshold: float
    step: float
    coordinate: str = "linear"
    rejected: list = field(default_factory=list)

    def __len__(self):
        return len(self.locations)

    def to_dict(self) -> dict:
        return {
            "locations": [float(x) for x in self.locations],
            "strengths": [float(x) for x in self.strengths],
            "indices": [int(i) for i in self.indices],
            "threshold": float(self.threshold),
            "step": float(self.step),
            "coordinate": self.coordinate,
            "rejected": [float(x) for x in self.rejected],
        }


def _spec_at(axis, value, template, quench_offset):
    if axis == "lambda":
        lam_q = value + quench_offset if quench_offset is not None else template.lambda_quenched
        return template.with_(lambda_initial=float(value), lambda_quenched=float(lam_q))
    if axis == "time":
        return template.with_(hold_time=float(value))
    return template


def sweep(axis: str, grid, template: QuenchSpec, w: float | None = None, quench_offset: float | None = None,
          grid_factory=default_grid, threads: int | None = None, label: str = "") -> SweepSeries:
    """Evaluate ``r`` at every grid point; failures become gaps.

    ``axis='lambda'`` moves ``lambda_initial`` (and ``lambda_quenched`` too
    when ``quench_offset`` is given), ``axis='time'`` moves the hold time,
    ``axis='work_density'`` moves ``w`` at fixed spec.
    """
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}")
    values = np.asarray(grid, dtype=float).ravel()
    if values.size > 1 and not (np.all(np.diff(values) > 0) or np.all(np.diff(values) < 0)):
        raise ValueError("sweep grid must be strictly monotone")
    if axis != "work_density" and w is None:
        raise ValueError("w is required for lambda and time sweeps")
    n = values.size
    r = np.full(n, np.nan)
    arg = np.full(n, np.nan)
    ok = np.zeros(n, dtype=bool)

    if axis == "work_density":
        solver = LegendreSolver.for_spec(template, grid_factory(template)) if n else None
        results = [solver.solve(v) for v in values]
    else:
        def point(v):
            spec = _spec_at(axis, v, template, quench_offset)
            try:
                return LegendreSolver.for_spec(spec, grid_factory(spec)).solve(w)
            except (ArithmeticError, ValueError, RuntimeError):
                return None

        workers = threads or thread_count()
        if workers > 1 and n > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(point, values))
        else:
            results = [point(v) for v in values]

    for i, res in enumerate(results):
        if res is not None and res.finite:
            r[i], arg[i], ok[i] = res.r, res.argmin_R, True
    probe = _spec_at(axis, values[0], template, quench_offset) if n else template
    grid_desc = dict(grid_factory(probe).rule) if n else {}
    return SweepSeries(axis, values, r, ok, arg, template, w, quench_offset, grid_desc, label)


def _one_sided_slopes(x, y):
    # derivative at the middle node of 3-point quadratic interpolants:
    # left uses (i-2, i-1, i), right uses (i, i+1, i+2); exact for quadratics
    x0, x1, x2 = x[:-4], x[1:-3], x[2:-2]
    y0, y1, y2 = y[:-4], y[1:-3], y[2:-2]
    left = (y0 * (x2 - x1) / ((x0 - x1) * (x0 - x2))
            + y1 * (x2 - x0) / ((x1 - x0) * (x1 - x2))
            + y2 * (2 * x2 - x0 - x1) / ((x2 - x0) * (x2 - x1)))
    x3, x4 = x[3:-1], x[4:]
    y3, y4 = y[3:-1], y[4:]
    right = (y2 * (2 * x2 - x3 - x4) / ((x2 - x3) * (x2 - x4))
             + y3 * (x2 - x4) / ((x3 - x2) * (x3 - x4))
             + y4 * (x2 - x3) / ((x4 - x2) * (x4 - x3)))
    return left, right


def slope_jumps(x, y) -> np.ndarray:
    """``|right slope - left slope|`` at every point; NaN where undefined."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.full(x.size, np.nan)
    if x.size >= 5:
        left, right = _one_sided_slopes(x, y)
        out[2:-2] = np.abs(right - left)
    return out


def detect_kinks(series: SweepSeries | tuple, threshold: float | None = None, coordinate: str | None = None,
                 factor: float = KINK_FACTOR, floor: float = KINK_FLOOR, refine: int = KINK_REFINE,
                 grid_factory=default_grid) -> KinkReport:
    """Flag points where the one-sided slopes disagree by more than ``threshold``.

    ``series`` is a :class:`SweepSeries` or an ``(x, y)`` pair. The default
    threshold is ``factor`` times the median jump, never below ``floor``.
    ``coordinate='log'`` differentiates with respect to ``log x``, the
    natural choice for logarithmic time grids (default for time sweeps).
    Adjacent flags merge into their strongest member.

    Slopes come from the quadratic through three points on each side, so
    they are exact for quadratics. For a C^2 series each one-sided slope is
    off by at most ``h * osc(f'')`` over its stencil, hence the jump is at
    most ``4 h max|f''|`` plus rounding of order ``eps max|f| / h``: any
    threshold above that flags nothing.

    For a :class:`SweepSeries` each candidate is then re-sampled ``refine``
    times more densely across its two neighbouring cells. A kink keeps its
    slope jump under refinement while a smooth but under-resolved bend
    loses it quadratically, so candidates whose refined jump drops below
    ``KINK_KEEP`` of the coarse one are moved to ``rejected``. ``refine=0`` skips this.
    """
    if isinstance(series, SweepSeries):
        x, y = series.values, series.r
        if coordinate is None:
            coordinate = "log" if series.axis == "time" else "linear"
    else:
        x, y = (np.asarray(a, dtype=float) for a in series)
        refine = 0
    coordinate = coordinate or "linear"
    if x.size < 5:
        raise ResolutionError("kink detection needs at least 5 points")
    if np.any(np.diff(x) < 0):
        x, y = x[::-1], y[::-1]
    u = np.log(x) if coordinate == "log" else x
    jumps = slope_jumps(u, y)
    finite = np.isfinite(jumps)
    if not finite.any():
        raise ResolutionError("no run of 5 gap-free points")
    step = float(np.median(np.diff(u)))
    if threshold is None:
        threshold = max(factor * float(np.median(jumps[finite])), floor)
    flagged = np.flatnonzero(finite & (np.nan_to_num(jumps, nan=0.0) > threshold))
    idx, strengths = [], []
    start = 0
    while start < flagged.size:
        stop = start
        while stop + 1 < flagged.size and flagged[stop + 1] == flagged[stop] + 1:
            stop += 1
        run = flagged[start:stop + 1]
        best = run[np.argmax(jumps[run])]
        idx.append(int(best))
        strengths.append(float(jumps[best]))
        start = stop + 1
    locations = [float(x[i]) for i in idx]
    rejected = []
    if refine and idx:
        keep = []
        for n, i in enumerate(idx):
            loc, jump = _refined_jump(series, u, i, coordinate, refine, grid_factory)
            if np.isfinite(jump) and jump >= KINK_KEEP * strengths[n]:
                keep.append((i, loc, jump))
            else:
                rejected.append(locations[n])
        idx = [k[0] for k in keep]
        locations = [k[1] for k in keep]
        strengths = [k[2] for k in keep]
    return KinkReport(locations, strengths, idx, float(threshold), step, coordinate, rejected)


def _refined_jump(series: SweepSeries, u, i, coordinate, refine, grid_factory):
    """Largest slope jump on a ``refine``-times denser grid around point ``i``."""
    lo, hi = u[max(i - 1, 0)], u[min(i + 1, u.size - 1)]
    du = (hi - lo) / (2 * refine)
    fine_u = lo + du * np.arange(-2, 2 * refine + 3)
    fine_x = np.exp(fine_u) if coordinate == "log" else fine_u
    if series.axis == "time":
        fine_x = fine_x[fine_x > 0]
        fine_u = np.log(fine_x) if coordinate == "log" else fine_x
    fine = sweep(series.axis, fine_x, series.template, w=series.w, quench_offset=series.quench_offset,
                 grid_factory=grid_factory, threads=1)
    jumps = slope_jumps(fine_u, fine.r)
    if not np.isfinite(jumps).any():
        return float(series.values[i]), float("nan")
    k = int(np.nanargmax(jumps))
    return float(fine_x[k]), float(jumps[k])


def short_time_fit(series: SweepSeries | tuple, window=(1e-3, 1e-2)):
    """Least-squares fit ``r = alpha * (-ln t) + b`` inside ``window``.

    Returns ``(alpha, residual)`` where ``residual`` is the residual norm
    over the norm of the centred data (0 for an exact fit).
    """
    if isinstance(series, SweepSeries):
        t, r = series.values, series.r
    else:
        t, r = (np.asarray(a, dtype=float) for a in series)
    sel = (t >= window[0]) & (t <= window[1]) & np.isfinite(r)
    if sel.sum() < 2:
        raise ResolutionError("fit window holds fewer than two points")
    x = -np.log(t[sel])
    y = r[sel]
    A = np.column_stack([x, np.ones_like(x)])
    (alpha, b), *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ np.array([alpha, b])
    spread = np.linalg.norm(y - y.mean())
    rnorm = np.linalg.norm(res)
    residual = 0.0 if rnorm <= 1e-14 * max(1.0, np.abs(y).max()) else rnorm / spread
    return float(alpha), float(residual)


def plateau_check(series: SweepSeries | tuple, window: float, rel_tol: float = 0.05, tol: float | None = None):
    """Is ``r`` flat over the trailing ``window`` of the swept parameter?

    Flat means ``max - min`` over the window is below ``tol``, which
    defaults to ``rel_tol`` times the full range of the series.
    Returns ``(flat, level)`` with ``level`` the window mean.
    """
    if isinstance(series, SweepSeries):
        t, r = series.values, series.r
    else:
        t, r = (np.asarray(a, dtype=float) for a in series)
    good = np.isfinite(r)
    sel = good & (t >= t.max() - window)
    if sel.sum() < 2 or t.max() - window < t.min():
        raise ResolutionError("not enough data past the plateau onset")
    tail = r[sel]
    if tol is None:
        scale = float(np.ptp(r[good]))
        tol = rel_tol * scale if scale > 0 else rel_tol
    return bool(np.ptp(tail) < tol), float(tail.mean())


def time_grid(t_min=1e-3, t_log_max=1e-1, n_log=200, t_max=10.0, n_lin=200) -> np.ndarray:
    """Log-spaced up to ``t_log_max`` then linear up to ``t_max``."""
    log_part = np.geomspace(t_min, t_log_max, n_log)
    if t_max <= t_log_max:
        return log_part
    lin = np.linspace(t_log_max, t_max, n_lin + 1)[1:]
    return np.concatenate([log_part, lin])


def lambda_grid(start=0.0, stop=2.0, step=0.005) -> np.ndarray:
    n = int(round((stop - start) / step))
    return np.round(start + step * np.arange(n + 1), 12)

