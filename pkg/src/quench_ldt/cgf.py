"""Work cumulant generating functions per mode and their k-integral.

Every trace is evaluated in the eigenbasis of ``H_k(lam)`` where the
initial Hamiltonian is ``diag(eps, -eps)`` and the measured state has real
coherences. Each ``G_k`` is written as

    G_k(R) = sum_n exp(-R s_n E_n) [P+_n e^x + P-_n e^-x + C_n] / Z_k,

with ``x = (R - beta) eps`` and nonnegative brackets, so ``log G_k`` is a
log-sum-exp of two finite terms for any real ``R``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy.special import logsumexp

from .kmode import HermitianMode, dispersion, evolve
from .quadrature import QuadratureError, QuadratureGrid, gauss_legendre_grid, near_critical
from .states import Thermodynamics, coherence_factor, log_partition_fn

__all__ = [
    "QuenchSpec",
    "ModeTable",
    "GAUGES",
    "quenched_hamiltonian_in_eigenbasis",
    "gk_static",
    "gk_dynamic",
    "rate_c",
    "rate_c_derivative",
    "mean_work_density",
    "finite_size_rate_c",
    "default_grid",
    "converged_grid",
]

#: Frame angle of the quenched Hamiltonian's off-diagonal part relative to
#: the real coherences of the measured state. ``"bogoliubov"`` keeps the
#: eigenvector phases of the ``theta_k`` construction; ``"real"`` drops the
#: relative factor ``i`` so that every mode matrix is real.
GAUGES = {"real": 0.0, "bogoliubov": 0.5 * np.pi}

INITIAL_KINDS = ("thermal", "coherent_gibbs")


@dataclass(frozen=True)
class QuenchSpec:
    """A single quench experiment.

    ``hold_time=None`` is the static protocol (one sudden quench
    ``lam -> lam'``). A number selects the double quench: evolve under
    ``H(lam')`` for ``hold_time`` and quench back to ``lam``.
    """

    lambda_initial: float
    lambda_quenched: float
    thermo: Thermodynamics = field(default_factory=Thermodynamics)
    initial_kind: str = "coherent_gibbs"
    hold_time: float | None = None
    gauge: str | float = "bogoliubov"

    def __post_init__(self):
        for name in ("lambda_initial", "lambda_quenched"):
            val = getattr(self, name)
            if not np.isfinite(val) or val < 0:
                raise ValueError(f"{name} must be finite and >= 0")
        if self.initial_kind not in INITIAL_KINDS:
            raise ValueError(f"initial_kind must be one of {INITIAL_KINDS}")
        if self.hold_time is not None and not (np.isfinite(self.hold_time) and self.hold_time >= 0):
            raise ValueError("hold_time must be finite and >= 0")
        if isinstance(self.gauge, str) and self.gauge not in GAUGES:
            raise ValueError(f"gauge must be one of {sorted(GAUGES)} or an angle")

    @property
    def protocol(self) -> str:
        return "static" if self.hold_time is None else "double_quench"

    @property
    def gauge_angle(self) -> float:
        return GAUGES[self.gauge] if isinstance(self.gauge, str) else float(self.gauge)

    def with_(self, **changes) -> "QuenchSpec":
        return replace(self, **changes)


def quenched_hamiltonian_in_eigenbasis(k, lam, lam_q, gauge_angle=0.0) -> HermitianMode:
    """``H_k(lam_q)`` expressed in the eigenbasis of ``H_k(lam)``.

    The diagonal part is ``(c c' + b^2)/eps`` and the off-diagonal
    magnitude ``(lam - lam_q) sin k / eps`` with ``c = lam - cos k``.
    """
    c = lam - np.cos(k)
    b = np.sin(k)
    eps = np.hypot(c, b)
    off = (lam - lam_q) * b / eps
    z = (c * (lam_q - np.cos(k)) + b * b) / eps
    return HermitianMode(x=off * np.cos(gauge_angle), y=off * np.sin(gauge_angle), z=z)


@dataclass(frozen=True, eq=False)
class ModeTable:
    """Per-node coefficients of ``G_k``; index 0/1 of the ``(2, n)`` arrays is ``n = +/-``."""

    eps: np.ndarray
    out_energy: np.ndarray
    p_plus: np.ndarray
    p_minus: np.ndarray
    coh: np.ndarray
    log_z: np.ndarray
    beta: float
    weights: np.ndarray | None = None

    @classmethod
    def build(cls, k, spec: QuenchSpec, weights=None) -> "ModeTable":
        k = np.asarray(k, dtype=float)
        lam, lam_q = spec.lambda_initial, spec.lambda_quenched
        thermo = spec.thermo
        eps = dispersion(k, lam)
        h_q = quenched_hamiltonian_in_eigenbasis(k, lam, lam_q, spec.gauge_angle)
        if spec.initial_kind == "coherent_gibbs":
            g = np.exp(-(eps / thermo.sigma) ** 2) if thermo.sigma is not None else np.zeros_like(eps)
        else:
            g = np.zeros_like(eps)
        if spec.hold_time is None:
            # project the sandwich onto the eigenvectors of H_k(lam')
            eq = h_q.norm
            rho = np.hypot(h_q.x, h_q.y)
            half = 0.5 * np.arctan2(rho, h_q.z)
            cos2, sin2 = np.cos(half) ** 2, np.sin(half) ** 2
            cos_phi = np.divide(h_q.x, rho, out=np.ones_like(rho), where=rho > 0)
            c_plus = np.sin(2 * half) * cos_phi * g
            out_energy = eq
            p_plus = np.stack([cos2, sin2])
            p_minus = np.stack([sin2, cos2])
            coh = np.stack([c_plus, -c_plus])
        else:
            u = evolve(h_q, spec.hold_time)
            a0 = np.abs(u[:, 0, 0]) ** 2
            a1 = np.abs(u[:, 0, 1]) ** 2
            cross = 2.0 * np.real(u[:, 0, 0] * np.conj(u[:, 0, 1])) * g
            out_energy = eps
            p_plus = np.stack([a0, a1])
            p_minus = np.stack([a1, a0])
            coh = np.stack([cross, -cross])
        log_z = log_partition_fn(k, lam, thermo)
        return cls(eps, out_energy, p_plus, p_minus, coh, log_z, thermo.beta, weights)

    @classmethod
    def from_grid(cls, spec: QuenchSpec, grid: QuadratureGrid) -> "ModeTable":
        return cls.build(grid.nodes, spec, grid.weights)

    @cached_property
    def min_gap(self) -> float:
        return float(np.min(self.eps))

    def _terms(self, R):
        R = np.asarray(R, dtype=float)[..., None, None]
        x = (R - self.beta) * self.eps
        m = np.abs(x)
        ep, em, e0 = np.exp(x - m), np.exp(-x - m), np.exp(-m)
        bracket = self.p_plus * ep + self.p_minus * em + self.coh * e0
        bracket = np.maximum(bracket, np.finfo(float).tiny)
        sign = np.array([1.0, -1.0])[:, None]
        expo = -R * sign * self.out_energy + m + np.log(bracket)
        dbracket = self.eps * (self.p_plus * ep - self.p_minus * em) / bracket
        return expo, dbracket, sign

    def log_g(self, R) -> np.ndarray:
        """``log G_k`` with shape ``R.shape + (n_nodes,)``."""
        expo, _, _ = self._terms(R)
        return logsumexp(expo, axis=-2) - self.log_z

    def dlog_g(self, R) -> np.ndarray:
        """Analytic ``d log G_k / dR``."""
        expo, dbracket, sign = self._terms(R)
        wts = np.exp(expo - logsumexp(expo, axis=-2, keepdims=True))
        return np.sum(wts * (-sign * self.out_energy + dbracket), axis=-2)

    def c(self, R) -> np.ndarray:
        """Thermodynamic-limit rate ``-(1/pi) int log G_k dk``."""
        return -np.sum(self.log_g(R) * self.weights, axis=-1) / np.pi

    def dc(self, R) -> np.ndarray:
        return -np.sum(self.dlog_g(R) * self.weights, axis=-1) / np.pi

    def c_and_dc(self, R):
        expo, dbracket, sign = self._terms(R)
        lse = logsumexp(expo, axis=-2, keepdims=True)
        wts = np.exp(expo - lse)
        d = np.sum(wts * (-sign * self.out_energy + dbracket), axis=-2)
        lg = lse[..., 0, :] - self.log_z
        return (-np.sum(lg * self.weights, axis=-1) / np.pi,
                -np.sum(d * self.weights, axis=-1) / np.pi)


def _check_finite(*vals):
    for v in vals:
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite parameter")


def gk_static(k, R, spec: QuenchSpec):
    """``log G_k(R)`` for a single sudden quench."""
    if spec.protocol != "static":
        raise ValueError("gk_static needs a static spec")
    _check_finite(k, R)
    return ModeTable.build(np.atleast_1d(k), spec).log_g(R)[..., 0] if np.ndim(k) == 0 \
        else ModeTable.build(k, spec).log_g(R)


def gk_dynamic(k, R, spec: QuenchSpec):
    """``log G_k(R, t)`` for the double quench with hold time ``spec.hold_time``."""
    if spec.protocol != "double_quench":
        raise ValueError("gk_dynamic needs a double-quench spec")
    _check_finite(k, R)
    return ModeTable.build(np.atleast_1d(k), spec).log_g(R)[..., 0] if np.ndim(k) == 0 \
        else ModeTable.build(k, spec).log_g(R)


def default_grid(spec: QuenchSpec, panels: int = 32, order: int = 16) -> QuadratureGrid:
    """512-node rule, graded toward ``k = 0`` near the critical field."""
    graded = near_critical(spec.lambda_initial, spec.lambda_quenched)
    return gauss_legendre_grid(panels=panels, order=order, graded=graded)


def converged_grid(spec: QuenchSpec, probe_R=(-2.0, -0.5, 0.5, 2.0), tol: float = 1e-10,
                   max_doublings: int = 6, start: QuadratureGrid | None = None) -> QuadratureGrid:
    """Double the panel count until ``c`` at the probe points moves by < ``tol``."""
    grid = start if start is not None else default_grid(spec)
    probe = np.asarray(probe_R, dtype=float)
    prev = ModeTable.from_grid(spec, grid).c(probe)
    for _ in range(max_doublings):
        finer = grid.refined()
        cur = ModeTable.from_grid(spec, finer).c(probe)
        if np.max(np.abs(cur - prev)) < tol:
            return grid
        grid, prev = finer, cur
    raise QuadratureError(f"c did not converge to {tol} after {max_doublings} doublings")


def rate_c(R, spec: QuenchSpec, grid: QuadratureGrid | None = None):
    """``c(R, t) = -(1/pi) int_0^pi log G_k(R, t) dk``.

    The ``R^2 sigma^2 / 2N`` term vanishes in the thermodynamic limit and
    is not included.
    """
    grid = grid if grid is not None else default_grid(spec)
    return ModeTable.from_grid(spec, grid).c(R)


def rate_c_derivative(R, spec: QuenchSpec, grid: QuadratureGrid | None = None):
    grid = grid if grid is not None else default_grid(spec)
    return ModeTable.from_grid(spec, grid).dc(R)


def _mode_energy_change(k, spec: QuenchSpec):
    # <H_final>_evolved - <H_k(lam)>_initial, from explicit traces in the eigenbasis
    k = np.asarray(k, dtype=float)
    lam = spec.lambda_initial
    thermo = spec.thermo
    eps = dispersion(k, lam)
    be = thermo.beta * eps
    e2 = np.exp(-2 * be)
    rho = np.zeros(k.shape + (2, 2), dtype=complex)
    rho[..., 0, 0] = e2 / (1 + e2)
    rho[..., 1, 1] = 1 / (1 + e2)
    if spec.initial_kind == "coherent_gibbs":
        off = coherence_factor(eps, thermo)
        rho[..., 0, 1] = rho[..., 1, 0] = off
    h_init = HermitianMode(z=eps).matrix()
    h_q = quenched_hamiltonian_in_eigenbasis(k, lam, spec.lambda_quenched, spec.gauge_angle)
    if spec.hold_time is None:
        h_final, evolved = h_q.matrix(), rho
    else:
        u = evolve(h_q, spec.hold_time)
        h_final, evolved = h_init, u @ rho @ np.conj(np.swapaxes(u, -1, -2))
    final = np.real(np.trace(h_final @ evolved, axis1=-2, axis2=-1))
    initial = np.real(np.trace(h_init @ rho, axis1=-2, axis2=-1))
    return final - initial


def mean_work_density(spec: QuenchSpec, grid: QuadratureGrid | None = None) -> float:
    """Mean work per site, ``(1/pi) int (<H_f>_t - <H_i>_0) dk`` (equals ``dc/dR`` at 0)."""
    grid = grid if grid is not None else default_grid(spec)
    return float(grid.integrate(_mode_energy_change(grid.nodes, spec)) / np.pi)


def finite_size_rate_c(R, spec: QuenchSpec, n_sites: int, include_constant: bool = True):
    """``-(1/N) log G`` for a chain of ``N`` sites (``N`` even).

    Uses the momenta ``k = (2n - 1) pi / N``, ``n = 1..N/2`` and, when
    requested, the Gaussian-measurement prefactor ``exp(R^2 sigma^2 / 2)``.
    """
    if n_sites < 2 or n_sites % 2:
        raise ValueError("n_sites must be a positive even integer")
    k = (2 * np.arange(1, n_sites // 2 + 1) - 1) * np.pi / n_sites
    R = np.asarray(R, dtype=float)
    total = np.sum(ModeTable.build(k, spec).log_g(R), axis=-1)
    sigma = spec.thermo.sigma
    if include_constant and sigma is not None:
        total = total + 0.5 * R**2 * sigma**2
    return -total / n_sites
