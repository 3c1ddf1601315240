"""Initial mode states: thermal Gibbs and Gaussian-measured coherent Gibbs.

Matrices are written in the instantaneous eigenbasis of ``H_k(lam)`` with
index 0 the ``+eps`` level and index 1 the ``-eps`` level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kmode import dispersion

__all__ = [
    "Thermodynamics",
    "log_partition_fn",
    "partition_fn",
    "thermal_mode_state",
    "measured_coherent_state",
    "coherence_factor",
]


@dataclass(frozen=True)
class Thermodynamics:
    """Temperature and Gaussian measurement error.

    ``sigma=None`` is the projective limit (no surviving coherence).
    ``temperature=np.inf`` is allowed and means ``beta = 0``.
    """

    temperature: float = 1.0
    sigma: float | None = 1.0

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")
        if self.sigma is not None and not self.sigma > 0:
            raise ValueError("sigma must be positive (use None for projective)")

    @property
    def beta(self) -> float:
        return 0.0 if np.isinf(self.temperature) else 1.0 / self.temperature


def _log2cosh(x):
    x = np.abs(x)
    return x + np.log1p(np.exp(-2.0 * x))


def log_partition_fn(k, lam, thermo: Thermodynamics):
    """``log Z_k = log(2 cosh(beta eps))``, safe for large ``beta``."""
    return _log2cosh(thermo.beta * dispersion(k, lam))


def partition_fn(k, lam, thermo: Thermodynamics):
    return np.exp(log_partition_fn(k, lam, thermo))


def _populations(eps, beta):
    # (p_plus, p_minus) computed from the max-shifted exponents
    be = beta * eps
    e2 = np.exp(-2.0 * be)
    return e2 / (1.0 + e2), 1.0 / (1.0 + e2)


def coherence_factor(eps, thermo: Thermodynamics):
    """Off-diagonal ``exp(-(eps/sigma)^2) / Z_k`` of the measured state."""
    if thermo.sigma is None:
        return np.zeros_like(np.asarray(eps, dtype=float))
    log_off = -(eps / thermo.sigma) ** 2 - _log2cosh(thermo.beta * eps)
    return np.exp(log_off)


def thermal_mode_state(k, lam, thermo: Thermodynamics) -> np.ndarray:
    """``diag(exp(-beta eps), exp(beta eps)) / Z_k``."""
    eps = dispersion(k, lam)
    p_plus, p_minus = _populations(eps, thermo.beta)
    out = np.zeros(np.shape(eps) + (2, 2), dtype=complex)
    out[..., 0, 0] = p_plus
    out[..., 1, 1] = p_minus
    return out


def measured_coherent_state(k, lam, thermo: Thermodynamics) -> np.ndarray:
    """Coherent Gibbs state after the first Gaussian energy measurement.

    Same diagonal as :func:`thermal_mode_state`; the coherences are damped
    to ``exp(-(eps/sigma)^2) / Z_k``.
    """
    out = thermal_mode_state(k, lam, thermo)
    off = coherence_factor(dispersion(k, lam), thermo)
    out[..., 0, 1] = off
    out[..., 1, 0] = off
    return out
