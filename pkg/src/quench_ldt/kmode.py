"""Two-level momentum modes of the fermionized transverse-field Ising chain.

Every matrix here lives in the span of ``{I, sx, sy, sz}`` and is handled
through its Pauli components, so exponentials and propagators are closed
forms rather than eigensolver calls. Functions broadcast over numpy arrays
of momenta and parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "HermitianMode",
    "check_momentum",
    "dispersion",
    "hamiltonian_k",
    "bogoliubov_angle",
    "bogoliubov_eigenvectors",
    "exp_scaled",
    "evolve",
    "PAULI",
]

PAULI = {
    "I": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class DegenerateModeError(ArithmeticError):
    """Raised when the Bogoliubov angle is undefined (vanishing normalizer)."""


@dataclass(frozen=True)
class HermitianMode:
    """``a*I + x*sx + y*sy + z*sz`` with real (array-like) coefficients."""

    a: np.ndarray | float = 0.0
    x: np.ndarray | float = 0.0
    y: np.ndarray | float = 0.0
    z: np.ndarray | float = 0.0

    @property
    def norm(self):
        """Length of the traceless part, i.e. half the level splitting."""
        return np.sqrt(np.asarray(self.x) ** 2 + np.asarray(self.y) ** 2 + np.asarray(self.z) ** 2)

    def matrix(self) -> np.ndarray:
        """Dense ``(..., 2, 2)`` complex representation."""
        a, x, y, z = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (self.a, self.x, self.y, self.z)))
        out = np.empty(a.shape + (2, 2), dtype=complex)
        out[..., 0, 0] = a + z
        out[..., 1, 1] = a - z
        out[..., 0, 1] = x - 1j * y
        out[..., 1, 0] = x + 1j * y
        return out

    def eigvals(self):
        n = self.norm
        return np.asarray(self.a) + n, np.asarray(self.a) - n


def check_momentum(k):
    k = np.asarray(k, dtype=float)
    if not np.all((k > 0.0) & (k < np.pi)):
        raise ValueError("momentum must lie strictly inside (0, pi)")
    return k


def dispersion(k, lam):
    """Single-mode energy ``sqrt((lam - cos k)^2 + sin^2 k)``."""
    k = check_momentum(k)
    return np.hypot(lam - np.cos(k), np.sin(k))


def hamiltonian_k(k, lam) -> HermitianMode:
    """Mode Hamiltonian ``(lam - cos k) sz + sin k sy``."""
    k = check_momentum(k)
    return HermitianMode(y=np.sin(k), z=np.asarray(lam, dtype=float) - np.cos(k))


def bogoliubov_angle(k, lam):
    """Angle ``theta_k`` in (-pi, pi] fixing the instantaneous eigenvectors.

    Defined through ``exp(i theta) = (lam - eps - exp(-ik)) / |...|``.
    """
    k = check_momentum(k)
    eps = dispersion(k, lam)
    num = (lam - eps - np.cos(k)) + 1j * np.sin(k)
    den = np.sqrt(np.sin(k) ** 2 + (lam - np.cos(k) - eps) ** 2)
    if np.any(den < np.finfo(float).tiny):
        raise DegenerateModeError("Bogoliubov normalizer underflows")
    return np.angle(num / den)


def bogoliubov_eigenvectors(k, lam):
    """Eigenvectors ``(|e+>, |e->)`` in the ``{pair, vacuum}`` basis.

    ``|e+> = cos(theta)|0> + i sin(theta)|pair>`` and
    ``|e-> = i sin(theta)|0> + cos(theta)|pair>``.
    """
    theta = bogoliubov_angle(k, lam)
    c, s = np.cos(theta), np.sin(theta)
    plus = np.stack([1j * s, c + 0j], axis=-1)
    minus = np.stack([c + 0j, 1j * s], axis=-1)
    return plus, minus


def _traceless_factor(f_of_norm, h: HermitianMode, limit):
    # f(n)/n with the analytic n -> 0 limit
    n = h.norm
    safe = np.where(n > 0, n, 1.0)
    return np.where(n > 0, f_of_norm(safe) / safe, limit)


def exp_scaled(h: HermitianMode, s) -> np.ndarray:
    """``exp(s H)`` in closed form; returns ``(..., 2, 2)`` array.

    Uses ``cosh(s n) I + sinh(s n) (H - a)/n`` times ``exp(s a)``. Raises
    ``FloatingPointError`` once ``|s| n`` leaves the representable range.
    """
    s = np.asarray(s, dtype=float)
    if not np.all(np.isfinite(s)):
        raise ValueError("scale must be finite")
    n = h.norm
    arg = np.abs(s) * n + np.abs(s * np.asarray(h.a))
    if np.any(arg > 700.0):
        raise FloatingPointError("exponent out of range; use the log-stabilized cgf path")
    ch = np.cosh(s * n)
    sh = _traceless_factor(lambda m: np.sinh(s * m), h, s)
    traceless = HermitianMode(x=h.x, y=h.y, z=h.z).matrix()
    eye = np.broadcast_to(np.eye(2), traceless.shape)
    out = ch[..., None, None] * eye + np.asarray(sh)[..., None, None] * traceless
    return np.exp(s * np.asarray(h.a))[..., None, None] * out


def evolve(h: HermitianMode, t) -> np.ndarray:
    """Propagator ``exp(-i H t)``; unitary, identity at ``t = 0``."""
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise ValueError("time must be finite")
    n = h.norm
    traceless = HermitianMode(x=h.x, y=h.y, z=h.z).matrix()
    eye = np.broadcast_to(np.eye(2), traceless.shape)
    sn = _traceless_factor(lambda m: np.sin(t * m), h, t)
    out = np.cos(t * n)[..., None, None] * eye - 1j * np.asarray(sn)[..., None, None] * traceless
    return np.exp(-1j * t * np.asarray(h.a))[..., None, None] * out
