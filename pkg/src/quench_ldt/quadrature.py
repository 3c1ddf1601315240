"""Composite Gauss-Legendre rules on the Brillouin half-zone (0, pi)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["QuadratureGrid", "QuadratureError", "gauss_legendre_grid", "near_critical"]

_CRITICAL_WINDOW = 0.05


class QuadratureError(RuntimeError):
    """Refinement did not reach the requested tolerance."""


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    nodes: np.ndarray
    weights: np.ndarray
    rule: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.nodes.shape != self.weights.shape or self.nodes.ndim != 1:
            raise ValueError("nodes and weights must be matching 1-d arrays")
        if not (self.nodes[0] > 0 and self.nodes[-1] < np.pi and np.all(np.diff(self.nodes) > 0)):
            raise ValueError("nodes must be strictly increasing inside (0, pi)")
        if np.any(self.weights <= 0):
            raise ValueError("weights must be positive")

    def __len__(self):
        return self.nodes.size

    def integrate(self, values) -> np.ndarray:
        """Weighted sum along the last axis (numpy pairwise summation)."""
        return np.sum(np.asarray(values) * self.weights, axis=-1)

    def refined(self) -> "QuadratureGrid":
        """Same rule with every panel split in two."""
        rule = dict(self.rule)
        rule["panels"] = 2 * rule["panels"]
        return gauss_legendre_grid(**rule)


def near_critical(*lams) -> bool:
    return any(abs(lam - 1.0) < _CRITICAL_WINDOW for lam in lams)


def _panel_edges(panels: int, graded: bool, min_width: float) -> np.ndarray:
    if not graded:
        return np.linspace(0.0, np.pi, panels + 1)
    # geometric panels toward k = 0 where the gap closes, uniform beyond
    n_geo = max(panels // 2, 4)
    split = 0.25
    geo = np.geomspace(min_width, split, n_geo)
    uni = np.linspace(split, np.pi, panels - n_geo + 1)
    return np.concatenate([[0.0], geo, uni[1:]])


def gauss_legendre_grid(panels: int = 32, order: int = 16, graded: bool = False,
                        min_width: float = 1e-6) -> QuadratureGrid:
    """Composite Gauss-Legendre rule with ``panels * order`` nodes.

    With ``graded=True`` half the panels are geometrically graded toward
    ``k = 0`` down to ``min_width``.
    """
    if panels < 1 or order < 1:
        raise ValueError("panels and order must be positive")
    x, w = np.polynomial.legendre.leggauss(order)
    edges = _panel_edges(panels, graded, min_width)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    weights = (half[:, None] * w).ravel()
    # exact interval measure; the rule is already exact up to rounding
    weights *= np.pi / np.sum(weights)
    rule = {"panels": panels, "order": order, "graded": graded, "min_width": min_width}
    return QuadratureGrid(nodes, weights, rule)
