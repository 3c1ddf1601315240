"""scikit-learn style front end: fit a quench experiment, transform w -> r."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .cgf import INITIAL_KINDS, QuenchSpec, converged_grid, default_grid
from .ratefn import LegendreSolver
from .states import Thermodynamics

__all__ = ["WorkRateFunction"]


class WorkRateFunction(TransformerMixin, BaseEstimator):
    """Rate function ``r(w)`` of one quench experiment.

    ``fit`` builds the momentum grid, the per-mode tables and the global
    Legendre scan; ``transform`` maps work densities to rate-function
    values. There is no training data: ``X`` passed to ``fit`` is only
    validated, the experiment is fully set by the constructor.

    Parameters
    ----------
    lambda_initial, lambda_quenched : float
        Transverse fields before and after the quench.
    temperature : float
        Initial temperature (``inf`` allowed).
    sigma : float or None
        Measurement precision; ``None`` is a projective measurement.
    initial_kind : {"coherent_gibbs", "thermal"}
    hold_time : float or None
        ``None`` for a single quench, otherwise the double-quench hold time.
    gauge : {"bogoliubov", "real"} or float
        Coherence phase convention.
    panels, order : int
        Gauss-Legendre composite rule on ``[0, pi]``.
    converge : bool
        Double the panels until ``c(R)`` is stable to ``1e-10``.
    scan_step : float
        Initial spacing of the global Legendre scan.

    Attributes
    ----------
    spec_ : QuenchSpec
    grid_ : QuadratureGrid
    solver_ : LegendreSolver
    mean_work_ : float
        Mean work density ``c'(0)``.

    Examples
    --------
    >>> est = WorkRateFunction(0.0, 0.5, temperature=1.0, hold_time=0.1).fit()
    >>> est.transform([[est.mean_work_]]).shape
    (1, 1)
    """

    def __init__(self, lambda_initial=0.0, lambda_quenched=0.5, temperature=1.0, sigma=1.0,
                 initial_kind="coherent_gibbs", hold_time=None, gauge="bogoliubov", panels=32, order=16,
                 converge=False, scan_step=0.05):
        self.lambda_initial = lambda_initial
        self.lambda_quenched = lambda_quenched
        self.temperature = temperature
        self.sigma = sigma
        self.initial_kind = initial_kind
        self.hold_time = hold_time
        self.gauge = gauge
        self.panels = panels
        self.order = order
        self.converge = converge
        self.scan_step = scan_step

    def _spec(self) -> QuenchSpec:
        if self.initial_kind not in INITIAL_KINDS:
            raise ValueError(f"initial_kind must be one of {INITIAL_KINDS}, got {self.initial_kind!r}")
        thermo = Thermodynamics(float(self.temperature), None if self.sigma is None else float(self.sigma))
        hold = None if self.hold_time is None else float(self.hold_time)
        return QuenchSpec(float(self.lambda_initial), float(self.lambda_quenched), thermo, self.initial_kind,
                          hold, self.gauge)

    def fit(self, X=None, y=None):
        if X is not None:
            check_array(X, ensure_2d=False)
        if int(self.panels) < 1 or int(self.order) < 1:
            raise ValueError("panels and order must be positive")
        if not self.scan_step > 0:
            raise ValueError("scan_step must be positive")
        self.spec_ = self._spec()
        if self.converge:
            self.grid_ = converged_grid(self.spec_)
        else:
            self.grid_ = default_grid(self.spec_, panels=int(self.panels), order=int(self.order))
        self.solver_ = LegendreSolver.for_spec(self.spec_, self.grid_, scan_step=self.scan_step)
        self.mean_work_ = float(self.solver_.table.dc(0.0))
        self.n_features_in_ = 1
        return self

    def _w(self, X) -> np.ndarray:
        X = check_array(X, ensure_2d=False)
        if X.ndim == 2:
            if X.shape[1] != 1:
                raise ValueError(f"expected a single column of work densities, got {X.shape[1]} columns")
            X = X[:, 0]
        return X

    def transform(self, X):
        """``r(w)`` for each row of ``X``; NaN where unsupported."""
        check_is_fitted(self, "solver_")
        w = self._w(X)
        r = [res.r if res.finite else np.nan for res in self.solver_.solve_many(w)]
        return np.array(r, dtype=float).reshape(-1, 1)

    def legendre(self, X):
        """Full :class:`LegendreResult` records (maximizer, support flags)."""
        check_is_fitted(self, "solver_")
        return self.solver_.solve_many(self._w(X))

    def cgf(self, R) -> np.ndarray:
        """Scaled cumulant generating function ``c(R)`` on the fitted grid."""
        check_is_fitted(self, "solver_")
        return self.solver_.table.c(np.asarray(R, dtype=float))
