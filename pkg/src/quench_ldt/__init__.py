"""Large-deviation work statistics of the quenched transverse-field Ising chain."""

__version__ = "0.1.0"

from .kmode import HermitianMode, bogoliubov_angle, dispersion, evolve, exp_scaled, hamiltonian_k
from .states import Thermodynamics, measured_coherent_state, partition_fn, thermal_mode_state
from .quadrature import QuadratureError, QuadratureGrid, gauss_legendre_grid
from .cgf import (
    ModeTable,
    QuenchSpec,
    converged_grid,
    default_grid,
    finite_size_rate_c,
    gk_dynamic,
    gk_static,
    mean_work_density,
    rate_c,
)
from .ratefn import LegendreResult, LegendreSolver, rate_function, susceptibility_lambda
from .analysis import KinkReport, SweepSeries, detect_kinks, plateau_check, short_time_fit, sweep
from .figures import FIGURES, reproduce_figure
from .estimator import WorkRateFunction

__all__ = [
    "HermitianMode", "bogoliubov_angle", "dispersion", "evolve", "exp_scaled", "hamiltonian_k",
    "Thermodynamics", "measured_coherent_state", "partition_fn", "thermal_mode_state",
    "QuadratureError", "QuadratureGrid", "gauss_legendre_grid",
    "ModeTable", "QuenchSpec", "converged_grid", "default_grid", "finite_size_rate_c",
    "gk_dynamic", "gk_static", "mean_work_density", "rate_c",
    "LegendreResult", "LegendreSolver", "rate_function", "susceptibility_lambda",
    "KinkReport", "SweepSeries", "detect_kinks", "plateau_check", "short_time_fit", "sweep",
    "FIGURES", "reproduce_figure", "WorkRateFunction",
]
