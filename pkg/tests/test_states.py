import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quench_ldt.states import (
    Thermodynamics,
    coherence_factor,
    log_partition_fn,
    measured_coherent_state,
    partition_fn,
    thermal_mode_state,
)
from quench_ldt.kmode import dispersion


def test_thermodynamics_validation():
    with pytest.raises(ValueError):
        Thermodynamics(0.0)
    with pytest.raises(ValueError):
        Thermodynamics(1.0, -1.0)
    assert Thermodynamics(np.inf).beta == 0.0
    assert Thermodynamics(0.5).beta == 2.0


def test_partition_fn_large_beta_is_finite():
    lz = log_partition_fn(1.0, 0.5, Thermodynamics(1e-4))
    assert np.isfinite(lz)
    assert np.isclose(lz, dispersion(1.0, 0.5) / 1e-4, rtol=1e-12)


@given(st.floats(0.01, 3.1), st.floats(0, 2), st.floats(0.05, 10))
def test_thermal_state_trace_one(k, lam, T):
    rho = thermal_mode_state(k, lam, Thermodynamics(T))
    assert np.isclose(np.trace(rho).real, 1.0)
    assert rho[0, 0].real <= rho[1, 1].real


@given(st.floats(0.01, 3.1), st.floats(0, 2), st.floats(0.05, 10), st.floats(0.1, 5))
def test_measured_state_positive_semidefinite(k, lam, T, sigma):
    rho = measured_coherent_state(k, lam, Thermodynamics(T, sigma))
    assert np.min(np.linalg.eigvalsh(rho)) > -1e-14
    assert np.allclose(np.diag(rho), np.diag(thermal_mode_state(k, lam, Thermodynamics(T, sigma))))


def test_projective_limit_kills_coherence():
    assert coherence_factor(0.3, Thermodynamics(1.0, None)) == 0.0
    rho = measured_coherent_state(1.0, 0.5, Thermodynamics(1.0, None))
    assert rho[0, 1] == 0


def test_coherence_factor_closed_form():
    eps = dispersion(1.0, 0.5)
    th = Thermodynamics(1.0, 1.0)
    assert np.isclose(coherence_factor(eps, th), np.exp(-eps**2) / partition_fn(1.0, 0.5, th))
