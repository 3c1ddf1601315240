import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import mode_matrix, pauli_matrix, taylor_expm

from quench_ldt.kmode import (
    DegenerateModeError,
    HermitianMode,
    bogoliubov_angle,
    bogoliubov_eigenvectors,
    dispersion,
    evolve,
    exp_scaled,
    hamiltonian_k,
)

momenta = st.floats(1e-3, np.pi - 1e-3)
fields = st.floats(0.0, 3.0)
coef = st.floats(-2.0, 2.0)


def test_dispersion_critical_gap_closes():
    k = np.array([1e-6, 1e-3])
    assert np.allclose(dispersion(k, 1.0), 2 * np.sin(k / 2))
    assert dispersion(1e-6, 1.0) < 1e-5


@pytest.mark.parametrize("k", [0.0, np.pi, -0.1])
def test_momentum_outside_open_interval_rejected(k):
    with pytest.raises(ValueError):
        dispersion(k, 0.5)


@given(momenta, fields)
def test_dispersion_is_eigenvalue(k, lam):
    vals = np.linalg.eigvalsh(mode_matrix(k, lam))
    assert np.allclose(vals, [-dispersion(k, lam), dispersion(k, lam)], atol=1e-12)


@given(momenta, fields)
def test_hamiltonian_matrix(k, lam):
    assert np.allclose(hamiltonian_k(k, lam).matrix(), mode_matrix(k, lam), atol=1e-15)


@given(momenta, fields)
def test_bogoliubov_vectors_are_orthonormal_eigenvectors(k, lam):
    plus, minus = bogoliubov_eigenvectors(k, lam)
    H = mode_matrix(k, lam)
    eps = dispersion(k, lam)
    assert np.allclose(H @ plus, eps * plus, atol=1e-10)
    assert np.allclose(H @ minus, -eps * minus, atol=1e-10)
    assert abs(np.vdot(plus, minus)) < 1e-12
    assert np.isclose(np.vdot(plus, plus).real, 1.0)


def test_bogoliubov_angle_range_and_degenerate_limit():
    theta = bogoliubov_angle(np.linspace(0.1, 3.0, 7), 0.3)
    assert np.all((theta > -np.pi) & (theta <= np.pi))
    with pytest.raises(DegenerateModeError):
        # sin k underflows and lam - cos k - eps rounds to zero
        bogoliubov_angle(1e-300, 1e300)


def test_exp_scaled_zero_norm_limit():
    h = HermitianMode(a=0.3)
    assert np.allclose(exp_scaled(h, 2.0), np.exp(0.6) * np.eye(2))


def test_exp_scaled_overflow_guard():
    with pytest.raises(FloatingPointError):
        exp_scaled(HermitianMode(z=1.0), 800.0)


@given(coef, coef, coef, coef, st.floats(-3, 3))
def test_exp_scaled_matches_taylor(a, x, y, z, s):
    h = HermitianMode(a, x, y, z)
    ref = taylor_expm(s * pauli_matrix(a, x, y, z))
    assert np.allclose(exp_scaled(h, s), ref, rtol=1e-12, atol=1e-12)


@given(coef, coef, coef, st.floats(0, 10), st.floats(0, 10))
def test_evolve_unitary_and_group_law(x, y, z, t1, t2):
    h = HermitianMode(0.0, x, y, z)
    u = evolve(h, t1)
    assert np.allclose(u @ u.conj().T, np.eye(2), atol=1e-12)
    assert np.allclose(evolve(h, t1) @ evolve(h, t2), evolve(h, t1 + t2), atol=1e-11)


def test_evolve_identity_at_zero_time():
    assert np.allclose(evolve(hamiltonian_k(1.0, 0.5), 0.0), np.eye(2))


def test_broadcasting_over_momenta():
    k = np.linspace(0.1, 3.0, 5)
    out = exp_scaled(hamiltonian_k(k, 0.7), 0.5)
    assert out.shape == (5, 2, 2)
    for i, kk in enumerate(k):
        assert np.allclose(out[i], taylor_expm(0.5 * mode_matrix(kk, 0.7)), atol=1e-13)
