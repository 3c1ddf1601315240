import numpy as np
import pytest

from quench_ldt.quadrature import QuadratureGrid, gauss_legendre_grid, near_critical


@pytest.mark.parametrize("graded", [False, True])
def test_polynomials_and_trig(graded):
    g = gauss_legendre_grid(graded=graded)
    assert np.isclose(g.integrate(np.ones_like(g.nodes)), np.pi, atol=1e-14)
    assert np.isclose(g.integrate(np.sin(g.nodes)), 2.0, atol=1e-13)
    assert np.isclose(g.integrate(g.nodes**3), np.pi**4 / 4, rtol=1e-13)


def test_graded_grid_resolves_log_singularity():
    g = gauss_legendre_grid(graded=True)
    # int_0^pi log(k) dk = pi log(pi) - pi
    assert np.isclose(g.integrate(np.log(g.nodes)), np.pi * np.log(np.pi) - np.pi, atol=1e-9)


def test_refined_doubles_panels():
    g = gauss_legendre_grid(panels=4, order=8)
    assert len(g.refined()) == 2 * len(g)


def test_invalid_grids():
    with pytest.raises(ValueError):
        gauss_legendre_grid(panels=0)
    with pytest.raises(ValueError):
        QuadratureGrid(np.array([0.5, 0.2]), np.array([1.0, 1.0]), {})


def test_near_critical_window():
    assert near_critical(0.98)
    assert near_critical(0.3, 1.02)
    assert not near_critical(0.5, 1.5)
