import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from oracles import dense_legendre

from quench_ldt import QuenchSpec, Thermodynamics
from quench_ldt.cgf import ModeTable, default_grid, mean_work_density
from quench_ldt.ratefn import LegendreSolver, rate_function, scan_points, susceptibility_lambda

REGRESSION = json.loads((Path(__file__).parent / "data" / "regression.json").read_text())

thermal_specs = st.builds(
    lambda lam, lq, T, t: QuenchSpec(lam, lq, Thermodynamics(T, 1.0), "thermal", t),
    st.floats(0, 2), st.floats(0, 2), st.floats(0.2, 5), st.one_of(st.none(), st.floats(0, 3)),
)


def _solver(spec):
    return LegendreSolver(ModeTable.from_grid(spec, default_grid(spec)))


def test_scan_points_symmetric_and_refined_near_zero():
    R = scan_points(100.0, 0.05)
    assert np.allclose(R, -R[::-1])
    assert R[-1] == 100.0 and np.all(np.diff(R) > 0)
    assert np.diff(R)[R.size // 2] <= 0.05 * 1.001
    assert np.diff(R)[-1] > 1.0


@settings(max_examples=15)
@given(thermal_specs, st.floats(-2.5, 2.5))
def test_matches_dense_oracle(spec, R0):
    # c vanishes identically without a quench or with zero hold time
    assume(abs(spec.lambda_initial - spec.lambda_quenched) > 0.05)
    assume(spec.hold_time is None or spec.hold_time > 0.05)
    sol = _solver(spec)
    w = float(sol.table.dc(R0))
    res = sol.solve(w)
    assert res.converged
    assert abs(res.r - dense_legendre(sol.table.c, w)) < 1e-6
    assert abs(res.argmin_R - R0) < 1e-4


@given(thermal_specs)
def test_thermal_zero_at_mean_work_and_nonnegative(spec):
    sol = _solver(spec)
    wbar = mean_work_density(spec, default_grid(spec))
    assert abs(sol.solve(wbar).r) < 1e-9
    for dw in (-0.05, 0.02, 0.1):
        res = sol.solve(wbar + dw)
        assert not res.finite or res.r >= 0


def test_convex_in_w():
    spec = QuenchSpec(0.0, 0.5, Thermodynamics(1.0, 1.0), "coherent_gibbs", 0.05)
    sol = _solver(spec)
    w = np.linspace(-0.2, 0.3, 100)
    r = np.array([x.r for x in sol.solve_many(w)])
    assert np.all(np.isfinite(r))
    assert np.min(np.diff(r, 2)) >= -1e-10


def test_coherent_cgf_is_not_concave_and_moves_the_zero():
    # coherent double quench: c(R) has two competing maxima of c - w R, so the
    # rate function does not vanish at the mean work; the oracle agrees
    spec = QuenchSpec(0.0, 0.5, Thermodynamics(1.0, 1.0), "coherent_gibbs", 0.05)
    sol = _solver(spec)
    R = np.linspace(-4, 4, 801)
    assert np.max(np.diff(sol.table.c(R), 2)) > 0
    wbar = float(sol.table.dc(0.0))
    res = sol.solve(wbar)
    assert res.r > 0.05
    assert abs(res.r - dense_legendre(sol.table.c, wbar)) < 1e-6
    assert abs(res.argmin_R) > 0.5


def test_unsupported_work_density():
    spec = QuenchSpec(0.0, 0.5, hold_time=0.1)
    res = rate_function(10.0, spec)
    assert not res.supported and not res.finite and res.r == np.inf


def test_no_quench_gives_zero():
    spec = QuenchSpec(1.0, 1.0, Thermodynamics(1.0, 1.0), "thermal")
    assert rate_function(0.0, spec).r == 0.0


@pytest.mark.parametrize("case", REGRESSION["cases"], ids=lambda c: f"{c['initial_kind']}-{c['w']}")
def test_pinned_regression_values(case):
    spec = QuenchSpec(case["lambda"], case["lambda_quenched"], Thermodynamics(case["temperature"], case["sigma"]),
                      case["initial_kind"], case["hold_time"], case["gauge"])
    assert abs(rate_function(case["w"], spec).r - case["r"]) < 1e-6


def test_susceptibility_peaks_at_critical_field():
    # low temperature, w = 0.01: |dr/dlambda| is largest at the grid point nearest lambda = 1
    lams = np.arange(0.9, 1.1 + 1e-9, 0.005)
    template = QuenchSpec(0.9, 0.91, Thermodynamics(0.01, 1.0), "thermal")
    r, chi = susceptibility_lambda(0.01, lams, 0.01, template)
    assert r.shape == chi.shape == lams.shape
    assert abs(lams[np.argmax(np.abs(chi))] - 1.0) < 0.0026
    with pytest.raises(ValueError):
        susceptibility_lambda(0.01, [0.5], 0.01, template)


any_specs = st.builds(
    lambda lam, lq, T, kind, t: QuenchSpec(lam, lq, Thermodynamics(T, 1.0), kind, t),
    st.floats(0, 2), st.floats(0, 2), st.floats(0.2, 5), st.sampled_from(["thermal", "coherent_gibbs"]),
    st.one_of(st.none(), st.floats(0, 3)),
)


@settings(max_examples=25)
@given(any_specs, st.floats(-0.3, 0.3))
def test_rate_function_nonnegative(spec, w):
    # R = 0 is always a candidate and c(0) = 0, even for non-concave c
    res = _solver(spec).solve(w)
    assert not res.finite or res.r >= 0


def test_dual_round_trip_for_thermal():
    spec = QuenchSpec(0.2, 0.8, Thermodynamics(1.0, 1.0), "thermal", 0.7)
    sol = _solver(spec)
    w = np.linspace(float(sol.table.dc(4.0)), float(sol.table.dc(-4.0)), 2001)
    r = np.array([x.r for x in sol.solve_many(w)])
    for R in (-2.0, -0.5, 0.7, 1.8):
        assert abs(np.min(w * R + r) - float(sol.table.c(R))) < 1e-4


def test_low_temperature_coherence_irrelevant():
    th = Thermodynamics(0.01, 1.0)
    for w in np.linspace(0.0, 0.05, 6):
        a = rate_function(w, QuenchSpec(0.5, 0.51, th, "thermal")).r
        b = rate_function(w, QuenchSpec(0.5, 0.51, th, "coherent_gibbs")).r
        assert abs(a - b) < 1e-8
