import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quench_ldt import QuenchSpec, Thermodynamics
from quench_ldt.analysis import (
    KinkReport,
    ResolutionError,
    SweepSeries,
    detect_kinks,
    lambda_grid,
    plateau_check,
    short_time_fit,
    slope_jumps,
    spec_from_dict,
    spec_to_dict,
    sweep,
    time_grid,
)

X = np.linspace(-1, 1, 201)
H = X[1] - X[0]


def test_quadratic_has_no_kinks():
    rep = detect_kinks((X, 3 * X**2 - X + 2), threshold=10 * H)
    assert len(rep) == 0


def test_abs_kink_located_with_strength_two():
    x0 = X[137]
    rep = detect_kinks((X, np.abs(X - x0)))
    assert rep.locations == [pytest.approx(x0)]
    assert rep.strengths[0] == pytest.approx(2.0)


@given(st.floats(-3, 3), st.floats(-2, 2), st.floats(-1, 1), st.floats(-1, 1), st.integers(5, 400))
def test_smooth_series_below_documented_bound(a, b, c, d, n):
    x = np.linspace(0, 2, n)
    h = x[1] - x[0]
    f = a * np.exp(b * x) + c * x**3 + d * np.sin(3 * x)
    f2_max = np.max(np.abs(a * b**2 * np.exp(b * x) + 6 * c * x - 9 * d * np.sin(3 * x)))
    rep = detect_kinks((x, f), threshold=4 * h * f2_max + 50 * np.finfo(float).eps * np.max(np.abs(f)) / h)
    assert len(rep) == 0


def test_nonuniform_grid_slopes_exact_for_quadratics():
    x = np.sort(np.random.default_rng(0).uniform(0, 1, 40))
    assert np.nanmax(slope_jumps(x, 2 * x**2 + x)) < 1e-9


def test_log_coordinate_and_merging():
    t = np.geomspace(1e-3, 1, 120)
    y = np.where(t < 0.05, -0.1 * np.log(t), -0.1 * np.log(0.05) + 0.02 * np.log(t / 0.05))
    rep = detect_kinks((t, y), coordinate="log")
    assert len(rep) == 1 and abs(np.log(rep.locations[0] / 0.05)) < 0.1
    assert rep.coordinate == "log"
    assert set(rep.to_dict()) >= {"locations", "strengths", "threshold", "rejected"}


def test_too_few_points():
    with pytest.raises(ResolutionError):
        detect_kinks((np.arange(4.0), np.zeros(4)))


def test_refinement_rejects_underresolved_smooth_bend():
    # thermal rate function touching zero: sharply curved but analytic
    template = QuenchSpec(0.3, 0.31, Thermodynamics(1.0, 1.0), "thermal", gauge="real")
    lams = lambda_grid(0.30, 0.37, 0.005)
    s = sweep("lambda", lams, template, w=-0.002, quench_offset=0.01)
    # a short series has no smooth background to set the median scale
    rep = detect_kinks(s, threshold=1e-5)
    assert len(rep) == 0 and len(rep.rejected) == 1
    assert len(detect_kinks(s, threshold=1e-5, refine=0)) == 1


def test_refinement_keeps_true_kink():
    template = QuenchSpec(0.98, 0.99, Thermodynamics(1.0, 1.0), "coherent_gibbs", gauge="real")
    s = sweep("lambda", lambda_grid(0.98, 1.02, 0.005), template, w=0.0, quench_offset=0.01)
    rep = detect_kinks(s, threshold=1e-5)
    assert len(rep) == 1 and abs(rep.locations[0] - 1.0) < 0.005


def test_short_time_fit_examples():
    t = np.geomspace(1e-3, 1e-2, 30)
    alpha, res = short_time_fit((t, -0.3 * np.log(t)))
    assert alpha == pytest.approx(0.3) and res < 1e-12
    alpha, res = short_time_fit((t, np.full_like(t, 0.7)))
    assert alpha == pytest.approx(0.0, abs=1e-12) and res == 0.0
    with pytest.raises(ResolutionError):
        short_time_fit((t, t), window=(1.0, 2.0))


def test_plateau_check_examples():
    t = np.linspace(0, 10, 101)
    flat, level = plateau_check((t, np.where(t < 5, t, 5.0)), window=2.0)
    assert flat and level == pytest.approx(5.0)
    flat, _ = plateau_check((t, 0.1 * t), window=2.0)
    assert not flat
    with pytest.raises(ResolutionError):
        plateau_check((t, t), window=20.0)


def test_sweep_preserves_order_and_is_deterministic():
    template = QuenchSpec(0.0, 0.5, Thermodynamics(1.0, 1.0), "coherent_gibbs", 0.01)
    t = time_grid(1e-3, 1e-1, 12, 0.5, 4)
    a = sweep("time", t, template, w=0.03, threads=1)
    b = sweep("time", t, template, w=0.03, threads=3)
    assert np.array_equal(a.r, b.r) and np.array_equal(a.values, t)
    assert a.supported.all()
    assert a.provenance["axis"] == "time"


def test_work_density_sweep_marks_gaps():
    template = QuenchSpec(0.0, 0.5, hold_time=0.1)
    s = sweep("work_density", [0.0, 0.03, 50.0], template)
    assert s.supported.tolist() == [True, True, False]
    assert np.isnan(s.r[2])


def test_sweep_errors():
    template = QuenchSpec(0.0, 0.5, hold_time=0.1)
    with pytest.raises(ValueError):
        sweep("temperature", [1.0], template, w=0.0)
    with pytest.raises(ValueError):
        sweep("time", [0.1, 0.05, 0.2], template, w=0.0)
    with pytest.raises(ValueError):
        sweep("time", [0.1], template)


def test_spec_dict_round_trip():
    spec = QuenchSpec(0.2, 0.9, Thermodynamics(0.4, None), "thermal", 1.5, "real")
    assert spec_from_dict(spec_to_dict(spec)) == spec


def test_default_grids():
    t = time_grid()
    assert t.size == 400 and t[0] == pytest.approx(1e-3) and t[-1] == pytest.approx(10.0)
    assert np.all(np.diff(t) > 0)
    lam = lambda_grid()
    assert lam.size == 401 and 1.0 in lam


def test_kink_report_len():
    assert len(KinkReport([0.1], [1.0], [3], 0.5, 0.01)) == 1
    assert isinstance(SweepSeries, type)
