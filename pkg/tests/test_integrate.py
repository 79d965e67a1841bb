import math

import numpy as np
import pytest
from scipy.integrate._ivp.rk import RK45

from focusfocus.core import TWO_PI, PhasePoint, momentum_map
from focusfocus.errors import NumericFailure, ValidationError
from focusfocus.integrate import (
    Q1_FIELD,
    Q2_FIELD,
    EventSpec,
    LinearField,
    active_kernel,
    inner_transit_time,
    integrate_adaptive,
    locate_event,
    numeric_inner_transit,
    numeric_return_times,
    select_kernel,
)
from focusfocus.integrate import _kernel_py
from focusfocus.model import analytic_return_times, build_model, section_points
from focusfocus.series import TruncatedSeries2

import oracles
from conftest import EPS, corpus_models, named, random_value


@pytest.fixture(params=["compiled", "python"])
def kernel(request):
    before = active_kernel()
    try:
        select_kernel(request.param)
    except ImportError:
        pytest.skip("compiled kernel not built")
    yield request.param
    select_kernel(before)


def test_compiled_kernel_is_active_by_default():
    assert active_kernel() in ("compiled", "python")


def test_step_matches_scipy_tableau():
    # one Dormand-Prince step from scipy's RK45 coefficients
    A, B, E = RK45.A, RK45.B, RK45.E
    M = 0.7 * oracles.A_Q1 + 1.3 * oracles.A_Q2
    y = np.array([0.3, -0.2, 1.1, 0.4])
    h = 0.37
    K = np.zeros((7, 4))
    K[0] = M @ y
    for s in range(1, 6):
        K[s] = M @ (y + h * A[s, :s] @ K[:s])
    y_new = y + h * B @ K[:6]
    K[6] = M @ y_new
    err = h * E @ K
    got, got_err = _kernel_py.dopri_step(0.7, 1.3, y, h)
    assert np.allclose(got, y_new, rtol=0, atol=1e-15)
    assert np.allclose(np.abs(got_err), np.abs(err), rtol=1e-10, atol=1e-18)


def test_adaptive_q1_endpoint(kernel):
    p0 = PhasePoint.from_complex(1, 1)
    traj = integrate_adaptive(Q1_FIELD, p0, math.log(2), 1e-10)
    assert abs(traj.end.z1 - 2) < 1e-9 and abs(traj.end.z2 - 0.5) < 1e-9
    assert np.all(np.diff(traj.times) > 0)


def test_adaptive_q2_period(kernel):
    p0 = PhasePoint(0.3, -0.7, 1.2, 0.1)
    end = integrate_adaptive(Q2_FIELD, p0, TWO_PI, 1e-10).end
    assert max(abs(a - b) for a, b in zip(end.as_tuple(), p0.as_tuple())) < 1e-9


def test_zero_time_gives_single_node(kernel):
    traj = integrate_adaptive(Q1_FIELD, PhasePoint(1, 2, 3, 4), 0.0, 1e-8)
    assert len(traj.times) == 1 and traj.end == PhasePoint(1, 2, 3, 4)


@pytest.mark.parametrize("tol", [1e-6, 1e-8, 1e-10, 1e-12])
def test_endpoint_error_bound(kernel, tol, rng):
    for _ in range(5):
        p0 = rng.normal(size=4)
        a, b, T = rng.uniform(-1, 1), rng.uniform(-2, 2), rng.uniform(0.5, 3)
        end = integrate_adaptive(LinearField(a, b), PhasePoint(*p0), T, tol).end
        ref = oracles.flow(p0, a * T, b * T)
        assert np.max(np.abs(np.array(end.as_tuple()) - ref)) <= 10 * tol * (1 + np.linalg.norm(p0)) * (1 + np.abs(ref).max())


def test_conservation_along_trajectory(kernel, rng):
    tol = 1e-10
    for _ in range(5):
        p0 = PhasePoint(*rng.uniform(-1, 1, 4))
        c = momentum_map(p0).c
        traj = integrate_adaptive(LinearField(1.0, rng.uniform(-1, 1)), p0, 2.0, tol)
        for y in traj.states:
            assert abs(oracles.q(y) - c) <= 100 * tol


def test_dense_output_interpolation(kernel):
    p0 = PhasePoint(0.2, 0.1, 1.0, -0.3)
    traj = integrate_adaptive(LinearField(1.0, 0.5), p0, 2.0, 1e-10)
    for t in np.linspace(0, 2, 17):
        ref = oracles.flow(p0.as_tuple(), t, 0.5 * t)
        got = np.array(traj.interpolate(t).as_tuple())
        assert np.max(np.abs(got - ref)) < 1e-5


def test_tolerance_validation():
    with pytest.raises(ValidationError):
        integrate_adaptive(Q1_FIELD, PhasePoint(1, 0, 1, 0), 1.0, 1e-2)
    with pytest.raises(ValidationError):
        integrate_adaptive(Q1_FIELD, PhasePoint(1, 0, 1, 0), 1.0, 1e-14)


def test_step_budget(kernel):
    with pytest.raises(NumericFailure, match="budget"):
        integrate_adaptive(Q1_FIELD, PhasePoint(1, 0, 1, 0), 10.0, 1e-12, max_steps=5)


def test_locate_event_entry_to_exit(kernel):
    m = build_model(TruncatedSeries2.zero(), EPS)
    p1, _ = section_points(m, 0.1)
    t, p, _ = locate_event(Q1_FIELD, p1, EventSpec.modulus_level(1, 0.0, +1), 1e-10)
    assert abs(t - math.log(10)) < 1e-9
    assert abs(math.log(abs(p.z1))) <= 1e-10


def test_locate_event_general_function(kernel):
    # g without a declared log form goes through the chunked scan
    g = EventSpec(lambda z1, z2: abs(z1) - 2.0, +1)
    t, p, _ = locate_event(Q1_FIELD, PhasePoint(1, 0, 1, 0), g, 1e-10)
    assert abs(t - math.log(2)) < 1e-9


def test_locate_event_direction_filter(kernel):
    # g = ln|z1| - 0 already zero at start, rising: a "-" crossing never comes, a "+" one
    # is only counted after g has been negative, so start below the level
    p0 = PhasePoint(1, 0, 1, 0)
    t, _, _ = locate_event(Q2_FIELD.reversed(), p0, EventSpec(lambda z1, z2: math.sin(math.atan2(z1.imag, z1.real)), +1), 1e-10)
    assert t > 0.1
    assert abs(t - math.pi) < 1e-9


def test_locate_event_no_crossing(kernel):
    with pytest.raises(NumericFailure, match="no crossing"):
        locate_event(Q1_FIELD, PhasePoint(1, 0, 1, 0), EventSpec.modulus_level(1, -1.0, -1), 1e-10, horizon=20)


def test_inner_transit_examples():
    t = inner_transit_time(0.01, 0.1)
    assert abs(t.t1) < 1e-15 and t.t2 == 0.0
    t = inner_transit_time(math.exp(-2), 1.0)
    assert t.t1 == pytest.approx(2.0, abs=1e-15) and t.t2 == 0.0


def test_numeric_inner_transit_matches_closed_form(kernel, rng):
    for _ in range(10):
        c = random_value(rng, 1e-3, 5e-3)
        a, b = numeric_inner_transit(c, 0.1, 1e-10), inner_transit_time(c, 0.1)
        assert abs(a.t1 - b.t1) <= 1e-9 and oracles.circle_diff(a.t2, b.t2) <= 1e-9


def test_full_model_zero_series():
    m = build_model(TruncatedSeries2.zero(), EPS)
    t = numeric_return_times(m, 0.1)
    assert abs(t.t1 - math.log(10)) < 1e-8 and oracles.circle_diff(t.t2, 0.0) < 1e-8


def test_numeric_matches_scipy_dop853(rng):
    s = named("0.3X+0.1Y+0.05X2-0.02XY")
    m = build_model(s, EPS)
    for _ in range(5):
        c = random_value(rng, 0.02, 0.2)
        t = numeric_return_times(m, c)
        r1, r2 = oracles.scipy_first_return(s, c)
        assert abs(t.t1 - r1) < 1e-8 and oracles.circle_diff(t.t2, r2) < 1e-8


def _grid32(eps):
    radii = np.linspace(0.02, eps / 2, 4)
    return [r * complex(math.cos(th), math.sin(th)) for r in radii for th in np.linspace(0, TWO_PI, 8, endpoint=False) + 0.1]


def multi_models():
    s = named("0.3X+0.1Y+0.05X2-0.02XY")
    return [
        build_model(s, EPS, 2, [TruncatedSeries2.from_dict({(1, 0): 0.1, (0, 2): 0.05})]),
        build_model(s, EPS, 3, [TruncatedSeries2.from_dict({(1, 0): 0.1}), TruncatedSeries2.from_dict({(1, 1): 0.2, (0, 1): -0.1})]),
    ]


@pytest.mark.parametrize("m", corpus_models() + multi_models())
def test_numeric_agrees_with_analytic_on_grid(m):
    for c in _grid32(m.epsilon):
        a, n = analytic_return_times(m, c), numeric_return_times(m, c, tol=1e-10)
        assert abs(a.t1 - n.t1) <= 1e-7
        assert oracles.circle_diff(a.t2, n.t2) <= 1e-7
        assert 0 <= n.t2 < TWO_PI


def test_tolerance_monotonicity():
    m = build_model(named("0.3X+0.1Y+0.05X2-0.02XY"), EPS)
    grid = _grid32(EPS)
    meds = []
    for tol in (1e-6, 5e-7, 2.5e-7, 1.25e-7, 6.25e-8):
        errs = []
        for c in grid:
            a, n = analytic_return_times(m, c), numeric_return_times(m, c, tol=tol)
            errs.append(max(abs(a.t1 - n.t1), oracles.circle_diff(a.t2, n.t2)))
        meds.append(float(np.median(errs)))
    for coarse, fine in zip(meds, meds[1:]):
        assert fine <= 2 * coarse


def test_kernels_agree():
    m = build_model(named("0.3X+0.1Y+0.05X2-0.02XY"), EPS)
    before = active_kernel()
    try:
        select_kernel("compiled")
    except ImportError:
        pytest.skip("compiled kernel not built")
    a = [numeric_return_times(m, c) for c in _grid32(EPS)[:8]]
    select_kernel("python")
    b = [numeric_return_times(m, c) for c in _grid32(EPS)[:8]]
    select_kernel(before)
    for x, y in zip(a, b):
        assert abs(x.t1 - y.t1) < 1e-12 and oracles.circle_diff(x.t2, y.t2) < 1e-12


def test_numeric_floor():
    m = build_model(TruncatedSeries2.zero(), EPS)
    with pytest.raises(ValidationError, match="floor"):
        numeric_return_times(m, 0.005)
    numeric_return_times(m, 0.005, min_abs_c=0.001)
