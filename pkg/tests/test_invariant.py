import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from focusfocus.core import TWO_PI, JointTime
from focusfocus.errors import NumericFailure, ValidationError
from focusfocus.invariant import (
    ConjugatedSystem,
    PeriodLatticeBasis,
    SamplingOptions,
    coefficient_error,
    cross_derivative_residual,
    eval_S_along_ray,
    fit_invariant,
    monodromy_matrix,
    multipinch_sigma_sum,
    polar_grid,
    pull_back_series,
    regularize_sample,
    sample_at,
    sample_grid,
    symmetry_check,
)
from focusfocus.model import analytic_return_times, build_model
from focusfocus.series import TruncatedSeries2, series_eval

import oracles
from conftest import EPS, named, random_series

X, Y = oracles.X, oracles.Y
GRID = dict(r_min=0.05 * EPS, r_max=0.5 * EPS, n_r=16, n_theta=32)


def test_regularize_examples():
    s = regularize_sample(0.1, JointTime(math.log(10), 0.0))
    assert abs(s.sigma1) < 1e-15 and s.sigma2 == 0.0
    s = regularize_sample(1j * 0.5, JointTime(1.0, 2.0))
    assert s.sigma1 == pytest.approx(1.0 + math.log(0.5), abs=1e-15)
    assert s.sigma2 == pytest.approx(2.0 - math.pi / 2, abs=1e-15)
    # first representative in [0, 2 pi), later samples follow their neighbour
    s = regularize_sample(-0.1j, JointTime(1.0, 0.1))
    assert 0 <= s.sigma2 < TWO_PI
    s = regularize_sample(0.1, JointTime(1.0, 0.1), unwrap_state=-0.05)
    assert s.sigma2 == pytest.approx(0.1, abs=1e-15)
    s = regularize_sample(0.1, JointTime(1.0, TWO_PI - 0.1), unwrap_state=0.05)
    assert s.sigma2 == pytest.approx(-0.1, abs=1e-14)
    with pytest.raises(ValidationError):
        regularize_sample(0.0, JointTime(1.0, 0.0))


def test_lattice_basis():
    b = PeriodLatticeBasis(regularize_sample(0.1, JointTime(2.0, 1.0)).c, JointTime(2.0, 1.0))
    assert b.generators == ((2.0, 1.0), (0.0, TWO_PI))
    assert b.contains(JointTime(4.0, 2.0 + TWO_PI))
    assert not b.contains(JointTime(3.0, 1.5))


def test_polar_grid_order_and_count():
    g = polar_grid(0.1, 0.2, 3, 4)
    assert len(g) == 12
    assert abs(g[0] - 0.1) < 1e-15 and abs(g[1] - 0.1j) < 1e-15 and abs(g[4] - 0.15) < 1e-15
    assert abs(g[-1] - (-0.2j)) < 1e-15


def test_sample_grid_validation():
    m = build_model(TruncatedSeries2.zero(), EPS)
    with pytest.raises(ValidationError):
        sample_grid(m, 0.0, 0.2, 4, 8)
    with pytest.raises(ValidationError):
        sample_grid(m, 0.1, EPS, 4, 8)
    with pytest.raises(ValidationError):
        sample_grid(m, 0.2, 0.1, 4, 8)
    with pytest.raises(ValidationError):
        SamplingOptions(backend="exact")


def test_sigma_equals_gradient_on_grid():
    s = named("0.3X+0.1Y+0.05X2-0.02XY")
    m = build_model(s, EPS)
    p1, p2 = s.partials()
    for smp in sample_grid(m, **GRID):
        c1, c2 = smp.c.c1, smp.c.c2
        assert abs(smp.sigma1 - p1(c1, c2)) < 1e-13
        assert oracles.circle_diff(smp.sigma2, p2(c1, c2)) < 1e-13


def test_fit_zero_series():
    rep = fit_invariant(sample_grid(build_model(TruncatedSeries2.zero(), EPS), **GRID), 4)
    assert coefficient_error(rep.series, TruncatedSeries2.zero(4)) < 1e-12
    assert rep.sigma2_at_zero < 1e-12 or rep.sigma2_at_zero > TWO_PI - 1e-12


def test_fit_xy():
    rep = fit_invariant(sample_grid(build_model(named("XY"), EPS), **GRID), 2)
    assert rep.rms_residual <= 1e-10
    assert abs(rep.series.coefficient(1, 1) - 1.0) < 1e-10
    assert coefficient_error(rep.series, named("XY", 2)) < 1e-10
    assert rep.sample_count == 512 and rep.r_max == pytest.approx(0.2)


def test_fit_s01_branch():
    s = TruncatedSeries2.from_dict({(0, 1): TWO_PI - 0.1, (1, 0): 0.2})
    rep = fit_invariant(sample_grid(build_model(s, EPS), **GRID), 2)
    assert 0 <= rep.sigma2_at_zero < TWO_PI
    assert abs(rep.sigma2_at_zero - (TWO_PI - 0.1)) < 1e-10


def test_fit_too_few_samples():
    m = build_model(named("XY"), EPS)
    with pytest.raises(ValidationError, match="cannot determine"):
        fit_invariant(sample_grid(m, 0.05, 0.1, 2, 8), 5)


def test_fit_rank_deficient():
    # all samples on one ray: pure radial monomials cannot be separated
    m = build_model(named("XY"), EPS)
    samples = [sample_at(m, r) for r in np.linspace(0.02, 0.2, 40)]
    with pytest.raises(NumericFailure, match="rank"):
        fit_invariant(samples, 3)


def test_fit_residual_ceiling():
    m = build_model(named("0.3X+0.1Y+0.05X2-0.02XY"), EPS)
    samples = sample_grid(m, **GRID)
    bad = [type(s)(s.c, s.tau, s.sigma1 + 1e-3 * (-1) ** n, s.sigma2, s.source, s.err_estimate) for n, s in enumerate(samples)]
    with pytest.raises(NumericFailure, match="ceiling"):
        fit_invariant(bad, 4)


def test_cross_derivative_residual_detects_nonclosed():
    m = build_model(named("XY"), EPS)
    samples = sample_grid(m, **GRID)
    assert cross_derivative_residual(samples, 3) < 1e-10
    bad = [type(s)(s.c, s.tau, s.sigma1 + 0.5 * s.c.c2, s.sigma2 - 0.5 * s.c.c1, s.source) for s in samples]
    assert cross_derivative_residual(bad, 3) == pytest.approx(1.0, abs=1e-8)


def test_eval_S_examples():
    s = named("XY")
    assert eval_S_along_ray(s, 0.0) == 0.0
    assert eval_S_along_ray(s, complex(0.1, 0.2)) == pytest.approx(0.02, abs=1e-15)
    assert eval_S_along_ray(named("0.3X+0.1Y"), 0.1j) == pytest.approx(0.01, abs=1e-15)


def test_eval_S_matches_series_on_fit(rng):
    for _ in range(3):
        s = random_series(rng, 4)
        rep = fit_invariant(sample_grid(build_model(s, EPS), **GRID), 4)
        for _ in range(10):
            c = 0.2 * rng.uniform(0, 1) * np.exp(1j * rng.uniform(0, TWO_PI))
            # S(0) = 0 and s01 is fixed modulo 2 pi; compare on the branch of the fit
            assert abs(eval_S_along_ray(rep, c) - series_eval(rep.series, c.real, c.imag)) <= 1e-9
        with pytest.raises(ValidationError):
            eval_S_along_ray(rep, 0.3)


def test_monodromy_examples():
    m = build_model(named("0.3X+0.1Y+0.05X2-0.02XY"), EPS)
    res = monodromy_matrix(m, 0.1)
    assert res.matrix == ((1, 1), (0, 1)) and res.deviation <= 1e-6
    assert monodromy_matrix(m, 0.05, center=0.2).matrix == ((1, 0), (0, 1))
    with pytest.raises(ValidationError):
        monodromy_matrix(m, 0.5)
    with pytest.raises(ValidationError):
        monodromy_matrix(m, 0.1, n_theta=8)


def test_monodromy_multi_pinch_counts_pinches():
    s = named("0.3X+0.1Y")
    m2 = build_model(s, EPS, 2, [TruncatedSeries2.from_dict({(1, 0): 0.1})])
    assert monodromy_matrix(m2, 0.1).matrix == ((1, 2), (0, 1))


def _sympy_total(s, hs, degree):
    ref = oracles.total_series_sym(s, hs, degree)
    return TruncatedSeries2.from_dict({k: v for k, v in ref.items() if v != 0} or {(1, 0): 0.0}, degree)


def test_multipinch_identity_transition_reduces():
    s = named("0.3X+0.1Y+0.05X2-0.02XY")
    m1, m2 = build_model(s, EPS), build_model(s, EPS, 2, [TruncatedSeries2.zero(4)])
    grid = polar_grid(0.02, 0.2, 4, 8)
    r1 = [sample_at(m1, c) for c in grid]
    r2 = multipinch_sigma_sum(m2, grid).samples
    for a, b in zip(r1, r2):
        assert abs(a.sigma1 - b.sigma1) < 1e-13 and oracles.circle_diff(a.sigma2, b.sigma2) < 1e-13


def test_multipinch_total_series_against_sympy():
    s = named("0.3X+0.1Y+0.05X2-0.02XY")
    h = TruncatedSeries2.from_dict({(1, 0): 0.1})
    m = build_model(s, EPS, 2, [h])
    rep = fit_invariant(sample_grid(m, **GRID), 4)
    assert coefficient_error(rep.series, _sympy_total(s, [h], 4)) < 1e-10


def test_multipinch_offsets_do_not_change_sums():
    s = named("0.3X+0.1Y")
    m = build_model(s, EPS, 2, [TruncatedSeries2.from_dict({(1, 0): 0.1, (0, 2): 0.05})])
    res = multipinch_sigma_sum(m, polar_grid(0.04, 0.2, 2, 6), [JointTime(0.05, -0.07), JointTime(-0.03, 0.09)])
    assert res.offset_change < 1e-12
    with pytest.raises(ValidationError):
        multipinch_sigma_sum(m, [0.1], [JointTime(0, 0)])


def _sympy_conjugate(which, s):
    e = oracles.series_sym(s)
    if which == "flip-q2":
        new = e.subs(Y, -Y)
    else:
        new = -e.subs(X, -X) - sp.pi * Y
    poly = sp.Poly(sp.expand(new), X, Y)
    terms = {(int(i), int(j)): float(c) for (i, j), c in poly.terms()}
    terms[(0, 1)] = terms.get((0, 1), 0.0) % TWO_PI
    return TruncatedSeries2.from_dict(terms, s.degree)


@pytest.mark.parametrize("which", ["flip-q2", "flip-q1"])
def test_conjugated_fit_matches_sympy(which):
    s = named("0.3X+0.1Y+0.05X2-0.02XY", 4)
    conj = ConjugatedSystem(build_model(s, EPS), which)
    rep = fit_invariant(sample_grid(conj, **GRID), 4)
    assert coefficient_error(rep.series, _sympy_conjugate(which, s)) < 1e-10
    assert coefficient_error(pull_back_series(which, rep.series), s) < 1e-10


@pytest.mark.parametrize("which", ["flip-q2", "flip-q1"])
def test_symmetry_check(which):
    m = build_model(named("0.3X+0.1Y+0.05X2-0.02XY"), EPS)
    assert symmetry_check(m, which, **GRID, degree=4).deviation < 1e-10


def test_symmetry_validation():
    m = build_model(named("XY"), EPS)
    with pytest.raises(ValidationError):
        ConjugatedSystem(m, "rotate")
    m2 = build_model(named("XY"), EPS, 2, [TruncatedSeries2.from_dict({(1, 0): 0.1})])
    with pytest.raises(ValidationError):
        ConjugatedSystem(m2, "flip-q2")


coef = st.floats(-0.5, 0.5, allow_nan=False)


@settings(max_examples=40, deadline=None)
@given(st.lists(coef, min_size=14, max_size=14), st.floats(0.0, TWO_PI, exclude_max=True), st.floats(0.005, 0.39))
def test_sigma_is_gradient_property(vals, theta, r):
    s = TruncatedSeries2(4, (vals[0], vals[1] % TWO_PI, *vals[2:]))
    m = build_model(s, EPS)
    c = r * complex(math.cos(theta), math.sin(theta))
    smp = sample_at(m, c)
    p1, p2 = s.partials()
    assert abs(smp.sigma1 - p1(c.real, c.imag)) <= 1e-12
    assert oracles.circle_diff(smp.sigma2, p2(c.real, c.imag)) <= 1e-12
    t = analytic_return_times(m, c)
    assert 0 <= t.t2 < TWO_PI and t.t1 == pytest.approx(smp.tau.t1, abs=0)


@settings(max_examples=25, deadline=None)
@given(st.lists(coef, min_size=9, max_size=9))
def test_fit_roundtrip_property(vals):
    s = TruncatedSeries2(3, (vals[0], vals[1] % TWO_PI, *vals[2:]))
    rep = fit_invariant(sample_grid(build_model(s, EPS), 0.02, 0.2, 6, 12), 3)
    assert coefficient_error(rep.series, s) <= 1e-9
