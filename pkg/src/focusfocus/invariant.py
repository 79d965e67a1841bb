"""Regularised periods, the fitted invariant series, monodromy and consistency checks.

The transversal period ``tau(c)`` of a leaf diverges like ``-ln c`` at the
singular value.  Adding the logarithm back,

    sigma1 = tau1 + ln|c|,    sigma2 = tau2 - arg c,

gives a closed 1-form ``sigma`` that is smooth through ``c = 0``; its primitive
``S`` with ``S(0) = 0`` is the invariant series.  ``sigma2`` is only defined
modulo 2 pi; samples are unwrapped so that ``sigma2`` is continuous in grid
order, and the constant term of the fitted series is reported in [0, 2 pi).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import (
    TWO_PI,
    JointTime,
    PhasePoint,
    RegularValue,
    arg_2pi,
    as_complex,
    joint_time_between,
    mod_2pi,
    wrap_pi,
)
from .errors import NumericFailure, ValidationError
from .integrate import numeric_return_times, numeric_segment_times, numeric_transit
from .integrate.integrator import DEFAULT_MAX_STEPS
from .model import (
    ModelFoliation,
    analytic_return_times,
    analytic_segment_times,
    section_points,
)
from .series import Poly2, TruncatedSeries2, graded_indices, n_coefficients

BACKENDS = ("analytic", "numeric")
INTEGRALITY_TOL = 1e-6


@dataclass(frozen=True)
class PeriodSample:
    c: RegularValue
    tau: JointTime
    sigma1: float
    sigma2: float
    source: str = "analytic"
    err_estimate: float = 0.0

    def csv_row(self) -> list:
        vals = [self.c.c1, self.c.c2, self.tau.t1, self.tau.t2, self.sigma1, self.sigma2]
        return [float(v) for v in vals] + [self.source, float(self.err_estimate)]


@dataclass(frozen=True)
class PeriodLatticeBasis:
    """Generators ``(tau1, tau2)`` and ``(0, 2 pi)`` of the period lattice at ``c``."""

    c: RegularValue
    tau: JointTime

    @property
    def generators(self) -> tuple[tuple[float, float], tuple[float, float]]:
        return (self.tau.t1, self.tau.t2), (0.0, TWO_PI)

    def contains(self, t: JointTime, tol: float = 1e-9) -> bool:
        """Whether ``t`` is an integer combination of the generators."""
        n = t.t1 / self.tau.t1
        if abs(n - round(n)) > tol:
            return False
        rest = t.t2 - round(n) * self.tau.t2
        return abs(wrap_pi(rest)) <= tol * (1.0 + abs(t.t2))


@dataclass(frozen=True)
class SamplingOptions:
    backend: str = "analytic"
    tol: float = 1e-10
    max_steps: int = DEFAULT_MAX_STEPS
    min_abs_c: float | None = None
    section_radius: float | None = None

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ValidationError(f"backend must be one of {BACKENDS}, got {self.backend!r}")


# -- regularisation --------------------------------------------------------------


def _unwrap(raw: float, state: float | None) -> float:
    if state is None:
        return mod_2pi(raw)
    return state + wrap_pi(raw - state)


def regularize_sample(
    c,
    tau: JointTime,
    unwrap_state: float | None = None,
    source: str = "analytic",
    err_estimate: float = 0.0,
) -> PeriodSample:
    """Regularise one measured period.

    ``unwrap_state`` is the ``sigma2`` of the neighbouring sample (``None`` for
    the first one, whose representative is taken in [0, 2 pi)).
    """
    c = as_complex(c)
    if c == 0:
        raise ValidationError("c = 0 is not a regular value")
    s1 = tau.t1 + math.log(abs(c))
    s2 = _unwrap(tau.t2 - arg_2pi(c), unwrap_state)
    return PeriodSample(RegularValue.from_complex(c), tau, s1, s2, source, err_estimate)


def _segment_sigma(m: ModelFoliation, c: complex, opts: SamplingOptions, offsets=None):
    """Total period and chart-wise regularised period of a multi-pinch leaf.

    Each segment ``A_i -> A_{i+1}`` passes one pinch, in chart ``i``; its log
    divergence is removed in that chart's variable and the correction is pulled
    back to global times.  Returns ``(T1, T2, sigma1, sigma2_raw, err)``.
    """
    T1 = T2 = s1 = s2 = err = 0.0
    for i in range(m.k):
        if opts.backend == "analytic":
            t1, t2 = analytic_segment_times(m, c, i, offsets, opts.section_radius)
            e = 0.0
        else:
            t1, t2, e = numeric_segment_times(
                m, c, i, opts.tol, opts.max_steps, offsets, opts.section_radius
            )
        c_i = m.to_local(c, i)
        l1, l2 = m.to_global_time(math.log(abs(c_i)), -arg_2pi(c_i), c_i, i)
        T1 += t1
        T2 += t2
        s1 += t1 + l1
        s2 += t2 + l2
        err += e
    return T1, T2, s1, s2, err


def _raw_period(system, c: complex, opts: SamplingOptions):
    """``(tau, sigma1, sigma2 modulo 2 pi, err)`` at ``c``."""
    if isinstance(system, ModelFoliation):
        system.check_value(c)
        if system.k > 1:
            T1, T2, s1, s2, err = _segment_sigma(system, c, opts)
            return JointTime(T1, mod_2pi(T2)), s1, s2, err
        if opts.backend == "analytic":
            tau, err = analytic_return_times(system, c), 0.0
        else:
            tau, err = numeric_return_times(
                system, c, opts.section_radius, opts.tol, opts.max_steps, opts.min_abs_c, with_error=True
            )
    else:
        tau, err = system.return_times(c, opts)
    return tau, tau.t1 + math.log(abs(c)), tau.t2 - arg_2pi(c), err


def sample_at(system, c, opts: SamplingOptions = SamplingOptions(), unwrap_state: float | None = None) -> PeriodSample:
    c = as_complex(c)
    tau, s1, s2, err = _raw_period(system, c, opts)
    return PeriodSample(RegularValue.from_complex(c), tau, s1, _unwrap(s2, unwrap_state), opts.backend, err)


def _epsilon(system) -> float:
    return system.epsilon


def polar_grid(r_min: float, r_max: float, n_r: int, n_theta: int) -> list[complex]:
    """Radius-major polar grid: ``n_theta`` equally spaced angles (from 0) on each of ``n_r`` rings."""
    radii = np.linspace(r_min, r_max, n_r)
    return [complex(r * math.cos(TWO_PI * m / n_theta), r * math.sin(TWO_PI * m / n_theta)) for r in radii for m in range(n_theta)]


def check_annulus(system, r_min: float, r_max: float, n_r: int, n_theta: int) -> None:
    eps = _epsilon(system)
    if not 0.0 < r_min < r_max < eps:
        raise ValidationError(f"annulus needs 0 < r_min < r_max < epsilon = {eps}, got [{r_min}, {r_max}]")
    if int(n_r) != n_r or n_r < 2:
        raise ValidationError(f"n_r must be an integer >= 2, got {n_r}")
    if int(n_theta) != n_theta or n_theta < 4:
        raise ValidationError(f"n_theta must be an integer >= 4, got {n_theta}")


def sample_grid(
    system,
    r_min: float,
    r_max: float,
    n_r: int,
    n_theta: int,
    opts: SamplingOptions = SamplingOptions(),
) -> list[PeriodSample]:
    """Regularised periods on the polar grid, in radius-major order.

    ``sigma2`` is unwrapped along each ring; each ring starts from the first
    sample of the previous ring.
    """
    check_annulus(system, r_min, r_max, n_r, n_theta)
    out: list[PeriodSample] = []
    ring_start: float | None = None
    for n, c in enumerate(polar_grid(r_min, r_max, n_r, n_theta)):
        if n % n_theta == 0:
            state = ring_start
        s = sample_at(system, c, opts, state)
        if n % n_theta == 0:
            ring_start = s.sigma2
        state = s.sigma2
        out.append(s)
    return out


# -- fitting -------------------------------------------------------------------


@dataclass(frozen=True)
class InvariantReport:
    """Fitted invariant series and its diagnostics."""

    series: TruncatedSeries2
    degree: int
    sample_count: int
    r_min: float
    r_max: float
    rms_residual: float
    closedness_residual: float
    condition: float
    monodromy: tuple[tuple[int, int], tuple[int, int]] | None
    sigma2_at_zero: float
    action_note: str | None = None

    def __post_init__(self):
        if not 0.0 <= self.sigma2_at_zero < TWO_PI:
            raise ValueError("sigma2(0) representative must lie in [0, 2 pi)")

    def to_dict(self) -> dict:
        return {
            "series": self.series.to_triples(),
            "degree": self.degree,
            "sample_count": self.sample_count,
            "annulus": {"r_min": self.r_min, "r_max": self.r_max},
            "rms_residual": self.rms_residual,
            "closedness_residual": self.closedness_residual,
            "condition": self.condition,
            "monodromy": None if self.monodromy is None else [list(r) for r in self.monodromy],
            "sigma2_at_zero": self.sigma2_at_zero,
            "action_note": self.action_note,
        }


ACTION_NOTE = (
    "S(c) = A(c) - A(0) + Re(c ln c - c) with A(0) := 0, where dA = tau1 dc1 + tau2 dc2 "
    "and ln c uses arg c in [0, 2 pi)"
)


def _design(samples: Sequence[PeriodSample], degree: int, scale: float):
    """Stacked gradient design: rows ``scale * sigma1`` then ``scale * sigma2``."""
    idx = graded_indices(degree)
    u = np.array([[s.c.c1 / scale, s.c.c2 / scale] for s in samples])
    u1, u2 = u[:, 0], u[:, 1]
    top = np.zeros((len(samples), len(idx)))
    bot = np.zeros((len(samples), len(idx)))
    for n, (i, j) in enumerate(idx):
        if i:
            top[:, n] = i * u1 ** (i - 1) * u2**j
        if j:
            bot[:, n] = j * u1**i * u2 ** (j - 1)
    a = np.vstack([top, bot])
    y = scale * np.concatenate([[s.sigma1 for s in samples], [s.sigma2 for s in samples]])
    return a, y, np.array([scale ** (i + j) for i, j in idx])


def _poly_design(samples: Sequence[PeriodSample], degree: int, scale: float):
    terms = [(i, g - i) for g in range(degree + 1) for i in range(g, -1, -1)]
    u = np.array([[s.c.c1 / scale, s.c.c2 / scale] for s in samples])
    a = np.stack([u[:, 0] ** i * u[:, 1] ** j for i, j in terms], axis=1)
    return a, terms


def _fit_poly(samples, values, degree: int, scale: float) -> Poly2:
    a, terms = _poly_design(samples, degree, scale)
    coef, *_ = np.linalg.lstsq(a, np.asarray(values), rcond=None)
    return Poly2.from_dict({(i, j): v / scale ** (i + j) for (i, j), v in zip(terms, coef)}, degree)


def cross_derivative_residual(samples: Sequence[PeriodSample], degree: int, scale: float | None = None) -> float:
    """``max |dP/dc2 - dQ/dc1|`` over the sample points for independent fits ``P ~ sigma1``, ``Q ~ sigma2``."""
    scale = max(abs(s.c.c) for s in samples) if scale is None else scale
    d = max(degree - 1, 0)
    p = _fit_poly(samples, [s.sigma1 for s in samples], d, scale)
    q = _fit_poly(samples, [s.sigma2 for s in samples], d, scale)
    p2, q1 = p.d_dy(), q.d_dx()
    return max(abs(p2(s.c.c1, s.c.c2) - q1(s.c.c1, s.c.c2)) for s in samples)


def fit_invariant(
    samples: Sequence[PeriodSample],
    degree: int,
    residual_ceiling: float | None = 1e-6,
    monodromy=None,
    action_note: str | None = ACTION_NOTE,
) -> InvariantReport:
    """Least-squares series ``S`` of degree ``degree`` with ``grad S ~ sigma`` on the samples.

    Monomials are evaluated at ``c / r_max``.  Raises ``NumericFailure`` if the
    design is rank deficient or the RMS residual exceeds ``residual_ceiling``.
    """
    if int(degree) != degree or degree < 1:
        raise ValidationError(f"fit degree must be an integer >= 1, got {degree}")
    n_unknown = n_coefficients(degree)
    if len(samples) < 2 * n_unknown:
        raise ValidationError(f"{len(samples)} samples cannot determine {n_unknown} coefficients (need >= {2 * n_unknown})")
    radii = [abs(s.c.c) for s in samples]
    r_max = max(radii)
    a, y, powers = _design(samples, degree, r_max)
    coef, _, rank, sv = np.linalg.lstsq(a, y, rcond=None)
    if rank < n_unknown:
        raise NumericFailure(f"rank-deficient design matrix (rank {rank} < {n_unknown}); grid too degenerate")
    resid = (a @ coef - y) / r_max
    rms = float(math.sqrt(np.mean(resid**2)))
    if residual_ceiling is not None and rms > residual_ceiling:
        raise NumericFailure(f"fit RMS residual {rms:.3e} above ceiling {residual_ceiling:.3e}")
    values = coef / powers
    s01 = mod_2pi(values[1])
    values[1] = s01
    series = TruncatedSeries2(degree, tuple(float(v) for v in values))
    return InvariantReport(
        series=series,
        degree=int(degree),
        sample_count=len(samples),
        r_min=float(min(radii)),
        r_max=float(r_max),
        rms_residual=rms,
        closedness_residual=float(cross_derivative_residual(samples, degree, r_max)),
        condition=float(sv[0] / sv[-1]),
        monodromy=monodromy,
        sigma2_at_zero=float(s01),
        action_note=action_note,
    )


def coefficient_error(a: TruncatedSeries2, b: TruncatedSeries2) -> float:
    """Max coefficient difference, with the ``Y`` coefficients compared modulo 2 pi."""
    d = max(a.degree, b.degree)
    x, y = a.with_degree(d), b.with_degree(d)
    out = 0.0
    for (i, j), u, v in zip(graded_indices(d), x.coeffs, y.coeffs):
        diff = abs(wrap_pi(u - v)) if (i, j) == (0, 1) else abs(u - v)
        out = max(out, diff)
    return out


def eval_S_along_ray(fit: InvariantReport | TruncatedSeries2, c, n_nodes: int | None = None) -> float:
    """``S(c)`` by Gauss-Legendre quadrature of the fitted ``sigma`` along ``0 -> c``."""
    c = as_complex(c)
    series = fit.series if isinstance(fit, InvariantReport) else fit
    if isinstance(fit, InvariantReport) and abs(c) > fit.r_max * (1 + 1e-12):
        raise ValidationError(f"|c| = {abs(c)} beyond the sampled radius {fit.r_max}")
    if c == 0:
        return 0.0
    p1, p2 = series.partials()
    n = max(series.degree, 2) if n_nodes is None else n_nodes
    x, w = np.polynomial.legendre.leggauss(n)
    t = 0.5 * (x + 1.0)
    total = 0.0
    for tk, wk in zip(t, w):
        total += 0.5 * wk * (p1(tk * c.real, tk * c.imag) * c.real + p2(tk * c.real, tk * c.imag) * c.imag)
    return float(total)


def action_from_invariant(series: TruncatedSeries2, c) -> float:
    """Regularised action ``A(c) = S(c) - Re(c ln c - c)`` with ``A(0) = 0``."""
    c = as_complex(c)
    if c == 0:
        return 0.0
    log_c = complex(math.log(abs(c)), arg_2pi(c))
    return series(c.real, c.imag) - (c * log_c - c).real


def closedness_residual_fd(
    system,
    r_min: float,
    r_max: float,
    n: int = 9,
    h: float = 0.01,
    opts: SamplingOptions = SamplingOptions(),
) -> float:
    """Max central-difference residual ``|d sigma1/dc2 - d sigma2/dc1|`` on a Cartesian grid.

    Grid points are kept whose whole stencil lies in the annulus ``[r_min, r_max]``.
    """
    pts = [complex(a, b) for a in np.linspace(-r_max, r_max, n) for b in np.linspace(-r_max, r_max, n)]
    pts = [p for p in pts if r_min + h * math.sqrt(2) <= abs(p) <= r_max - h * math.sqrt(2)]
    if not pts:
        raise ValidationError("no Cartesian grid point has its stencil inside the annulus")
    worst = 0.0
    for p in pts:
        _, s1u, _, _ = _raw_period(system, p + 1j * h, opts)
        _, s1d, _, _ = _raw_period(system, p - 1j * h, opts)
        _, _, s2r, _ = _raw_period(system, p + h, opts)
        _, _, s2l, _ = _raw_period(system, p - h, opts)
        d1 = (s1u - s1d) / (2 * h)
        d2 = wrap_pi(s2r - s2l) / (2 * h)
        worst = max(worst, abs(d1 - d2))
    return worst


# -- monodromy -------------------------------------------------------------------


@dataclass(frozen=True)
class MonodromyResult:
    matrix: tuple[tuple[int, int], tuple[int, int]]
    raw: tuple[float, float]
    deviation: float


def monodromy_matrix(
    system,
    r: float,
    n_theta: int = 64,
    center=0.0,
    opts: SamplingOptions = SamplingOptions(),
) -> MonodromyResult:
    """Holonomy of the period-lattice basis around ``c(theta) = center + r e^{i theta}``.

    ``tau2`` is continued by keeping ``sigma2`` and the log part ``tau2 - sigma2``
    continuous.  The transported transversal generator equals
    ``a (tau1, tau2) + b (0, 2 pi)`` and the matrix is ``[[a, b], [0, 1]]``.
    """
    center = as_complex(center)
    eps = _epsilon(system)
    if not 0.0 < r < eps:
        raise ValidationError(f"loop radius must lie in (0, epsilon = {eps}), got {r}")
    if abs(center) + r >= eps:
        raise ValidationError("loop leaves the base disc")
    if int(n_theta) != n_theta or n_theta < 16:
        raise ValidationError(f"n_theta must be an integer >= 16, got {n_theta}")
    gap = abs(abs(center) - r)
    floor = 0.02 * eps if opts.backend == "numeric" else 0.0
    if opts.min_abs_c is not None and opts.backend == "numeric":
        floor = opts.min_abs_c
    if gap <= floor or gap == 0.0:
        raise ValidationError("loop passes too close to the singular value")

    sigma_state = log_state = None
    tau_first = None
    for m in range(n_theta + 1):
        c = center + r * cmath.exp(1j * TWO_PI * m / n_theta)
        if m == n_theta:
            c = center + r  # close the loop exactly
        tau, _, s2_raw, _ = _raw_period(system, c, opts)
        s2 = _unwrap(s2_raw, sigma_state)
        log_raw = tau.t2 - s2
        log = mod_2pi(log_raw) if log_state is None else log_state + wrap_pi(log_raw - log_state)
        if log_state is not None and abs(log - log_state) > 0.75 * math.pi:
            raise NumericFailure("log part jumped; refine n_theta")
        sigma_state, log_state = s2, log
        t2 = s2 + log
        if tau_first is None:
            tau_first = (tau.t1, t2)
    t1_end, t2_end = tau.t1, t2
    a = t1_end / tau_first[0]
    b = (t2_end - a * tau_first[1]) / TWO_PI
    dev = max(abs(a - round(a)), abs(b - round(b)))
    if dev > INTEGRALITY_TOL:
        raise NumericFailure(f"holonomy not integral within {INTEGRALITY_TOL}: a = {a}, b = {b}")
    return MonodromyResult(((int(round(a)), int(round(b))), (0, 1)), (float(a), float(b)), float(dev))


# -- multi-pinch ---------------------------------------------------------------


@dataclass(frozen=True)
class MultipinchResult:
    samples: list[PeriodSample]
    offset_change: float


def check_offsets(m: ModelFoliation, offsets) -> tuple[JointTime, ...]:
    if len(offsets) != m.k:
        raise ValidationError(f"need {m.k} section offsets, got {len(offsets)}")
    return tuple(o if isinstance(o, JointTime) else JointTime(float(o[0]), float(o[1])) for o in offsets)


def multipinch_sigma_sum(
    m: ModelFoliation,
    c_grid: Iterable,
    offsets=None,
    opts: SamplingOptions = SamplingOptions(),
) -> MultipinchResult:
    """Summed chart-wise regularised periods of a multi-pinch model along ``c_grid``.

    With ``offsets`` (one global joint time per section ``A_i``) the sums are
    recomputed with moved sections and the largest change is reported.
    """
    if m.k < 2:
        raise ValidationError("multi-pinch sums need k >= 2")
    moved = check_offsets(m, offsets) if offsets is not None else None
    samples: list[PeriodSample] = []
    change = 0.0
    state = None
    for c in c_grid:
        c = as_complex(c)
        m.check_value(c)
        T1, T2, s1, s2, err = _segment_sigma(m, c, opts)
        s2 = _unwrap(s2, state)
        state = s2
        samples.append(PeriodSample(RegularValue.from_complex(c), JointTime(T1, mod_2pi(T2)), s1, s2, opts.backend, err))
        if moved is not None:
            _, _, u1, u2, _ = _segment_sigma(m, c, opts, moved)
            change = max(change, abs(u1 - s1), abs(wrap_pi(u2 - s2)))
    return MultipinchResult(samples, change)


# -- symmetries ------------------------------------------------------------------

SYMMETRIES = ("flip-q2", "flip-q1")


def _psi(which: str, z1: complex, z2: complex) -> tuple[complex, complex]:
    if which == "flip-q2":
        # (x, xi) -> (-x, -xi)
        return -z1.conjugate(), -z2.conjugate()
    # (z1, z2) -> (-z2, z1)
    return -z2, z1


def _base_map(which: str, c_new: complex) -> complex:
    """Value of the original model on the leaf whose conjugated value is ``c_new``."""
    if which == "flip-q2":
        return c_new.conjugate()
    return complex(-c_new.real, c_new.imag)


@dataclass(frozen=True)
class ConjugatedSystem:
    """A single-pinch model seen through a symplectic change of chart coordinates.

    In the new coordinates ``w = psi(z)`` the quadratic map ``conj(w1) w2`` is
    ``(q1, -q2)`` for flip-q2 and ``(-q1, q2)`` for flip-q1.  Periods are
    measured directly from the transported sections in the ``w`` chart.
    """

    model: ModelFoliation
    which: str

    def __post_init__(self):
        if self.which not in SYMMETRIES:
            raise ValidationError(f"symmetry must be one of {SYMMETRIES}, got {self.which!r}")
        if self.model.k != 1:
            raise ValidationError("symmetry checks are implemented for single-pinch models")

    @property
    def epsilon(self) -> float:
        return self.model.epsilon

    def return_times(self, c_new, opts: SamplingOptions) -> tuple[JointTime, float]:
        c_new = as_complex(c_new)
        c = _base_map(self.which, c_new)
        p1, p2 = section_points(self.model, c)
        wa = PhasePoint.from_complex(*_psi(self.which, p1.z1, p1.z2))
        wb = PhasePoint.from_complex(*_psi(self.which, p2.z1, p2.z2))
        if opts.backend == "analytic":
            t1, t2 = joint_time_between(wa.z1, wa.z2, wb.z1, wb.z2)
            err = 0.0
        else:
            t, err = numeric_transit(wa, wb, opts.tol, opts.max_steps)
            t1, t2 = t.t1, t.t2
        # the positive transversal generator runs along +q1 of the new chart
        if t1 < 0:
            t1, t2 = -t1, -t2
        return JointTime(t1, mod_2pi(t2)), err


def pull_back_series(which: str, s_new: TruncatedSeries2) -> TruncatedSeries2:
    """Invariant of the original model given that of its conjugate.

    flip-q2: ``S_new(c) = S(c1, -c2)``.  flip-q1: ``S_new(c) = -S(-c1, c2) - pi c2``.
    """
    terms = {}
    for i, j, v in s_new.terms():
        if which == "flip-q2":
            terms[(i, j)] = v * (-1) ** j
        else:
            terms[(i, j)] = -v * (-1) ** i
    if which == "flip-q1":
        terms[(0, 1)] -= math.pi
    terms[(0, 1)] = mod_2pi(terms[(0, 1)])
    return TruncatedSeries2.from_dict(terms, s_new.degree)


@dataclass(frozen=True)
class SymmetryResult:
    which: str
    deviation: float
    reference: InvariantReport
    conjugated: InvariantReport


def symmetry_check(
    system: ModelFoliation,
    which: str,
    r_min: float,
    r_max: float,
    n_r: int,
    n_theta: int,
    degree: int,
    opts: SamplingOptions = SamplingOptions(),
    residual_ceiling: float | None = 1e-6,
) -> SymmetryResult:
    """Fit the invariant of ``system`` and of its conjugate; compare after pulling back."""
    conj = ConjugatedSystem(system, which)
    ref = fit_invariant(sample_grid(system, r_min, r_max, n_r, n_theta, opts), degree, residual_ceiling)
    new = fit_invariant(sample_grid(conj, r_min, r_max, n_r, n_theta, opts), degree, residual_ceiling)
    back = pull_back_series(which, new.series)
    return SymmetryResult(which, coefficient_error(back, ref.series), ref, new)
