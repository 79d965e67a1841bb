"""Trajectories, adaptive integration and event location for linear chart fields."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from ..core import PhasePoint
from ..errors import NumericFailure, ValidationError
from . import _backend

TOL_RANGE = (1e-13, 1e-3)
DEFAULT_MAX_STEPS = 200_000
DEFAULT_HORIZON = 1e4
EVENT_RESIDUAL = 1e-10


@dataclass(frozen=True)
class LinearField:
    """The field ``a X_q1 + b X_q2`` of the quadratic momentum map."""

    a: float
    b: float

    def velocity(self, p: PhasePoint) -> tuple[float, float, float, float]:
        x, y, xi, eta = p.as_tuple()
        a, b = self.a, self.b
        return (a * x - b * y, b * x + a * y, -a * xi - b * eta, b * xi - a * eta)

    def _vel_array(self, ys: np.ndarray) -> np.ndarray:
        a, b = self.a, self.b
        x, y, xi, eta = ys.T
        return np.stack([a * x - b * y, b * x + a * y, -a * xi - b * eta, b * xi - a * eta], axis=-1)

    def reversed(self) -> "LinearField":
        return LinearField(-self.a, -self.b)


Q1_FIELD = LinearField(1.0, 0.0)
Q2_FIELD = LinearField(0.0, 1.0)


@dataclass(frozen=True)
class Trajectory:
    """Accepted nodes of an adaptive run with cubic Hermite dense output."""

    field: LinearField
    times: np.ndarray
    states: np.ndarray
    err_sum: float = 0.0

    @property
    def derivatives(self) -> np.ndarray:
        return self.field._vel_array(self.states)

    @property
    def nodes(self) -> list[tuple[float, PhasePoint]]:
        return [(float(t), PhasePoint(*map(float, y))) for t, y in zip(self.times, self.states)]

    @property
    def end(self) -> PhasePoint:
        return PhasePoint(*map(float, self.states[-1]))

    def interpolate(self, t: float) -> PhasePoint:
        ts = self.times
        if not ts[0] <= t <= ts[-1]:
            raise ValueError(f"t = {t} outside trajectory span [{ts[0]}, {ts[-1]}]")
        n = min(max(int(np.searchsorted(ts, t)) - 1, 0), len(ts) - 2)
        if len(ts) == 1:
            return self.end
        return PhasePoint(*map(float, _hermite(self.field, ts[n], ts[n + 1], self.states[n], self.states[n + 1], t)))


def _hermite(field: LinearField, t0, t1, y0, y1, t):
    h = t1 - t0
    s = (t - t0) / h
    f0 = np.array(field.velocity(PhasePoint(*y0)))
    f1 = np.array(field.velocity(PhasePoint(*y1)))
    h00 = 2 * s**3 - 3 * s**2 + 1
    h10 = s**3 - 2 * s**2 + s
    h01 = -2 * s**3 + 3 * s**2
    h11 = s**3 - s**2
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def _check_tol(tol: float) -> None:
    if not TOL_RANGE[0] <= tol <= TOL_RANGE[1]:
        raise ValidationError(f"integrator tol must lie in [{TOL_RANGE[0]}, {TOL_RANGE[1]}], got {tol}")


def _raise_status(status: int) -> None:
    if status == 2:
        raise NumericFailure("integrator step budget exceeded")
    if status == 3:
        raise NumericFailure("integrator produced NaN")


def integrate_adaptive(
    field: LinearField, p0: PhasePoint, T: float, tol: float, max_steps: int = DEFAULT_MAX_STEPS
) -> Trajectory:
    """Integrate ``field`` from ``p0`` over ``[0, T]`` with Dormand-Prince 5(4) and PI control."""
    _check_tol(tol)
    if T < 0:
        raise ValidationError("integration time must be non-negative; reverse the field instead")
    ts, ys, status, err_sum = _backend.kernel.dopri_linear(
        field.a, field.b, p0.as_tuple(), float(T), tol, int(max_steps)
    )
    _raise_status(status)
    return Trajectory(field, ts, ys, err_sum)


GFunc = Callable[[complex, complex], float]


@dataclass(frozen=True)
class EventSpec:
    """Scalar event ``g(z1, z2)`` with a crossing direction (+1 increasing, -1 decreasing).

    ``log_form = (w1, w2, level)`` declares that ``g`` is (up to a slowly varying
    level) ``w1 ln|z1| + w2 ln|z2| - level``; the compiled kernel uses it to
    bracket the crossing, and ``g`` itself is used for the refinement.
    """

    g: GFunc
    direction: int
    log_form: tuple[float, float, float] | None = None

    def __post_init__(self):
        if self.direction not in (1, -1):
            raise ValidationError("event direction must be +1 or -1")

    @classmethod
    def modulus_level(cls, which: int, level: float, direction: int) -> "EventSpec":
        """``ln|z_which| - level``."""
        if which == 1:
            g = lambda z1, z2: _logabs(z1) - level  # noqa: E731
            form = (1.0, 0.0, level)
        else:
            g = lambda z1, z2: _logabs(z2) - level  # noqa: E731
            form = (0.0, 1.0, level)
        return cls(g, direction, form)

    def __call__(self, p: PhasePoint) -> float:
        return self.g(p.z1, p.z2)


def _logabs(z: complex) -> float:
    a = abs(z)
    return math.log(a) if a > 0.0 else -math.inf


def _crossed(direction: int, g0: float, g1: float) -> bool:
    return g0 < 0.0 <= g1 if direction > 0 else g0 > 0.0 >= g1


def _g_state(event: EventSpec, y) -> float:
    return event.g(complex(y[0], y[1]), complex(y[2], y[3]))


def locate_event(
    field: LinearField,
    p0: PhasePoint,
    event: EventSpec,
    tol: float,
    max_steps: int = DEFAULT_MAX_STEPS,
    horizon: float = DEFAULT_HORIZON,
) -> tuple[float, PhasePoint, float]:
    """First crossing of ``event`` along the flow of ``field`` from ``p0``.

    Returns ``(t_star, p_star, err_sum)``.  The crossing step is bracketed on
    the dense output and refined by Brent's bisection/secant hybrid applied to
    single Dormand-Prince steps from the start of the bracketing step.
    """
    _check_tol(tol)
    kern = _backend.kernel
    if event.log_form is not None:
        w1, w2, level = event.log_form
        ts, ys, status, err_sum = kern.dopri_linear(
            field.a, field.b, p0.as_tuple(), horizon, tol, int(max_steps), 0.0, w1, w2, level, event.direction
        )
        _raise_status(status)
        if status != 1:
            raise NumericFailure("no crossing of the event within the horizon")
    else:
        ts, ys, err_sum = _scan_python(kern, field, p0, event, tol, max_steps, horizon)

    # the kernel brackets with the declared log form; confirm with g itself
    gs = [_g_state(event, ys[m]) for m in range(len(ts))]
    n = next((m for m in range(1, len(ts)) if _crossed(event.direction, gs[m - 1], gs[m])), None)
    if n is None:
        # the declared level drifted slightly from g: step on until g itself crosses
        n = len(ts) - 1
        h = ts[n] - ts[n - 1]
        for _ in range(50):
            y_new, _ = kern.dopri_step(field.a, field.b, ys[n], h)
            ts = np.append(ts, ts[n] + h)
            ys = np.vstack([ys, y_new])
            gs.append(_g_state(event, y_new))
            n += 1
            if _crossed(event.direction, gs[n - 1], gs[n]):
                break
        else:
            raise NumericFailure("event bracket could not be confirmed")
    t_a, y_a, h = ts[n - 1], ys[n - 1], ts[n] - ts[n - 1]

    lo, hi = 0.0, h
    subs = np.linspace(0.0, h, 9)
    g_prev = gs[n - 1]
    for s0, s1 in zip(subs[:-1], subs[1:]):
        g_mid = _g_state(event, _hermite(field, t_a, t_a + h, y_a, ys[n], t_a + s1))
        if _crossed(event.direction, g_prev, g_mid):
            lo, hi = s0, s1
            break
        g_prev = g_mid

    def phi(s: float) -> float:
        if s == 0.0:
            return gs[n - 1]
        y, _ = kern.dopri_step(field.a, field.b, y_a, s)
        return _g_state(event, y)

    f_lo, f_hi = phi(lo), phi(hi)
    if f_lo * f_hi > 0.0 or (f_lo == 0.0 and lo == 0.0):
        lo, hi = 0.0, h
        f_lo, f_hi = gs[n - 1], phi(h)
    if f_hi == 0.0:
        s_star = hi
    else:
        s_star = brentq(phi, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)
    y_star, _ = kern.dopri_step(field.a, field.b, y_a, s_star) if s_star > 0 else (y_a, None)
    p_star = PhasePoint(*map(float, y_star))
    if abs(event(p_star)) > EVENT_RESIDUAL:
        raise NumericFailure(f"event residual {abs(event(p_star)):.3e} above {EVENT_RESIDUAL}")
    return float(t_a + s_star), p_star, err_sum


def _scan_python(kern, field, p0, event, tol, max_steps, horizon, chunk=1.0):
    """Chunked integration with node-wise evaluation of a general ``g``."""
    t0 = 0.0
    y0 = p0.as_tuple()
    g_prev = _g_state(event, y0)
    all_t, all_y, err_total, used = [np.array([0.0])], [np.array([y0])], 0.0, 0
    while t0 < horizon:
        ts, ys, status, err_sum = kern.dopri_linear(field.a, field.b, y0, chunk, tol, int(max_steps - used))
        _raise_status(status)
        used += len(ts)
        err_total += err_sum
        for m in range(1, len(ts)):
            g = _g_state(event, ys[m])
            if _crossed(event.direction, g_prev, g):
                all_t.append(ts[1 : m + 1] + t0)
                all_y.append(ys[1 : m + 1])
                return np.concatenate(all_t), np.vstack(all_y), err_total
            g_prev = g
        all_t.append(ts[1:] + t0)
        all_y.append(ys[1:])
        t0 += chunk
        y0 = tuple(ys[-1])
    raise NumericFailure("no crossing of the event within the horizon")
