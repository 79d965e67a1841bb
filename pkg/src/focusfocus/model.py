"""Glued model foliations with one or several focus-focus points.

A model with ``k`` pinches is made of ``k`` normal-form charts (segments).
Chart ``i`` carries coordinates ``(z1, z2)`` in which its local momentum map
is the quadratic ``q = conj(z1) z2``; its local value ``c_i`` is related to
the global value ``c`` (the chart-0 value) by the composed transitions::

    c = T_1(T_2(... T_i(c_i))),    T_n(c) = (c1 + h_n(c), c2).

Inside chart ``i`` a regular leaf is a cylinder running from the entry
section ``Pi_1(c_i) = (conj(c_i), 1)`` to the exit section
``Pi_2(c_i) = (exp(S1 + i S2), c_i exp(-S1 + i S2))``, where ``(S1, S2)`` is
the gradient of the segment series at ``c_i``.  The exit of segment ``i`` is
glued to the entry of segment ``i + 1 (mod k)`` by a map commuting with the
joint flow of the global momentum map.  All segment series vanish except the
closing one, which carries the prescribed series.

Joint times without further qualification are *global*: ``T1`` is the time of
the global ``H1`` and ``T2`` that of the circle action, which is ``q2`` in
every chart.  In chart ``i`` the global flow at time ``T`` is the normal-form
flow at the local time ``(alpha T1, beta T1 + T2)``, where
``(alpha, beta) = (d(c)_1/d(c_i)_1, d(c)_1/d(c_i)_2)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

from .core import (
    JointTime,
    PhasePoint,
    arg_2pi,
    as_complex,
    flow_complex,
    joint_time_between,
    mod_2pi,
    q_complex,
)
from .errors import NumericFailure, ValidationError
from .series import Poly2, TruncatedSeries2

DEFAULT_COLLAR_MARGIN = 0.2


@dataclass(frozen=True)
class TransitionSeries:
    """First component ``c1 + h(c)`` of a transition ``(c1, c2) -> (c1 + h(c), c2)``."""

    h: TruncatedSeries2

    def __post_init__(self):
        if 1.0 + self.h.coefficient(1, 0) <= 0.0:
            raise ValidationError(
                f"transition needs 1 + s_10 > 0, got s_10 = {self.h.coefficient(1, 0)}"
            )

    @cached_property
    def _polys(self) -> tuple[Poly2, Poly2, Poly2]:
        p = self.h.as_poly()
        return p, p.d_dx(), p.d_dy()

    def __call__(self, c: complex) -> complex:
        p, _, _ = self._polys
        return complex(c.real + p(c.real, c.imag), c.imag)

    def jacobian(self, c: complex) -> tuple[float, float]:
        """``(1 + dh/dX, dh/dY)`` at ``c``; the second row is always ``(0, 1)``."""
        _, px, py = self._polys
        return 1.0 + px(c.real, c.imag), py(c.real, c.imag)

    def inverse(self, c: complex) -> complex:
        p, px, _ = self._polys
        c1, c2 = c.real, c.imag
        u = c1 / (1.0 + self.h.coefficient(1, 0))
        for _ in range(60):
            f = u + p(u, c2) - c1
            df = 1.0 + px(u, c2)
            if df <= 0.0:
                break
            du = f / df
            u -= du
            if abs(du) <= 1e-16 * (1.0 + abs(u)):
                return complex(u, c2)
        if abs(u + p(u, c2) - c1) <= 1e-14 * (1.0 + abs(c1)):
            return complex(u, c2)
        raise NumericFailure(f"transition inverse did not converge at c = {c}")


@dataclass(frozen=True)
class ModelFoliation:
    series: TruncatedSeries2
    epsilon: float
    k: int = 1
    transitions: tuple[TransitionSeries, ...] = ()
    collar_margin: float = DEFAULT_COLLAR_MARGIN

    def __post_init__(self):
        if not isinstance(self.series, TruncatedSeries2):
            raise ValidationError("series must be a TruncatedSeries2")
        if not (0.0 < self.epsilon < 1.0):
            raise ValidationError(f"epsilon out of range (0, 1): {self.epsilon}")
        if int(self.k) != self.k or self.k < 1:
            raise ValidationError(f"k must be an integer >= 1, got {self.k}")
        trans = tuple(
            t if isinstance(t, TransitionSeries) else TransitionSeries(t) for t in self.transitions
        )
        if len(trans) != self.k - 1:
            raise ValidationError(
                f"transition count: k = {self.k} needs {self.k - 1} transitions, got {len(trans)}"
            )
        if not self.collar_margin > 0.0:
            raise ValidationError("collar margin must be positive")
        object.__setattr__(self, "transitions", trans)
        object.__setattr__(self, "k", int(self.k))

    # -- segment data --------------------------------------------------------

    def segment_series(self, i: int) -> TruncatedSeries2:
        if i == self.k - 1:
            return self.series
        return TruncatedSeries2.zero(self.series.degree)

    @cached_property
    def _gradients(self) -> tuple[tuple[Poly2, Poly2], ...]:
        return tuple(self.segment_series(i).partials() for i in range(self.k))

    def segment_gradient(self, i: int, c_loc: complex) -> tuple[float, float]:
        """``(S1, S2)`` of segment ``i`` at the local value ``c_loc``."""
        p1, p2 = self._gradients[i]
        return p1(c_loc.real, c_loc.imag), p2(c_loc.real, c_loc.imag)

    # -- base coordinate changes ---------------------------------------------

    def to_global(self, c_loc: complex, i: int) -> complex:
        c = c_loc
        for n in range(i, 0, -1):
            c = self.transitions[n - 1](c)
        return c

    def to_local(self, c: complex, i: int) -> complex:
        for n in range(1, i + 1):
            c = self.transitions[n - 1].inverse(c)
        return c

    def relate(self, c_from: complex, i_from: int, i_to: int) -> complex:
        """Local value in chart ``i_to`` of the leaf with local value ``c_from`` in ``i_from``."""
        if i_from == i_to:
            return c_from
        if i_to == i_from - 1:
            return self.transitions[i_from - 1](c_from)
        if i_to == i_from + 1:
            return self.transitions[i_from].inverse(c_from)
        return self.to_local(self.to_global(c_from, i_from), i_to)

    def jacobian(self, c_loc: complex, i: int) -> tuple[float, float]:
        """First row ``(alpha, beta)`` of the Jacobian of local -> global at ``c_loc``."""
        alpha, beta = 1.0, 0.0
        chain = []
        c = c_loc
        for n in range(i, 0, -1):
            chain.append(self.transitions[n - 1].jacobian(c))
            c = self.transitions[n - 1](c)
        # D = DT_1 ... DT_i, each of the form [[a, b], [0, 1]]
        for a, b in reversed(chain):
            alpha, beta = alpha * a, alpha * b + beta
        return alpha, beta

    def to_local_time(self, T1: float, T2: float, c_loc: complex, i: int) -> tuple[float, float]:
        if i == 0:
            return T1, T2
        alpha, beta = self.jacobian(c_loc, i)
        return alpha * T1, beta * T1 + T2

    def to_global_time(self, t1: float, t2: float, c_loc: complex, i: int) -> tuple[float, float]:
        if i == 0:
            return t1, t2
        alpha, beta = self.jacobian(c_loc, i)
        return t1 / alpha, t2 - beta * t1 / alpha

    # -- sections ------------------------------------------------------------

    def entry_point(self, c_loc: complex) -> tuple[complex, complex]:
        return c_loc.conjugate(), complex(1.0, 0.0)

    def exit_point(self, c_loc: complex, i: int) -> tuple[complex, complex]:
        s1, s2 = self.segment_gradient(i, c_loc)
        return cmath.exp(complex(s1, s2)), c_loc * cmath.exp(complex(-s1, s2))

    def segment_transit(self, c_loc: complex, i: int) -> tuple[float, float]:
        """Local joint time from the entry to the exit section of segment ``i``."""
        s1, s2 = self.segment_gradient(i, c_loc)
        return s1 - math.log(abs(c_loc)), s2 + arg_2pi(c_loc)

    # -- chart flows --------------------------------------------------------

    def chart_flow(self, i: int, z1: complex, z2: complex, T1: float, T2: float) -> tuple[complex, complex]:
        """Global joint flow inside chart ``i`` (no gluing)."""
        c_loc = q_complex(z1, z2)
        t1, t2 = self.to_local_time(T1, T2, c_loc, i)
        return flow_complex(z1, z2, t1, t2)

    def check_value(self, c: complex, allow_zero: bool = False) -> None:
        r = abs(c)
        if r >= self.epsilon:
            raise ValidationError(f"|c| = {r} is not below epsilon = {self.epsilon}")
        if r == 0.0 and not allow_zero:
            raise ValidationError("c = 0 is not a regular value")

    # -- gluing -------------------------------------------------------------

    def glue_forward(self, z1: complex, z2: complex, i: int) -> tuple[complex, complex]:
        """Exit collar of segment ``i`` -> entry collar of segment ``i + 1 (mod k)``."""
        j = (i + 1) % self.k
        c_i = q_complex(z1, z2)
        s1, s2 = self.segment_gradient(i, c_i)
        if z1 == 0 or abs(math.log(abs(z1)) - s1) > self.collar_margin:
            raise ValidationError("point lies outside the exit gluing collar")
        w = cmath.log(z1) - complex(s1, s2)
        T1, T2 = self.to_global_time(w.real, w.imag, c_i, i)
        c_j = self.relate(c_i, i, j)
        t1, t2 = self.to_local_time(T1, T2, c_j, j)
        e1, e2 = self.entry_point(c_j)
        return flow_complex(e1, e2, t1, t2)

    def glue_backward(self, z1: complex, z2: complex, i: int) -> tuple[complex, complex]:
        """Entry collar of segment ``i + 1 (mod k)`` -> exit collar of segment ``i``."""
        j = (i + 1) % self.k
        c_j = q_complex(z1, z2)
        if z2 == 0 or abs(math.log(abs(z2))) > self.collar_margin:
            raise ValidationError("point lies outside the entry gluing collar")
        w = cmath.log(z2)
        T1, T2 = self.to_global_time(-w.real, w.imag, c_j, j)
        c_i = self.relate(c_j, j, i)
        t1, t2 = self.to_local_time(T1, T2, c_i, i)
        x1, x2 = self.exit_point(c_i, i)
        return flow_complex(x1, x2, t1, t2)


@dataclass(frozen=True)
class ModelPoint:
    segment: int
    point: PhasePoint


def build_model(
    series: TruncatedSeries2,
    epsilon: float,
    k: int = 1,
    transitions: Sequence[TruncatedSeries2 | TransitionSeries] = (),
    collar_margin: float = DEFAULT_COLLAR_MARGIN,
) -> ModelFoliation:
    return ModelFoliation(series, epsilon, k, tuple(transitions), collar_margin)


def section_points(m: ModelFoliation, c, segment: int = 0) -> tuple[PhasePoint, PhasePoint]:
    """Entry and exit section points of ``segment`` on the leaf of global value ``c``."""
    c = as_complex(c)
    m.check_value(c)
    c_loc = m.to_local(c, segment)
    p1 = PhasePoint.from_complex(*m.entry_point(c_loc))
    p2 = PhasePoint.from_complex(*m.exit_point(c_loc, segment))
    return p1, p2


def glue_map(m: ModelFoliation, p: PhasePoint, segment: int = 0) -> PhasePoint:
    """Gluing map from the entry collar of segment ``segment + 1`` to the exit collar of ``segment``.

    For ``k = 1`` this is the map sending ``Pi_1(c)`` to ``Pi_2(c)`` and commuting
    with the joint flow.
    """
    return PhasePoint.from_complex(*m.glue_backward(p.z1, p.z2, segment))


def glue_map_inverse(m: ModelFoliation, p: PhasePoint, segment: int = 0) -> PhasePoint:
    return PhasePoint.from_complex(*m.glue_forward(p.z1, p.z2, segment))


def analytic_return_times(m: ModelFoliation, c) -> JointTime:
    """Closed-form transversal period ``(tau1, tau2)`` of the leaf ``c``, ``tau2`` in [0, 2 pi)."""
    c = as_complex(c)
    m.check_value(c)
    if m.k == 1:
        t1, t2 = m.segment_transit(c, 0)
        return JointTime(t1, mod_2pi(t2))
    T1 = T2 = 0.0
    for i in range(m.k):
        c_loc = m.to_local(c, i)
        t1, t2 = m.segment_transit(c_loc, i)
        g1, g2 = m.to_global_time(t1, t2, c_loc, i)
        T1 += g1
        T2 += g2
    return JointTime(T1, mod_2pi(T2))


def default_section_radius(c_loc: complex) -> float:
    # symmetric box: |z1| = |z2| = sqrt|c| at the section point
    return math.sqrt(abs(c_loc))


def stable_section_point(
    m: ModelFoliation,
    c_loc: complex,
    i: int,
    radius: float | None = None,
    offset: JointTime | None = None,
) -> tuple[complex, complex]:
    """Point ``A_i = (conj(c_i)/delta, delta)`` on the incoming side of pinch ``i``.

    ``offset`` is a global joint time by which ``A_i`` is moved along the leaf;
    the moved point must stay strictly inside segment ``i``.
    """
    delta = default_section_radius(c_loc) if radius is None else radius
    if not abs(c_loc) < delta <= 1.0:
        raise ValidationError(f"section radius {delta} must lie in (|c|, 1]")
    z1, z2 = c_loc.conjugate() / delta, complex(delta, 0.0)
    if offset is not None:
        t1, t2 = m.to_local_time(offset.t1, offset.t2, c_loc, i)
        z1, z2 = flow_complex(z1, z2, t1, t2)
        s1, _ = m.segment_gradient(i, c_loc)
        if not (abs(z2) < 1.0 and _log_abs(z1) < s1):
            raise ValidationError(f"section offset ({offset.t1}, {offset.t2}) moves A_{i} out of its segment")
    return z1, z2


def analytic_segment_times(
    m: ModelFoliation,
    c,
    i: int,
    offsets: Sequence[JointTime | None] | None = None,
    section_radius: float | None = None,
) -> tuple[float, float]:
    """Closed-form global joint time from ``A_i(c)`` to ``A_{i+1}(c)``; ``T2`` not reduced."""
    c = as_complex(c)
    j = (i + 1) % m.k
    c_i, c_j = m.to_local(c, i), m.to_local(c, j)
    a1, a2 = stable_section_point(m, c_i, i, section_radius, offsets[i] if offsets else None)
    b1, b2 = stable_section_point(m, c_j, j, section_radius, offsets[j] if offsets else None)
    x1, x2 = m.exit_point(c_i, i)
    t1, t2 = joint_time_between(a1, a2, x1, x2)
    T1, T2 = m.to_global_time(t1, t2, c_i, i)
    # the exit of segment i is glued onto the entry of segment j
    e1, e2 = m.entry_point(c_j)
    t1, t2 = joint_time_between(e1, e2, b1, b2)
    g1, g2 = m.to_global_time(t1, t2, c_j, j)
    return T1 + g1, T2 + g2


# -- flowing on the glued model -------------------------------------------------

_MAX_GLUINGS = 100_000


def _log_abs(z: complex) -> float:
    a = abs(z)
    return math.log(a) if a > 0.0 else -math.inf


def in_fundamental_domain(m: ModelFoliation, mp: ModelPoint, slack: float = 1e-12) -> bool:
    i = mp.segment
    z1, z2 = mp.point.z1, mp.point.z2
    c_loc = q_complex(z1, z2)
    s1, _ = m.segment_gradient(i, c_loc)
    if z1 == 0 and z2 == 0:
        return True
    if c_loc == 0:
        # two-branch singular leaf: unstable z2 = 0, stable z1 = 0
        if z2 == 0:
            return _log_abs(z1) < s1
        return z1 == 0 and _log_abs(z2) <= slack
    return -_log_abs(z2) >= -slack and _log_abs(z1) < s1 + slack


def model_flow(m: ModelFoliation, mp: ModelPoint, t: JointTime) -> ModelPoint:
    """Flow a model point by the global joint time ``t``, gluing at segment ends."""
    i = mp.segment
    if not 0 <= i < m.k:
        raise ValidationError(f"segment index {i} out of range")
    z1, z2 = mp.point.z1, mp.point.z2
    c_loc = q_complex(z1, z2)
    m.check_value(m.to_global(c_loc, i), allow_zero=True)
    remaining = float(t.t1)
    for _ in range(_MAX_GLUINGS):
        if remaining == 0.0:
            break
        c_loc = q_complex(z1, z2)
        alpha, beta = m.jacobian(c_loc, i) if i else (1.0, 0.0)
        s1, _ = m.segment_gradient(i, c_loc)
        if remaining > 0.0:
            room = (s1 - _log_abs(z1)) / alpha  # global time to the exit section
            if remaining < room:
                z1, z2 = flow_complex(z1, z2, alpha * remaining, beta * remaining)
                remaining = 0.0
            else:
                z1, z2 = flow_complex(z1, z2, alpha * room, beta * room)
                remaining -= room
                z1, z2 = m.glue_forward(z1, z2, i)
                i = (i + 1) % m.k
        else:
            room = -_log_abs(z2) / alpha  # global time back to the entry section
            if -remaining <= room:
                z1, z2 = flow_complex(z1, z2, alpha * remaining, beta * remaining)
                remaining = 0.0
            else:
                z1, z2 = flow_complex(z1, z2, -alpha * room, -beta * room)
                remaining += room
                i = (i - 1) % m.k
                z1, z2 = m.glue_backward(z1, z2, i)
    else:
        raise NumericFailure("too many gluings while flowing")
    z1, z2 = flow_complex(z1, z2, 0.0, t.t2)
    return ModelPoint(i, PhasePoint.from_complex(z1, z2))
