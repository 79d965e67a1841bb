"""Return times of model foliations computed by integrating the chart flows.

On the leaf ``c`` a segment runs from a section point ``A_i`` on the local
stable side of pinch ``i`` to ``A_{i+1}``.  The passage near the pinch (from
``A_i`` to the unstable-side point ``(delta, c_i / delta)``) uses the
closed-form transit ``ln(delta^2) - ln(conj(c_i))``; the remainder, through the
gluing, is integrated numerically with event-located section crossings.
"""

from __future__ import annotations

import cmath
import math
from typing import Sequence

from ..core import JointTime, PhasePoint, arg_2pi, as_complex, joint_time_between, mod_2pi, q_complex
from ..model import default_section_radius, stable_section_point
from ..errors import NumericFailure, ValidationError
from .integrator import DEFAULT_MAX_STEPS, Q1_FIELD, EventSpec, LinearField, _check_tol, locate_event


def inner_transit_time(c, eps: float) -> JointTime:
    """Closed-form time from ``B = (conj(c)/eps, eps)`` to ``A = (eps, c/eps)``."""
    c = as_complex(c)
    w = complex(2.0 * math.log(eps), 0.0) - cmath.log(c.conjugate())
    return JointTime(w.real, mod_2pi(w.imag))


def numeric_transit(
    p_from: PhasePoint, p_to: PhasePoint, tol: float, max_steps: int = DEFAULT_MAX_STEPS
) -> tuple[JointTime, float]:
    """Joint time between two points of one leaf by integrating the q1 field.

    ``t1`` comes from locating ``|z1| = |z1(p_to)|``; ``t2`` from the phase of
    ``z1`` at the hit.  Returns ``(time, err_estimate)``.
    """
    level = math.log(abs(p_to.z1))
    start = math.log(abs(p_from.z1))
    if level == start:
        t1, p_hit, err = 0.0, p_from, 0.0
    elif level > start:
        t1, p_hit, err = locate_event(Q1_FIELD, p_from, EventSpec.modulus_level(1, level, +1), tol, max_steps)
    else:
        t1, p_hit, err = locate_event(
            Q1_FIELD.reversed(), p_from, EventSpec.modulus_level(1, level, -1), tol, max_steps
        )
        t1 = -t1
    t2 = arg_2pi(p_to.z1 / p_hit.z1)
    return JointTime(t1, t2), err


def numeric_inner_transit(c, eps: float, tol: float) -> JointTime:
    c = as_complex(c)
    b = PhasePoint.from_complex(c.conjugate() / eps, complex(eps, 0.0))
    a = PhasePoint.from_complex(complex(eps, 0.0), c / eps)
    return numeric_transit(b, a, tol)[0]


def numeric_segment_times(
    model,
    c,
    i: int,
    tol: float,
    max_steps: int = DEFAULT_MAX_STEPS,
    offsets: Sequence[JointTime | None] | None = None,
    section_radius: float | None = None,
) -> tuple[float, float, float]:
    """Global joint time ``(T1, T2)`` from ``A_i(c)`` to ``A_{i+1}(c)``, plus an error estimate.

    ``T2`` is not reduced modulo 2 pi.
    """
    k = model.k
    j = (i + 1) % k
    c = as_complex(c)
    c_i = model.to_local(c, i)
    c_j = model.to_local(c, j)
    d_i = section_radius if section_radius is not None else default_section_radius(c_i)
    off_i = offsets[i] if offsets is not None else None
    off_j = offsets[j] if offsets is not None else None
    a1, a2 = stable_section_point(model, c_i, i, section_radius, off_i)
    b1, b2 = stable_section_point(model, c_j, j, section_radius, off_j)

    # closed-form passage by the pinch, A_i -> (delta, c_i / delta)
    u1, u2 = complex(d_i, 0.0), c_i / d_i
    t1, t2 = joint_time_between(a1, a2, u1, u2)
    T1, T2 = model.to_global_time(t1, t2, c_i, i)
    err = 0.0

    # numeric: unstable side of chart i up to the exit section
    alpha, beta = model.jacobian(c_i, i)
    exit_g = _exit_event(model, i)
    s1_i, _ = model.segment_gradient(i, c_i)
    p = PhasePoint.from_complex(u1, u2)
    if exit_g(u1, u2) < 0.0:
        t_hit, p, e = locate_event(
            LinearField(alpha, beta), p, EventSpec(exit_g, +1, (1.0, 0.0, s1_i)), tol, max_steps
        )
        T1 += t_hit
        err += e
    z1, z2 = model.glue_forward(p.z1, p.z2, i)

    # numeric: chart j from the entry section down to the orbit of A_{j}
    alpha, beta = model.jacobian(c_j, j)
    level = math.log(abs(b2))
    p = PhasePoint.from_complex(z1, z2)
    if math.log(abs(z2)) <= level:
        raise NumericFailure(f"target section of segment {j} lies above its entry section")
    t_hit, p, e = locate_event(LinearField(alpha, beta), p, EventSpec.modulus_level(2, level, -1), tol, max_steps)
    T1 += t_hit
    err += e
    # close up with the circle action, which is q2 in every chart
    T2 += arg_2pi(b1 / p.z1) if b1 != 0 else arg_2pi(b2 / p.z2)
    return T1, T2, err


def _exit_event(model, i: int):
    def g(z1: complex, z2: complex) -> float:
        a = abs(z1)
        if a == 0.0:
            return -math.inf
        s1, _ = model.segment_gradient(i, q_complex(z1, z2))
        return math.log(a) - s1

    return g


def numeric_return_times(
    system,
    c,
    eps: float | None = None,
    tol: float = 1e-10,
    max_steps: int = DEFAULT_MAX_STEPS,
    min_abs_c: float | None = None,
    with_error: bool = False,
):
    """Transversal period of the leaf ``c`` from integrated chart flows, ``tau2`` in [0, 2 pi).

    ``eps`` is the radius of the box sections near each pinch (default
    ``sqrt|c_i|``).  With ``with_error`` returns ``(JointTime, err_estimate)``.
    """
    _check_tol(tol)
    c = as_complex(c)
    system.check_value(c)
    floor = 0.02 * system.epsilon if min_abs_c is None else min_abs_c
    if abs(c) < floor:
        raise ValidationError(f"|c| = {abs(c)} below the numeric floor {floor}")
    if eps is not None and not abs(c) < eps:
        raise ValidationError("section radius must exceed |c|")
    T1 = T2 = err = 0.0
    for i in range(system.k):
        t1, t2, e = numeric_segment_times(system, c, i, tol, max_steps, section_radius=eps)
        T1 += t1
        T2 += t2
        err += e
    out = JointTime(T1, mod_2pi(T2))
    return (out, err) if with_error else out
