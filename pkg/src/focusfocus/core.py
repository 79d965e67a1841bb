"""Normal-form geometry of a focus-focus point.

Points of R^4 = C^2 carry canonical coordinates ``(x, y, xi, eta)`` with
``z1 = x + i y`` and ``z2 = xi + i eta``.  The quadratic momentum map is
``q1 + i q2 = conj(z1) * z2``; its joint flow is linear and known in closed
form.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PhasePoint:
    x: float
    y: float
    xi: float
    eta: float

    @classmethod
    def from_complex(cls, z1: complex, z2: complex) -> "PhasePoint":
        return cls(z1.real, z1.imag, z2.real, z2.imag)

    @property
    def z1(self) -> complex:
        return complex(self.x, self.y)

    @property
    def z2(self) -> complex:
        return complex(self.xi, self.eta)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.xi, self.eta)

    def norm(self) -> float:
        return math.sqrt(self.x**2 + self.y**2 + self.xi**2 + self.eta**2)


@dataclass(frozen=True)
class RegularValue:
    """A value ``c = c1 + i c2`` of the momentum map."""

    c1: float
    c2: float

    @classmethod
    def from_complex(cls, c: complex) -> "RegularValue":
        return cls(c.real, c.imag)

    @property
    def c(self) -> complex:
        return complex(self.c1, self.c2)

    @property
    def modulus(self) -> float:
        return abs(self.c)

    @property
    def arg(self) -> float:
        return arg_2pi(self.c)


@dataclass(frozen=True)
class JointTime:
    """Joint flow time: ``t1`` for q1 (or H1), ``t2`` for the circle action."""

    t1: float
    t2: float

    def __add__(self, other: "JointTime") -> "JointTime":
        return JointTime(self.t1 + other.t1, self.t2 + other.t2)

    def reduced(self) -> "JointTime":
        """Same time with ``t2`` brought into [0, 2 pi)."""
        return JointTime(self.t1, mod_2pi(self.t2))


def mod_2pi(t: float) -> float:
    r = math.fmod(t, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    # fmod of a tiny negative number can round up to exactly 2 pi
    return 0.0 if r >= TWO_PI else r


def arg_2pi(c: complex) -> float:
    """Argument of ``c`` in [0, 2 pi)."""
    return mod_2pi(math.atan2(c.imag, c.real))


def wrap_pi(t: float) -> float:
    """Representative of ``t`` modulo 2 pi in [-pi, pi)."""
    return mod_2pi(t + math.pi) - math.pi


def as_complex(c) -> complex:
    if isinstance(c, RegularValue):
        return c.c
    if isinstance(c, (tuple, list)):
        return complex(c[0], c[1])
    return complex(c)


# -- momentum map and flows ---------------------------------------------------


def q_complex(z1: complex, z2: complex) -> complex:
    return z1.conjugate() * z2


def momentum_map(p: PhasePoint) -> RegularValue:
    # real formulas, q1 = x xi + y eta, q2 = x eta - y xi
    return RegularValue(p.x * p.xi + p.y * p.eta, p.x * p.eta - p.y * p.xi)


def flow_complex(z1: complex, z2: complex, t1: float, t2: float) -> tuple[complex, complex]:
    t2 = mod_2pi(t2)
    return z1 * cmath.exp(complex(t1, t2)), z2 * cmath.exp(complex(-t1, t2))


def normal_form_flow(p: PhasePoint, t: JointTime) -> PhasePoint:
    z1, z2 = flow_complex(p.z1, p.z2, t.t1, t.t2)
    return PhasePoint.from_complex(z1, z2)


def hamiltonian_fields(p: PhasePoint) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Velocities of the q1 and q2 flows at ``p``, in ``(x, y, xi, eta)`` components."""
    x, y, xi, eta = p.as_tuple()
    v1 = (x, y, -xi, -eta)
    v2 = (-y, x, -eta, xi)
    return v1, v2


def joint_time_between(z1a: complex, z2a: complex, z1b: complex, z2b: complex) -> tuple[float, float]:
    """Joint time ``(t1, t2)`` of the normal-form flow taking point a to point b.

    Both points must lie on the same leaf; ``t2`` is returned in [0, 2 pi).
    The better-conditioned coordinate pair is used.
    """
    if abs(z1a) * abs(z1b) >= abs(z2a) * abs(z2b):
        w = cmath.log(z1b / z1a)
        return w.real, mod_2pi(w.imag)
    w = cmath.log(z2b / z2a)
    return -w.real, mod_2pi(w.imag)
