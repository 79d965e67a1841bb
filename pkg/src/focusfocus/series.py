"""Truncated bivariate power series and dense bivariate polynomials.

Coefficients of a :class:`TruncatedSeries2` are stored in graded
lexicographic order: grade ascending, then the power of ``X`` descending,
e.g. for degree 2 the order is ``X, Y, X^2, XY, Y^2``.  There is never a
constant term.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np


def graded_indices(degree: int) -> list[tuple[int, int]]:
    """Exponent pairs ``(i, j)`` with ``1 <= i + j <= degree`` in storage order."""
    return [(i, g - i) for g in range(1, degree + 1) for i in range(g, -1, -1)]


def n_coefficients(degree: int) -> int:
    return degree * (degree + 3) // 2


@dataclass(frozen=True)
class Poly2:
    """Dense bivariate polynomial ``sum a[i, j] X^i Y^j`` (constant term allowed).

    The coefficient matrix is square, of size ``degree + 1``; entries with
    ``i + j > degree`` are zero.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        a = np.array(self.coeffs, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("Poly2 needs a square coefficient matrix")
        a.setflags(write=False)
        object.__setattr__(self, "coeffs", a)

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    @classmethod
    def zero(cls, degree: int = 0) -> "Poly2":
        return cls(np.zeros((degree + 1, degree + 1)))

    @classmethod
    def from_dict(cls, terms: Mapping[tuple[int, int], float], degree: int | None = None) -> "Poly2":
        if degree is None:
            degree = max((i + j for i, j in terms), default=0)
        a = np.zeros((degree + 1, degree + 1))
        for (i, j), v in terms.items():
            if i + j > degree:
                raise ValueError(f"term ({i},{j}) exceeds degree {degree}")
            a[i, j] += v
        return cls(a)

    def coefficient(self, i: int, j: int) -> float:
        if i < 0 or j < 0 or i + j > self.degree:
            return 0.0
        return float(self.coeffs[i, j])

    def __call__(self, c1, c2):
        """Evaluate with Horner in ``X`` over Horner-evaluated polynomials in ``Y``."""
        a = self.coeffs
        d = self.degree
        out = 0.0
        for i in range(d, -1, -1):
            inner = 0.0
            for j in range(d - i, -1, -1):
                inner = inner * c2 + a[i, j]
            out = out * c1 + inner
        return out

    def d_dx(self) -> "Poly2":
        d = self.degree
        if d == 0:
            return Poly2.zero(0)
        a = np.zeros((d, d))
        for i in range(1, d + 1):
            for j in range(0, d - i + 1):
                a[i - 1, j] = i * self.coeffs[i, j]
        return Poly2(a)

    def d_dy(self) -> "Poly2":
        d = self.degree
        if d == 0:
            return Poly2.zero(0)
        a = np.zeros((d, d))
        for i in range(0, d):
            for j in range(1, d - i + 1):
                a[i, j - 1] = j * self.coeffs[i, j]
        return Poly2(a)

    def resized(self, degree: int) -> "Poly2":
        """Pad with zeros or truncate to total degree ``degree``."""
        a = np.zeros((degree + 1, degree + 1))
        for i in range(min(degree, self.degree) + 1):
            for j in range(min(degree, self.degree) - i + 1):
                a[i, j] = self.coeffs[i, j]
        return Poly2(a)

    def __add__(self, other: "Poly2") -> "Poly2":
        d = max(self.degree, other.degree)
        return Poly2(self.resized(d).coeffs + other.resized(d).coeffs)

    def __sub__(self, other: "Poly2") -> "Poly2":
        d = max(self.degree, other.degree)
        return Poly2(self.resized(d).coeffs - other.resized(d).coeffs)

    def scaled(self, factor: float) -> "Poly2":
        return Poly2(self.coeffs * factor)

    def mul(self, other: "Poly2", max_degree: int) -> "Poly2":
        """Product truncated at total degree ``max_degree``."""
        a = np.zeros((max_degree + 1, max_degree + 1))
        for i1 in range(self.degree + 1):
            for j1 in range(self.degree - i1 + 1):
                v1 = self.coeffs[i1, j1]
                if v1 == 0.0 or i1 + j1 > max_degree:
                    continue
                for i2 in range(other.degree + 1):
                    for j2 in range(other.degree - i2 + 1):
                        if i1 + i2 + j1 + j2 <= max_degree:
                            a[i1 + i2, j1 + j2] += v1 * other.coeffs[i2, j2]
        return Poly2(a)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly2):
            return NotImplemented
        d = max(self.degree, other.degree)
        return bool(np.array_equal(self.resized(d).coeffs, other.resized(d).coeffs))

    __hash__ = None


@dataclass(frozen=True)
class TruncatedSeries2:
    """Element of R[[X, Y]]_0 truncated at total degree ``degree``."""

    degree: int
    coeffs: tuple[float, ...]

    def __post_init__(self):
        if int(self.degree) != self.degree or self.degree < 1:
            raise ValueError(f"degree must be an integer >= 1, got {self.degree!r}")
        coeffs = tuple(float(v) for v in self.coeffs)
        if len(coeffs) != n_coefficients(self.degree):
            raise ValueError(
                f"degree {self.degree} needs {n_coefficients(self.degree)} coefficients, "
                f"got {len(coeffs)}"
            )
        if not all(np.isfinite(coeffs)):
            raise ValueError("series coefficients must be finite")
        object.__setattr__(self, "degree", int(self.degree))
        object.__setattr__(self, "coeffs", coeffs)

    # construction ---------------------------------------------------------

    @classmethod
    def zero(cls, degree: int = 1) -> "TruncatedSeries2":
        return cls(degree, (0.0,) * n_coefficients(degree))

    @classmethod
    def from_dict(cls, terms: Mapping[tuple[int, int], float], degree: int | None = None) -> "TruncatedSeries2":
        if (0, 0) in terms and terms[(0, 0)] != 0:
            raise ValueError("series must have a vanishing constant term")
        terms = {k: v for k, v in terms.items() if k != (0, 0)}
        if degree is None:
            degree = max((i + j for i, j in terms), default=1)
        index = {ij: n for n, ij in enumerate(graded_indices(degree))}
        values = [0.0] * len(index)
        for (i, j), v in terms.items():
            if i < 0 or j < 0:
                raise ValueError(f"negative exponent in term ({i},{j})")
            if (i, j) not in index:
                raise ValueError(f"term ({i},{j}) exceeds degree {degree}")
            values[index[(i, j)]] += float(v)
        return cls(degree, tuple(values))

    @classmethod
    def from_triples(cls, triples: Iterable[Sequence], degree: int | None = None) -> "TruncatedSeries2":
        """Build from ``[i, j, value]`` triples (the serialized form)."""
        terms: dict[tuple[int, int], float] = {}
        for t in triples:
            if len(t) != 3:
                raise ValueError(f"series entries must be [i, j, value] triples, got {t!r}")
            i, j, v = t
            if int(i) != i or int(j) != j:
                raise ValueError(f"exponents must be integers, got {t!r}")
            key = (int(i), int(j))
            if key in terms:
                raise ValueError(f"duplicate term {key}")
            terms[key] = float(v)
        return cls.from_dict(terms, degree)

    @classmethod
    def from_poly(cls, p: Poly2, degree: int | None = None) -> "TruncatedSeries2":
        """Drop the constant term of ``p`` and truncate to ``degree``."""
        degree = max(p.degree, 1) if degree is None else degree
        terms = {(i, j): p.coefficient(i, j) for i, j in graded_indices(degree)}
        return cls.from_dict(terms, degree)

    @classmethod
    def from_gradient(cls, p1: Poly2, p2: Poly2) -> "TruncatedSeries2":
        """Antiderivative of the closed pair ``(p1, p2) = (dS/dX, dS/dY)`` with S(0) = 0.

        X-exponent ``i >= 1`` terms come from ``p1``, pure ``Y`` terms from ``p2``;
        raises if the pair is not exactly closed.
        """
        degree = max(p1.degree, p2.degree) + 1
        terms: dict[tuple[int, int], float] = {}
        for i, j in graded_indices(degree):
            if i >= 1:
                terms[(i, j)] = p1.coefficient(i - 1, j) / i
            else:
                terms[(i, j)] = p2.coefficient(0, j - 1) / j
        s = cls.from_dict(terms, degree)
        q1, q2 = s.partials()
        a = np.concatenate([p1.resized(degree).coeffs.ravel(), p2.resized(degree).coeffs.ravel()])
        b = np.concatenate([q1.resized(degree).coeffs.ravel(), q2.resized(degree).coeffs.ravel()])
        # the integer rescalings round once each way
        if np.any(np.abs(a - b) > 4 * np.finfo(float).eps * np.abs(a)):
            raise ValueError("gradient pair is not closed")
        return s

    # access ---------------------------------------------------------------

    def terms(self) -> list[tuple[int, int, float]]:
        return [(i, j, v) for (i, j), v in zip(graded_indices(self.degree), self.coeffs)]

    def to_triples(self, skip_zero: bool = False) -> list[list]:
        return [[i, j, v] for i, j, v in self.terms() if not (skip_zero and v == 0.0)]

    def coefficient(self, i: int, j: int) -> float:
        if i < 0 or j < 0 or not 1 <= i + j <= self.degree:
            return 0.0
        g = i + j
        # offset of grade g, then position inside the grade (X power descending)
        return self.coeffs[n_coefficients(g - 1) + (g - i)]

    def as_poly(self) -> Poly2:
        return Poly2.from_dict({(i, j): v for i, j, v in self.terms()}, self.degree)

    def __call__(self, c1, c2):
        return self.as_poly()(c1, c2)

    def partials(self) -> tuple[Poly2, Poly2]:
        p = self.as_poly()
        return p.d_dx(), p.d_dy()

    def with_degree(self, degree: int) -> "TruncatedSeries2":
        return TruncatedSeries2.from_poly(self.as_poly().resized(degree), degree)

    def with_coefficient(self, i: int, j: int, value: float) -> "TruncatedSeries2":
        terms = {(a, b): v for a, b, v in self.terms()}
        terms[(i, j)] = value
        return TruncatedSeries2.from_dict(terms, max(self.degree, i + j))

    def is_zero(self) -> bool:
        return all(v == 0.0 for v in self.coeffs)

    def max_abs_difference(self, other: "TruncatedSeries2") -> float:
        d = max(self.degree, other.degree)
        a = np.array(self.with_degree(d).coeffs)
        b = np.array(other.with_degree(d).coeffs)
        return float(np.max(np.abs(a - b)))

    def __add__(self, other: "TruncatedSeries2") -> "TruncatedSeries2":
        d = max(self.degree, other.degree)
        return TruncatedSeries2.from_poly(self.as_poly() + other.as_poly(), d)

    def scaled(self, factor: float) -> "TruncatedSeries2":
        return TruncatedSeries2(self.degree, tuple(v * factor for v in self.coeffs))


def series_eval(s: TruncatedSeries2, c1: float, c2: float) -> float:
    return s(c1, c2)


def series_partials(s: TruncatedSeries2) -> tuple[Poly2, Poly2]:
    return s.partials()


def invert_transition_series(h: TruncatedSeries2, degree: int) -> Poly2:
    """Series of ``u(c1, c2)`` solving ``u + h(u, c2) = c1``, truncated at ``degree``.

    This is the first component of the inverse of ``(c1, c2) -> (c1 + h, c2)``.
    """
    a10 = h.coefficient(1, 0)
    if 1.0 + a10 <= 0.0:
        raise ValueError("transition must satisfy 1 + s_10 > 0")
    x = Poly2.from_dict({(1, 0): 1.0}, degree)
    # u = (c1 - h_nl(u, c2)) / (1 + a10), where h_nl is h without its X term
    h_nl = h.with_coefficient(1, 0, 0.0)
    u = x.scaled(1.0 / (1.0 + a10))
    for _ in range(degree):
        u = (x - compose(h_nl, u, degree)).scaled(1.0 / (1.0 + a10))
    return u


def compose(s: TruncatedSeries2 | Poly2, u: Poly2, degree: int, v: Poly2 | None = None) -> Poly2:
    """Truncated composition ``s(u(X, Y), v(X, Y))``; ``v`` defaults to ``Y``."""
    p = s.as_poly() if isinstance(s, TruncatedSeries2) else s
    if v is None:
        v = Poly2.from_dict({(0, 1): 1.0}, degree)
    one = Poly2.from_dict({(0, 0): 1.0}, degree)
    upow = [one]
    for _ in range(p.degree):
        upow.append(upow[-1].mul(u, degree))
    vpow = [one]
    for _ in range(p.degree):
        vpow.append(vpow[-1].mul(v, degree))
    out = Poly2.zero(degree)
    for i in range(p.degree + 1):
        for j in range(p.degree - i + 1):
            a = p.coeffs[i, j]
            if a != 0.0:
                out = out + upow[i].mul(vpow[j], degree).scaled(a)
    return out


def compose_total_series(
    s: TruncatedSeries2, transitions: Sequence[TruncatedSeries2], degree: int | None = None
) -> TruncatedSeries2:
    """Taylor series of ``S o (T_1 o ... o T_m)^{-1}`` truncated at ``degree``.

    ``T_n(c) = (c1 + h_n(c), c2)``.  This is the invariant carried by a multi-pinch
    model whose closing segment uses ``s`` in the last chart's local variable.
    """
    degree = s.degree if degree is None else degree
    # inverse of T_1 o ... o T_m is T_m^{-1} o ... o T_1^{-1}
    u = Poly2.from_dict({(1, 0): 1.0}, degree)
    for h in transitions:
        inv = invert_transition_series(h, degree)
        u = compose(inv, u, degree)
    return TruncatedSeries2.from_poly(compose(s, u, degree), degree)
