"""Elliptic curves over K and over small finite fields.

Point counting is brute force: the residue fields here have at most 49
elements, so #E(F_q) = q + 1 + sum_x chi(f(x)) is the fastest honest route.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import mpmath

from .finitefield import FF, FFElem, chi
from .quadfield import PrimeIdeal, QInt, QuadField, _reconstruct, sqrt_exact, working_dps


class SingularCurve(ValueError):
    pass


class HasseBoundViolation(AssertionError):
    pass


class NotSplit(ValueError):
    """The cubic does not split over K."""


# ---------------------------------------------------------------------------
# Curves over K


@dataclass(frozen=True)
class CurveK:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 over O_K.

    `roots` is set when the model is y^2 = (x - e1)(x - e2)(x - e3).
    """

    ainvs: tuple[QInt, QInt, QInt, QInt, QInt]
    label: str = ""
    roots: tuple[QInt, QInt, QInt] | None = None

    def __post_init__(self):
        if self.discriminant().is_zero():
            raise SingularCurve(f"curve {self.label or self.ainvs} is singular")

    @classmethod
    def from_roots(cls, e1: QInt, e2: QInt, e3: QInt, label: str = "") -> "CurveK":
        a2 = -(e1 + e2 + e3)
        a4 = e1 * e2 + e1 * e3 + e2 * e3
        a6 = -(e1 * e2 * e3)
        z = e1.F.zero
        return cls((z, a2, z, a4, a6), label, (e1, e2, e3))

    @classmethod
    def two_torsion(cls, A: QInt, B: QInt, label: str = "") -> "CurveK":
        """y^2 = x(x - A)(x + B)."""
        return cls.from_roots(A.F.zero, A, -B, label)

    @property
    def F(self) -> QuadField:
        return self.ainvs[0].F

    @property
    def b_invariants(self) -> tuple[QInt, QInt, QInt, QInt]:
        a1, a2, a3, a4, a6 = self.ainvs
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    def c4(self) -> QInt:
        b2, b4, _, _ = self.b_invariants
        return b2 * b2 - 24 * b4

    def discriminant(self) -> QInt:
        b2, b4, b6, b8 = self.b_invariants
        return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    def same_j(self, other: "CurveK") -> bool:
        """j(self) == j(other), by cross-multiplying c4^3 / Delta."""
        return self.c4() ** 3 * other.discriminant() == other.c4() ** 3 * self.discriminant()

    def monic_cubic(self) -> tuple[QInt, QInt, QInt]:
        """(c2, c1, c0) when a1 = a3 = 0."""
        a1, a2, a3, a4, a6 = self.ainvs
        if not (a1.is_zero() and a3.is_zero()):
            raise ValueError("model is not of the form y^2 = f(x); complete the square first")
        return a2, a4, a6

    def reduce(self, P: PrimeIdeal) -> "CurveFF":
        if not P.odd:
            raise ValueError("reduction is only implemented at odd primes")
        C = self if self.roots is not None or self._is_monic() else complete_square(self)
        c2, c1, c0 = C.monic_cubic()
        return CurveFF(P.residue_field, (P.reduce(c2), P.reduce(c1), P.reduce(c0)))

    def _is_monic(self) -> bool:
        return self.ainvs[0].is_zero() and self.ainvs[2].is_zero()

    def __repr__(self):
        if self.roots is not None:
            return f"CurveK({self.label!r}, roots={list(self.roots)})"
        return f"CurveK({self.label!r}, ainvs={list(self.ainvs)})"


def complete_square(C: CurveK) -> CurveK:
    """Y^2 = X^3 + b2 X^2 + 8 b4 X + 16 b6, via (X, Y) = (4x, 8y + 4a1 x + 4a3).

    The scaling u = 2 multiplies the discriminant by 2^12.
    """
    b2, b4, b6, _ = C.b_invariants
    z = C.F.zero
    roots = None
    if C.roots is not None:
        roots = tuple(4 * e for e in C.roots)
    return CurveK((z, b2, z, 8 * b4, 16 * b6), C.label, roots)


def cubic_roots(c2: QInt, c1: QInt, c0: QInt) -> tuple[QInt, QInt, QInt]:
    """The three roots in O_K of x^3 + c2 x^2 + c1 x + c0.

    Real roots are computed under both embeddings, every pairing of the two
    root lists is tried, integer coordinates are reconstructed from the pair
    of linear equations and only exact re-evaluation is trusted.
    """
    F = c2.F

    def f(x: QInt) -> QInt:
        return ((x + c2) * x + c1) * x + c0

    dps = working_dps(c2, c1, c0)
    for attempt in range(4):
        with mpmath.workdps(dps):
            sd = mpmath.sqrt(F.d)
            per_embedding = []
            for w in ((1 + sd) / 2, (1 - sd) / 2):
                coeffs = [1] + [c.x + c.y * w for c in (c2, c1, c0)]
                rts = mpmath.polyroots(coeffs, maxsteps=200, extraprec=2 * dps)
                tol = mpmath.mpf(10) ** (-dps // 3)
                real = sorted(mpmath.re(r) for r in rts if abs(mpmath.im(r)) < tol)
                per_embedding.append(real)
            r1, r2 = per_embedding
            if len(r1) == 3 and len(r2) == 3:
                for perm in itertools.permutations(r2):
                    cand = [_reconstruct(F, t1, t2) for t1, t2 in zip(r1, perm)]
                    if len(set(cand)) == 3 and all(f(e).is_zero() for e in cand):
                        return tuple(sorted(cand, key=lambda e: (e.x, e.y)))
        dps *= 2
    raise NotSplit(f"x^3 + ({c2})x^2 + ({c1})x + ({c0}) does not split into simple roots over {F}")


def curve_roots(C: CurveK) -> tuple[tuple[QInt, QInt, QInt], CurveK]:
    """Roots of a y^2 = f(x) model for C; completes the square when needed."""
    if C.roots is not None:
        return C.roots, C
    if not C._is_monic():
        C = complete_square(C)
    roots = cubic_roots(*C.monic_cubic())
    return roots, CurveK(C.ainvs, C.label, roots)


def two_isogenous(C: CurveK) -> list[CurveK]:
    """Curves 2-isogenous to C (full 2-torsion model) that again have full
    2-torsion over K, one per kernel point whose quotient splits."""
    (roots, _) = curve_roots(C)
    out = []
    for i in range(3):
        e = roots[i]
        d2, d3 = (roots[j] - e for j in range(3) if j != i)
        # quotient of y^2 = x(x^2 - (d2+d3)x + d2 d3) by (0,0)
        s = sqrt_exact(d2 * d3)
        if s is None:
            continue
        z = C.F.zero
        out.append(CurveK.from_roots(z, -(d2 + d3) + 2 * s, -(d2 + d3) - 2 * s, f"{C.label}/2"))
    return out


def isomorphic_over_K(C1: CurveK, C2: CurveK) -> bool:
    """Root-form curves are K-isomorphic iff some ordering of the roots is an
    affine image e' = u^2 e + beta with u in K."""
    r1, _ = curve_roots(C1)
    r2, _ = curve_roots(C2)
    for perm in itertools.permutations(r2):
        d2, d3 = r1[1] - r1[0], r1[2] - r1[0]
        n2, n3 = perm[1] - perm[0], perm[2] - perm[0]
        if n2 * d3 != n3 * d2:
            continue
        # u^2 = n2 / d2 is a square iff n2 * d2 is
        if sqrt_exact(n2 * d2) is not None:
            return True
    return False


def frey(a, b, label: str = ""):
    """y^2 = x(x - a)(x + b), over K (QInt) or over a finite field (FFElem)."""
    if isinstance(a, FFElem):
        if (a * b * (a + b)).is_zero():
            raise SingularCurve("Frey parameters must satisfy a*b*(a+b) != 0")
        return CurveFF(a.field, (b - a, -(a * b), a.field.zero))
    if isinstance(a, QInt):
        if (a * b * (a + b)).is_zero():
            raise SingularCurve("Frey parameters must satisfy a*b*(a+b) != 0")
        return CurveK.two_torsion(a, b, label)
    raise TypeError(f"unsupported ring element {a!r}")


# ---------------------------------------------------------------------------
# Curves over finite fields


@dataclass(frozen=True)
class CurveFF:
    """y^2 = x^3 + c2 x^2 + c1 x + c0 over a finite field."""

    field: FF
    coeffs: tuple[FFElem, FFElem, FFElem]

    def discriminant(self) -> FFElem:
        # discriminant of the cubic (the curve discriminant is 16 times this)
        a, b, c = self.coeffs
        return a * a * b * b - 4 * b**3 - 4 * a**3 * c - 27 * c * c + 18 * a * b * c

    def is_singular(self) -> bool:
        return self.discriminant().is_zero()

    def f(self, x: FFElem) -> FFElem:
        a, b, c = self.coeffs
        return ((x + a) * x + b) * x + c


@dataclass(frozen=True)
class TraceRecord:
    label: str
    prime: str
    a_q: int
    N_q: int

    def __post_init__(self):
        check_hasse(self.a_q, self.N_q)


def check_hasse(a_q: int, q: int) -> None:
    if a_q * a_q > 4 * q:
        raise HasseBoundViolation(f"|a_q| = {abs(a_q)} exceeds 2*sqrt({q})")


def trace_value(C: CurveFF) -> int:
    if C.is_singular():
        raise SingularCurve("trace of Frobenius requested for a singular curve")
    table = C.field.chi_table
    idx = C.field.index
    a_q = -sum(table[idx(C.f(x))] for x in C.field.elements())
    check_hasse(a_q, C.field.q)
    return a_q


def trace(C: CurveFF, label: str = "", prime: str = "") -> TraceRecord:
    """a_q = q + 1 - #C(F_q), counting 1 + chi(f(x)) points over each x plus infinity."""
    return TraceRecord(label, prime or repr(C.field), trace_value(C), C.field.q)


def naive_point_count(C: CurveFF) -> int:
    """#C(F_q) by listing every affine (x, y) with y^2 = f(x), plus infinity."""
    squares: dict[FFElem, int] = {}
    for y in C.field.elements():
        s = y * y
        squares[s] = squares.get(s, 0) + 1
    return 1 + sum(squares.get(C.f(x), 0) for x in C.field.elements())


def trace_at(C: CurveK, P: PrimeIdeal) -> TraceRecord:
    red = C.reduce(P)
    if red.is_singular():
        raise SingularCurve(f"{C.label} has bad reduction at {P}")
    return TraceRecord(C.label, repr(P), trace_value(red), P.norm)


def hasse_bound(q: int) -> float:
    return 2 * math.sqrt(q)
