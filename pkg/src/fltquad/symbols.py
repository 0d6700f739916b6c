"""Residue symbols, Hilbert symbols and reciprocity checks.

Rational arguments (int / Fraction) are handled over Q; QInt arguments over
the real quadratic field they live in.  Even places are only supported where
a closed argument exists: Q_2 (by a solubility search) and the
(1 - 4 zeta_r, unit) case over fields unramified at 2.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import prod

from .finitefield import chi, legendre
from .quadfield import (
    PrimeIdeal,
    QInt,
    QuadField,
    exact_div,
    factor_int,
    gcd,
    prime_factorization,
    sign,
    split_prime,
)


class UnsupportedEvenPlace(NotImplementedError):
    pass


class HypothesisNotMet(ValueError):
    """An instance does not satisfy the hypotheses of the identity it checks."""


# ---------------------------------------------------------------------------
# Places


@dataclass(frozen=True)
class Place:
    kind: str  # "real" | "odd" | "even"
    index: int | None = None  # real embedding index
    prime: PrimeIdeal | int | None = None

    def __repr__(self):
        if self.kind == "real":
            return f"inf{self.index}"
        return f"{self.kind}:{self.prime}"


# ---------------------------------------------------------------------------
# Residue symbols over K


def legendre_at(x: QInt, P: PrimeIdeal) -> int:
    if not P.odd:
        raise ValueError("residue symbol at an even prime")
    return chi(P.reduce(x))


def _odd_factorization(m: QInt, bound: int) -> list[tuple[PrimeIdeal, int]]:
    facs = prime_factorization(m, bound)
    if any(not P.odd for P, _ in facs):
        raise ValueError(f"modulus {m} is not odd")
    return facs


def jacobi(x: QInt, m: QInt, bound: int = 10**6) -> int:
    """The Jacobi symbol (x / m) for an odd modulus m of O_K."""
    if m.is_zero():
        raise ValueError("zero modulus")
    return jacobi_ideal(x, _odd_factorization(m, bound))


def jacobi_ideal(x: QInt, factorization: list[tuple[PrimeIdeal, int]]) -> int:
    return prod((legendre_at(x, P) ** v for P, v in factorization), start=1)


def is_square_mod(alpha: QInt, g: QInt) -> bool:
    """Whether alpha is congruent to a square modulo g O_K (exhaustive)."""
    for r in residue_system(g):
        if g.divides(r * r - alpha):
            return True
    return False


def residue_system(g: QInt) -> list[QInt]:
    """A complete set of representatives of O_K / g O_K, from the Hermite
    normal form of the lattice g O_K in the basis (1, w)."""
    F = g.F
    gw = g * F.omega
    # rows (x, y) of g and g*w; triangularize over Z in the y column
    rows = [[g.x, g.y], [gw.x, gw.y]]
    a, b = rows
    while b[1]:
        q = a[1] // b[1]
        a, b = b, [a[0] - q * b[0], a[1] - q * b[1]]
    # now b = (n1, 0) and a = (s, n2)
    n1 = abs(b[0])
    n2 = abs(a[1])
    if n1 * n2 != abs(g.norm()):
        raise ArithmeticError("Hermite form does not match the norm")
    return [F(x, y) for y in range(n2) for x in range(n1)]


@dataclass
class GenRecInstance:
    alpha: QInt
    lam: QInt
    L_part: list[tuple[PrimeIdeal, int]]
    R_part: list[tuple[PrimeIdeal, int]]
    sigma: int
    lhs: int
    rhs: int

    @property
    def holds(self) -> bool:
        return self.lhs == self.rhs


def two_part_generator(lam: QInt) -> tuple[QInt, list[tuple[PrimeIdeal, int]]]:
    g = lam.F.one
    part = []
    for P in lam.F.primes_above_2:
        v = P.valuation(lam)
        if v:
            part.append((P, v))
            g = g * P.generator**v
    return g, part


def genrec_check(alpha: QInt, lam: QInt, bound: int = 10**6) -> GenRecInstance:
    """Evaluate both sides of (lam/alpha)(alpha/R) = (-1)^sigma.

    Raises HypothesisNotMet unless alpha is odd, coprime to lam, and a
    square modulo 4L where (lam) = L R with R odd.
    """
    if alpha.is_zero() or lam.is_zero():
        raise HypothesisNotMet("alpha and lambda must be nonzero")
    if alpha.norm() % 2 == 0:
        raise HypothesisNotMet("alpha is not odd")
    if not gcd(alpha, lam).is_unit():
        raise HypothesisNotMet("alpha and lambda are not coprime")
    g2, L_part = two_part_generator(lam)
    if not is_square_mod(alpha, 4 * g2):
        raise HypothesisNotMet("alpha is not a square modulo 4L")
    odd_part = exact_div(lam, g2)
    R_part = _odd_factorization(odd_part, bound) if not odd_part.is_unit() else []
    lhs = jacobi(lam, alpha, bound) * jacobi_ideal(alpha, R_part)
    sigma = sum(1 for i in (1, 2) if sign(alpha, i) < 0 and sign(lam, i) < 0)
    return GenRecInstance(alpha, lam, L_part, R_part, sigma, lhs, (-1) ** sigma)


def genrec_corollary_check(alpha: QInt, lam: QInt, eps: QInt, bound: int = 10**6) -> int:
    """(lam / alpha) for alpha = eps^2 mod 4 lam, alpha odd and totally positive.

    The returned symbol is never -1 when the hypotheses hold."""
    if not (4 * lam).divides(alpha - eps * eps):
        raise HypothesisNotMet("alpha is not eps^2 modulo 4 lambda")
    if alpha.norm() % 2 == 0:
        raise HypothesisNotMet("alpha is not odd")
    if not (sign(alpha, 1) > 0 and sign(alpha, 2) > 0):
        raise HypothesisNotMet("alpha is not totally positive")
    return jacobi(lam, alpha, bound)


# ---------------------------------------------------------------------------
# Hilbert symbols over K


def _rat(a) -> Fraction:
    if isinstance(a, Fraction):
        return a
    if isinstance(a, int):
        return Fraction(a)
    raise TypeError(f"expected a rational number, got {a!r}")


def hilbert_real(a, b, index: int = 1) -> int:
    """(a, b) at a real place: -1 iff both are negative there."""
    if isinstance(a, QInt):
        sa, sb = sign(a, index), sign(b, index)
    else:
        sa, sb = _sgn(_rat(a)), _sgn(_rat(b))
    if sa == 0 or sb == 0:
        raise ValueError("Hilbert symbol of zero")
    return -1 if sa < 0 and sb < 0 else 1


def _sgn(x) -> int:
    return (x > 0) - (x < 0)


def hilbert_odd(a: QInt, b: QInt, P: PrimeIdeal) -> int:
    """(a, b)_P = (-1)^(v(a)v(b)(q-1)/2) (a0/P)^v(b) (b0/P)^v(a)."""
    if a.is_zero() or b.is_zero():
        raise ValueError("Hilbert symbol of zero")
    if not P.odd:
        raise ValueError("hilbert_odd needs an odd prime")
    va, a0 = P.split_off(a)
    vb, b0 = P.split_off(b)
    q = P.norm
    s = (-1) ** ((va * vb * ((q - 1) // 2)) % 2)
    return s * legendre_at(a0, P) ** vb * legendre_at(b0, P) ** va


def _is_one_minus_four_zeta(t: QInt, r: int) -> bool:
    if r == 1:
        return t == -3
    return False


def hilbert_even_special(t: QInt, b: QInt, P: PrimeIdeal, r: int = 1) -> int:
    """(1 - 4 zeta_r, b)_P = 1 for b a unit at P, in a field unramified at 2."""
    if P.odd:
        raise ValueError("hilbert_even_special needs a prime above 2")
    if P.kind == "ramified":
        raise UnsupportedEvenPlace("field is ramified at 2")
    if not _is_one_minus_four_zeta(t, r):
        raise UnsupportedEvenPlace(f"first argument {t} is not 1 - 4*zeta_{r}")
    if P.valuation(b) != 0:
        raise UnsupportedEvenPlace(f"second argument {b} is not a unit at {P}")
    return 1


def even_place_witness(t: QInt, b: QInt, P: PrimeIdeal) -> QInt:
    """x with b x^2 = 1 (mod P) and t + b (2x)^2 = 1 (mod 8 O_P), making
    t*1^2 + b*(2x)^2 a square in K_P by Hensel's lemma."""
    hilbert_even_special(t, b, P)
    F = t.F
    for x in (F(i, j) for i in range(2) for j in range(2)):
        if P.contains(b * x * x - 1):
            z = t + b * 4 * x * x - 1
            if z.is_zero() or P.valuation(z) >= 3:
                return x
    raise ArithmeticError("no residue-field witness found")


# ---------------------------------------------------------------------------
# Hilbert symbols over Q


def _split_p(x: Fraction, p: int) -> tuple[int, Fraction]:
    v = 0
    n, d = x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v, Fraction(n, d)


def hilbert_qp(a, b, p: int) -> int:
    """(a, b)_p over Q_p for an odd prime p."""
    a, b = _rat(a), _rat(b)
    if a == 0 or b == 0:
        raise ValueError("Hilbert symbol of zero")
    va, a0 = _split_p(a, p)
    vb, b0 = _split_p(b, p)

    def leg(u: Fraction) -> int:
        return legendre(u.numerator * pow(u.denominator, -1, p), p)

    s = (-1) ** ((va * vb * ((p - 1) // 2)) % 2)
    return s * leg(a0) ** (vb % 2) * leg(b0) ** (va % 2)


def _square_class_2(x: Fraction) -> int:
    """A representative 2^e * u, e in {0,1}, u in {1,3,5,7}, of x modulo squares in Q_2."""
    v, u = _split_p(x, 2)
    # u = n/d with n, d odd; n/d = n*d / d^2
    w = (u.numerator * u.denominator) % 8
    return (2 ** (v % 2)) * w


@lru_cache(maxsize=None)
def _q2_soluble(a: int, b: int) -> int:
    # a, b are square-class representatives; a primitive solution modulo 2^5
    # lifts by Hensel (each partial derivative has valuation <= 2).
    for k in range(1, 6):
        mod = 1 << k
        found = any(
            (z * z - a * x * x - b * y * y) % mod == 0
            for x in range(mod)
            for y in range(mod)
            for z in range(mod)
            if (x | y | z) & 1
        )
        if not found:
            return -1
    return 1


def hilbert_q2(a, b) -> int:
    """(a, b)_2 by solubility of z^2 = a x^2 + b y^2 modulo growing powers of 2."""
    a, b = _rat(a), _rat(b)
    if a == 0 or b == 0:
        raise ValueError("Hilbert symbol of zero")
    return _q2_soluble(_square_class_2(a), _square_class_2(b))


def rational_places(a, b) -> list[int]:
    a, b = _rat(a), _rat(b)
    ps = {2}
    for n in (a.numerator, a.denominator, b.numerator, b.denominator):
        ps.update(factor_int(n))
    ps.discard(1)
    return sorted(ps)


@dataclass
class ReciprocityResult:
    product: int
    factors: dict[str, int] = field(default_factory=dict)


def reciprocity_product(a, b, F: QuadField | None = None) -> ReciprocityResult:
    """Product of all local Hilbert symbols of (a, b); the law says it is +1."""
    if isinstance(a, QInt) or F is not None:
        return _reciprocity_product_K(a, b)
    factors = {"inf": hilbert_real(a, b)}
    for p in rational_places(a, b):
        factors[str(p)] = hilbert_q2(a, b) if p == 2 else hilbert_qp(a, b, p)
    return ReciprocityResult(prod(factors.values()), factors)


def _reciprocity_product_K(a: QInt, b: QInt) -> ReciprocityResult:
    F = a.F
    factors = {}
    trivial = a == 1 or b == 1
    for i in (1, 2):
        factors[f"inf{i}"] = hilbert_real(a, b, i)
    for P in F.primes_above_2:
        if trivial:
            factors[repr(P)] = 1
        elif _is_one_minus_four_zeta(a, 1):
            factors[repr(P)] = hilbert_even_special(a, b, P)
        elif _is_one_minus_four_zeta(b, 1):
            factors[repr(P)] = hilbert_even_special(b, a, P)
        else:
            raise UnsupportedEvenPlace(f"no even-place evaluation for ({a}, {b}) at {P}")
    odd = {}
    for x in (a, b):
        for P, _ in prime_factorization(x):
            if P.odd:
                odd[repr(P)] = P
    for key in sorted(odd):
        factors[key] = hilbert_odd(a, b, odd[key])
    return ReciprocityResult(prod(factors.values()), factors)


# ---------------------------------------------------------------------------
# Constraint from A^2 - t B^(2n) = s (C^n - zeta B^(2n))


@dataclass
class HilbertConstraintInstance:
    A: QInt | int
    B: QInt | int
    C: QInt | int
    s: QInt | int
    t: QInt | int
    n: int = 1
    zeta: int = 1
    zeta_prime: int = 1


@dataclass
class HilbertConstraintResult:
    real: int
    even: int
    odd: int
    factors: dict[str, int]

    @property
    def product(self) -> int:
        return self.real * self.even * self.odd

    @property
    def verified(self) -> bool:
        return self.product == 1


def _check_constraint_instance(inst: HilbertConstraintInstance) -> None:
    A, B, C, s, t, n = inst.A, inst.B, inst.C, inst.s, inst.t, inst.n
    if inst.zeta != 1 or inst.zeta_prime != 1:
        raise UnsupportedEvenPlace("only zeta_r = 1 instances are evaluated in K or Q")
    if B == 0:
        raise HypothesisNotMet("B = 0")
    lhs = A * A - t * B ** (2 * n)
    rhs = s * (C**n - inst.zeta * B ** (2 * n))
    if lhs != rhs:
        raise HypothesisNotMet("A^2 - t B^2n != s (C^n - zeta B^2n)")
    if lhs == 0:
        raise HypothesisNotMet("the identity's common value is zero")
    if isinstance(A, QInt):
        g = gcd(gcd(A, A.F(0) + B), A.F(0) + C)
        if not g.is_unit():
            raise HypothesisNotMet("A, B, C are not coprime")
        ns = abs(s.norm()) if isinstance(s, QInt) else abs(s) ** 2
    else:
        from math import gcd as igcd

        if igcd(igcd(A, B), C) != 1:
            raise HypothesisNotMet("A, B, C are not coprime")
        ns = abs(s)
    if ns & (ns - 1):
        raise HypothesisNotMet("s has odd prime support")


def hilbert_constraint_check(inst: HilbertConstraintInstance) -> HilbertConstraintResult:
    """Evaluate the real, even and (odd, v(t) odd) parts of the product of
    (t, s(C - zeta' B^2))_v and return them; the product must be +1."""
    _check_constraint_instance(inst)
    t, s = inst.t, inst.s
    X = inst.C - inst.zeta_prime * inst.B * inst.B
    beta = s * X
    if isinstance(t, QInt):
        return _constraint_K(t, s, X, beta)
    return _constraint_Q(t, s, X, beta)


def _strip_square_fours(s):
    # (t, 4^k s0 X) = (t, s0 X): 4 is a square
    if isinstance(s, QInt):
        while s.x % 4 == 0 and s.y % 4 == 0 and not s.is_zero():
            s = exact_div(s, s.F(4))
        return s
    s = Fraction(s)
    while s.numerator % 4 == 0:
        s /= 4
    return s


def _constraint_K(t: QInt, s: QInt, X: QInt, beta: QInt) -> HilbertConstraintResult:
    F = t.F
    s = F(0) + s
    factors = {}
    for i in (1, 2):
        factors[f"inf{i}"] = hilbert_real(t, beta, i)
    reduced = _strip_square_fours(s) * X
    for P in F.primes_above_2:
        factors[repr(P)] = hilbert_even_special(t, reduced, P)
    for P, v in prime_factorization(t):
        if P.odd and v % 2 == 1:
            factors[repr(P)] = hilbert_odd(t, beta, P)
    real = prod(v for k, v in factors.items() if k.startswith("inf"))
    even = prod(factors[repr(P)] for P in F.primes_above_2)
    odd = prod(v for k, v in factors.items() if not k.startswith("inf") and k not in {repr(P) for P in F.primes_above_2})
    return HilbertConstraintResult(real, even, odd, factors)


def _constraint_Q(t, s, X, beta) -> HilbertConstraintResult:
    factors = {"inf": hilbert_real(t, beta), "2": hilbert_q2(t, beta)}
    odd = 1
    for p, v in sorted(factor_int(t).items()):
        if p != 2 and v % 2 == 1:
            factors[str(p)] = hilbert_qp(t, beta, p)
            odd *= factors[str(p)]
    return HilbertConstraintResult(factors["inf"], factors["2"], odd, factors)


def constraint_instance_from_triple(a, b, c) -> HilbertConstraintInstance:
    """The r = 1, exponent-1 instance: t = -3, s = -4, (A, B, C) = (a - b, c, ab)."""
    return HilbertConstraintInstance(A=a - b, B=c, C=a * b, s=-4, t=_like(a, -3))


def _like(a, v: int):
    return a.F(v) if isinstance(a, QInt) else v


# ---------------------------------------------------------------------------
# (a^p - b^p)^2 - c^(2p)(1 - 4 zeta) = -4 (ab - c^2 zeta') h


@dataclass
class ClaimFactorization:
    a: QInt
    b: QInt
    c: QInt
    p: int
    h: QInt
    lhs: QInt
    rhs: QInt

    @property
    def verified(self) -> bool:
        return self.lhs == self.rhs


def verify_claim_factorization(a: QInt, b: QInt, c: QInt, p: int = 1, r: int = 1) -> ClaimFactorization:
    """Exact check in K for r = 1 (zeta = zeta' = 1)."""
    if r != 1:
        raise ValueError("numeric check is over K, where only r = 1 is available; use the symbolic check")
    if p % 2 == 0:
        raise ValueError("p must be odd")
    if (a**p + b**p + c**p) != 0:
        raise HypothesisNotMet("a^p + b^p + c^p != 0")
    ab = a * b
    c2 = c * c
    h = sum((c2**i * ab ** (p - 1 - i) for i in range(p)), start=a.F.zero)
    lhs = (a**p - b**p) ** 2 - c ** (2 * p) * (1 - 4)
    rhs = -4 * (ab - c2) * h
    return ClaimFactorization(a, b, c, p, h, lhs, rhs)


def verify_claim_factorization_symbolic(p: int) -> bool:
    """Polynomial identity in Z[a, b, c, z] modulo c^p + a^p + b^p, with
    zeta' = z and zeta = z^p."""
    import sympy

    a, b, c, z = sympy.symbols("a b c z")
    h = sum(z**i * c ** (2 * i) * (a * b) ** (p - 1 - i) for i in range(p))
    lhs = (a**p - b**p) ** 2 - c ** (2 * p) * (1 - 4 * z**p)
    rhs = -4 * (a * b - c**2 * z) * h
    diff = sympy.expand(lhs - rhs)
    rem = sympy.rem(sympy.Poly(diff, c), sympy.Poly(c**p + a**p + b**p, c))
    return rem.is_zero


# ---------------------------------------------------------------------------
# The sieve's residue constraint


@dataclass(frozen=True)
class ConstraintResult:
    value: int

    @property
    def passed(self) -> bool:
        return self.value != -1


def constraint_symbol(ring, R: int, residues) -> ConstraintResult:
    """Jacobi symbol of eps^R - zeta^R modulo 1 - 4 zeta_r, eps = a'b'/c'^2.

    `residues` holds one (a', b', c') per component of the ring; the symbol is
    the product over components of chi(eps^R - zeta_image^R), and a zero
    component makes the whole symbol 0 (which passes).
    """
    value = 1
    for comp, (x, y, z) in zip(ring.components, residues):
        if x.is_zero() or y.is_zero() or z.is_zero():
            raise ValueError("constraint_symbol needs unit residues")
        eps = x * y * (z * z).inverse()
        value *= chi(eps**R - comp.zeta_image**R)
    return ConstraintResult(value)


def random_coprime_pair(F: QuadField, rng: random.Random, size: int = 50) -> tuple[QInt, QInt]:
    while True:
        a = F(rng.randint(-size, size), rng.randint(-size, size))
        b = F(rng.randint(-size, size), rng.randint(-size, size))
        if a.is_zero() or b.is_zero() or (a + b).is_zero():
            continue
        if gcd(a, b).is_unit():
            return a, b


__all__ = [
    "ClaimFactorization",
    "ConstraintResult",
    "GenRecInstance",
    "HilbertConstraintInstance",
    "HilbertConstraintResult",
    "HypothesisNotMet",
    "Place",
    "ReciprocityResult",
    "UnsupportedEvenPlace",
    "constraint_instance_from_triple",
    "constraint_symbol",
    "even_place_witness",
    "genrec_check",
    "genrec_corollary_check",
    "hilbert_constraint_check",
    "hilbert_even_special",
    "hilbert_odd",
    "hilbert_q2",
    "hilbert_qp",
    "hilbert_real",
    "is_square_mod",
    "jacobi",
    "jacobi_ideal",
    "legendre_at",
    "random_coprime_pair",
    "reciprocity_product",
    "residue_system",
    "split_prime",
    "verify_claim_factorization",
    "verify_claim_factorization_symbolic",
]
