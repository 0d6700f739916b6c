"""Exact arithmetic in real quadratic fields K = Q(sqrt d), d = 1 mod 4.

Integers of K are stored as x + y*w with w = (1 + sqrt d)/2, so the ring of
integers is exactly the lattice Z + Z*w and no half-integers appear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import mpmath

from .finitefield import FF, FFElem, is_prime, legendre

# Fundamental units as (x, y) in the w-basis.  Verified at construction by the
# norm check; the test suite checks them against a continued-fraction oracle.
FUNDAMENTAL_UNITS = {
    5: (0, 1),  # w
    17: (3, 2),  # 4 + sqrt 17
}
EUCLIDEAN_FIELDS = frozenset(FUNDAMENTAL_UNITS)


class UnsupportedField(ValueError):
    pass


def is_squarefree(n: int) -> bool:
    if n == 0:
        return False
    n = abs(n)
    f = 2
    while f * f <= n:
        if n % (f * f) == 0:
            return False
        f += 1
    return True


class QuadField:
    """The field Q(sqrt d) for squarefree d = 1 (mod 4), d > 1."""

    _cache: dict[int, "QuadField"] = {}

    def __new__(cls, d: int):
        if d in cls._cache:
            return cls._cache[d]
        if d <= 1 or d % 4 != 1 or not is_squarefree(d):
            raise ValueError(f"d = {d} must be a squarefree integer > 1 with d = 1 mod 4")
        self = super().__new__(cls)
        self.d = d
        self.m = (d - 1) // 4  # w^2 = w + m
        cls._cache[d] = self
        if d in FUNDAMENTAL_UNITS:
            u = self(*FUNDAMENTAL_UNITS[d])
            if abs(u.norm()) != 1:
                raise ArithmeticError(f"configured unit {u} of Q(sqrt {d}) is not a unit")
        return self

    def __reduce__(self):
        return (QuadField, (self.d,))

    @property
    def supported(self) -> bool:
        return self.d in EUCLIDEAN_FIELDS

    def _require_supported(self, what: str):
        if not self.supported:
            raise UnsupportedField(f"{what} is only available for d in {sorted(EUCLIDEAN_FIELDS)}")

    def __call__(self, x: int = 0, y: int = 0) -> "QInt":
        return QInt(self, x, y)

    @property
    def omega(self) -> "QInt":
        return QInt(self, 0, 1)

    @property
    def one(self) -> "QInt":
        return QInt(self, 1, 0)

    @property
    def zero(self) -> "QInt":
        return QInt(self, 0, 0)

    def sqrt_d(self) -> "QInt":
        return QInt(self, -1, 2)

    def from_sqrt_basis(self, u: Fraction | int, v: Fraction | int) -> "QInt":
        """The integer u + v*sqrt(d); raises if it is not in O_K."""
        u, v = Fraction(u), Fraction(v)
        y = 2 * v
        x = u - v
        if x.denominator != 1 or y.denominator != 1:
            raise ValueError(f"{u} + {v}*sqrt({self.d}) is not an algebraic integer")
        return QInt(self, int(x), int(y))

    @property
    def fundamental_unit(self) -> "QInt":
        self._require_supported("fundamental unit")
        return self(*FUNDAMENTAL_UNITS[self.d])

    @cached_property
    def primes_above_2(self) -> list["PrimeIdeal"]:
        return split_prime(self, 2)

    def __repr__(self):
        return f"Q(sqrt {self.d})"


def qf_new(d: int) -> QuadField:
    return QuadField(d)


class QInt:
    """An element x + y*w of O_K.  Immutable."""

    __slots__ = ("F", "x", "y")

    def __init__(self, F: QuadField, x: int, y: int = 0):
        self.F = F
        self.x = int(x)
        self.y = int(y)

    def _coerce(self, other):
        if isinstance(other, QInt):
            if other.F is not self.F:
                raise ValueError(f"mixing {self.F} and {other.F}")
            return other
        if isinstance(other, int):
            return QInt(self.F, other, 0)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QInt(self.F, self.x + o.x, self.y + o.y)

    __radd__ = __add__

    def __neg__(self):
        return QInt(self.F, -self.x, -self.y)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QInt(self.F, self.x - o.x, self.y - o.y)

    def __rsub__(self, other):
        return -self + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        yy = self.y * o.y
        return QInt(self.F, self.x * o.x + self.F.m * yy, self.x * o.y + self.y * o.x + yy)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            u = self.unit_inverse()
            return u ** (-e)
        result = self.F.one
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def conj(self) -> "QInt":
        return QInt(self.F, self.x + self.y, -self.y)

    def norm(self) -> int:
        x, y = self.x, self.y
        return x * x + x * y - self.F.m * y * y

    def trace(self) -> int:
        return 2 * self.x + self.y

    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0

    def __bool__(self):
        return not self.is_zero()

    def is_unit(self) -> bool:
        return abs(self.norm()) == 1

    def unit_inverse(self) -> "QInt":
        n = self.norm()
        if abs(n) != 1:
            raise ZeroDivisionError(f"{self} is not a unit")
        c = self.conj()
        return c if n == 1 else -c

    def divides(self, other: "QInt | int") -> bool:
        other = self._coerce(other)
        if self.is_zero():
            return other.is_zero()
        return exact_div(other, self, check=False) is not None

    def __floordiv__(self, other):
        """Exact division; raises ArithmeticError when the quotient is not integral."""
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return exact_div(self, o)

    def __eq__(self, other):
        if isinstance(other, int):
            return self.x == other and self.y == 0
        if not isinstance(other, QInt):
            return NotImplemented
        return self.F is other.F and self.x == other.x and self.y == other.y

    def __hash__(self):
        return hash((self.F.d, self.x, self.y))

    def coords(self) -> tuple[int, int]:
        return (self.x, self.y)

    def sqrt_basis(self) -> tuple[Fraction, Fraction]:
        """(u, v) with self = u + v*sqrt(d)."""
        return (Fraction(2 * self.x + self.y, 2), Fraction(self.y, 2))

    def __repr__(self):
        if self.y == 0:
            return f"{self.x}"
        w = {1: "w", -1: "-w"}.get(self.y, f"{self.y}w")
        if self.x == 0:
            return w
        return f"{self.x}{'+' if self.y > 0 and not w.startswith('-') else ''}{w}"

    def __reduce__(self):
        return (QInt, (self.F, self.x, self.y))


def exact_div(a: QInt, b: QInt, check: bool = True) -> QInt | None:
    if b.is_zero():
        raise ZeroDivisionError("division by zero in O_K")
    n = b.norm()
    num = a * b.conj()
    if num.x % n or num.y % n:
        if check:
            raise ArithmeticError(f"{b} does not divide {a}")
        return None
    return QInt(a.F, num.x // n, num.y // n)


def arith(a: QInt, b: QInt | None, op: str) -> QInt:
    """Dispatch helper mirroring the operation table: add|sub|mul|neg|conj."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "neg":
        return -a
    if op == "conj":
        return a.conj()
    raise ValueError(f"unknown operation {op!r}")


def norm(a: QInt) -> int:
    return a.norm()


def trace(a: QInt) -> int:
    return a.trace()


# ---------------------------------------------------------------------------
# Euclidean division and gcd


def _floor_div(n: int, d: int) -> int:
    return n // d if d > 0 else (-n) // (-d)


def divmod_euclid(a: QInt, b: QInt) -> tuple[QInt, QInt]:
    """Quotient and remainder with |N(r)| < |N(b)|.

    The exact quotient a/b = (s + t*w)/n is rounded to nearby lattice points;
    the candidate with the smallest |N(remainder)| wins.
    """
    F = a.F
    F._require_supported("Euclidean division")
    if b.is_zero():
        raise ZeroDivisionError("division by zero in O_K")
    n = b.norm()
    num = a * b.conj()
    s0, t0 = _floor_div(num.x, n), _floor_div(num.y, n)
    nb = abs(n)
    best = None
    for radius in (1, 2, 4):
        for i in range(-radius + 1, radius + 1):
            for j in range(-radius + 1, radius + 1):
                q = QInt(F, s0 + i, t0 + j)
                r = a - q * b
                key = (abs(r.norm()), r.x, r.y)
                if best is None or key < best[0]:
                    best = (key, q, r)
        if best[0][0] < nb:
            return best[1], best[2]
    raise ArithmeticError(f"no Euclidean quotient found for {a} / {b}")


def gcd(a: QInt, b: QInt) -> QInt:
    """A greatest common divisor (defined up to units), normalized to be
    totally positive when that is possible and otherwise with positive
    first embedding."""
    a.F._require_supported("gcd")
    while not b.is_zero():
        _, r = divmod_euclid(a, b)
        a, b = b, r
    return normalize_associate(a)


def normalize_associate(a: QInt) -> QInt:
    """A deterministic associate of a: the unit multiple whose two embeddings
    are closest in absolute value, with positive first embedding."""
    if a.is_zero():
        return a
    F = a.F
    eps = F.fundamental_unit
    reg = math.log(abs(embedding_value(eps, 1)))
    skew = math.log(abs(embedding_value(a, 1))) - math.log(abs(embedding_value(a, 2)))
    k0 = round(-skew / (2 * reg))
    best = None
    for k in (k0 - 1, k0, k0 + 1):
        c = a * eps**k
        if sign(c, 1) < 0:
            c = -c
        key = (max(abs(c.x), abs(c.y)), abs(c.x) + abs(c.y), c.x, c.y)
        if best is None or key < best[0]:
            best = (key, c)
    return best[1]


def is_coprime(a: QInt, b: QInt) -> bool:
    return gcd(a, b).is_unit()


# ---------------------------------------------------------------------------
# Prime ideals


@dataclass(frozen=True)
class PrimeIdeal:
    F: QuadField
    p: int
    kind: str  # "split" | "inert" | "ramified"
    residue_degree: int
    root: int | None  # image of w mod p (split / ramified)
    root_choice: tuple[int, int] | None = field(default=None, compare=False)

    @property
    def norm(self) -> int:
        return self.p**self.residue_degree

    @property
    def odd(self) -> bool:
        return self.p != 2

    @cached_property
    def residue_field(self) -> FF:
        if self.residue_degree == 1:
            return FF(self.p, 1)
        return FF(self.p, 2)

    @cached_property
    def omega_image(self) -> FFElem:
        k = self.residue_field
        if self.residue_degree == 1:
            return k(self.root)
        roots = k.roots((-self.F.m, -1, 1))
        # ties between the two conjugate roots: lexicographically smallest (c1, c0)
        roots.sort(key=lambda z: (z.c1, z.c0))
        if self.root_choice is not None:
            return k(*self.root_choice)
        return roots[0]

    @cached_property
    def generator(self) -> QInt:
        """A generator of this (principal) ideal."""
        F = self.F
        if self.kind == "inert":
            return F(self.p)
        return gcd(F(self.p), F(-self.root, 1))

    def reduce(self, a: QInt) -> FFElem:
        k = self.residue_field
        return k(a.x) + k(a.y) * self.omega_image

    def contains(self, a: QInt) -> bool:
        if self.kind == "inert":
            return a.x % self.p == 0 and a.y % self.p == 0
        return (a.x + a.y * self.root) % self.p == 0

    def valuation(self, a: QInt) -> int:
        if a.is_zero():
            raise ValueError("valuation of zero")
        pi = self.generator
        v = 0
        while True:
            q = exact_div(a, pi, check=False)
            if q is None:
                return v
            a = q
            v += 1

    def split_off(self, a: QInt) -> tuple[int, QInt]:
        """(v, a0) with a = a0 * generator^v and a0 not divisible by the prime."""
        pi = self.generator
        v = 0
        while True:
            q = exact_div(a, pi, check=False)
            if q is None:
                return v, a
            a = q
            v += 1

    def __repr__(self):
        if self.kind == "inert":
            return f"({self.p})"
        return f"({self.p}, w-{self.root})"


def split_prime(F: QuadField, p: int) -> list[PrimeIdeal]:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    m = F.m
    if p == 2:
        roots = [r for r in (0, 1) if (r * r - r - m) % 2 == 0]
    else:
        ld = legendre(F.d, p)
        if ld == 0:
            r = (pow(2, -1, p)) % p
            return [PrimeIdeal(F, p, "ramified", 1, r)]
        if ld == -1:
            roots = []
        else:
            roots = [r for r in range(p) if (r * r - r - m) % p == 0] if p < 10**5 else _sqrt_roots(F, p)
    if not roots:
        return [PrimeIdeal(F, p, "inert", 2, None)]
    if len(roots) == 1:
        return [PrimeIdeal(F, p, "ramified", 1, roots[0])]
    return [PrimeIdeal(F, p, "split", 1, r) for r in sorted(roots)]


def _sqrt_roots(F: QuadField, p: int) -> list[int]:
    # roots of x^2 - x - m via Tonelli-Shanks on the discriminant d
    s = _tonelli(F.d % p, p)
    inv2 = pow(2, -1, p)
    return sorted({(1 + s) * inv2 % p, (1 - s) * inv2 % p})


def _tonelli(n: int, p: int) -> int:
    if p % 4 == 3:
        return pow(n, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while legendre(z, p) != -1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(n, q, p), pow(n, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return r


def reduce(a: QInt, P: PrimeIdeal) -> FFElem:
    return P.reduce(a)


class FactorizationBoundExceeded(ArithmeticError):
    pass


def factor_int(n: int, bound: int = 10**6) -> dict[int, int]:
    """Trial-division factorization of |n|; refuses cofactors it cannot certify."""
    n = abs(n)
    if n == 0:
        raise ValueError("cannot factor 0")
    out: dict[int, int] = {}
    f = 2
    while f * f <= n:
        if f > bound:
            raise FactorizationBoundExceeded(f"cofactor {n} exceeds trial-division bound {bound}")
        while n % f == 0:
            out[f] = out.get(f, 0) + 1
            n //= f
        f += 1 if f == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def prime_factorization(a: QInt, bound: int = 10**6) -> list[tuple[PrimeIdeal, int]]:
    """Prime ideal factorization of (a), sorted by (p, root)."""
    if a.is_zero():
        raise ValueError("cannot factor 0")
    out = []
    for p in sorted(factor_int(a.norm(), bound)):
        for P in split_prime(a.F, p):
            v = P.valuation(a)
            if v:
                out.append((P, v))
    return out


# ---------------------------------------------------------------------------
# S-units


def s_unit(F: QuadField, sign: int, m: int, n: list[int] | tuple[int, ...]) -> QInt:
    """sign * eps^m * prod(pi_i^n_i) over the primes above 2.

    Negative 2-adic exponents are only allowed when the product is still
    integral; anything else raises.
    """
    F._require_supported("S-units")
    gens = [P.generator for P in F.primes_above_2]
    if len(n) != len(gens):
        raise ValueError(f"expected {len(gens)} exponents for the primes above 2, got {len(n)}")
    if abs(m) > 64 or any(abs(k) > 64 for k in n):
        raise OverflowError("S-unit exponent outside the supported window")
    val = F(sign) * F.fundamental_unit**m
    den = F.one
    for g, k in zip(gens, n):
        if k >= 0:
            val = val * g**k
        else:
            den = den * g ** (-k)
    q = exact_div(val, den, check=False)
    if q is None:
        raise ArithmeticError("S-unit with negative 2-adic exponents is not integral")
    return q


# ---------------------------------------------------------------------------
# Real embeddings


@dataclass(frozen=True)
class RealEmbedding:
    index: int  # 1: sqrt d -> +sqrt d, 2: sqrt d -> -sqrt d
    bits: int = 64

    def __post_init__(self):
        if self.index not in (1, 2):
            raise ValueError("a real quadratic field has embeddings 1 and 2")


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def __contains__(self, v) -> bool:
        return self.lo <= v <= self.hi

    @property
    def mid(self) -> float:
        return float((self.lo + self.hi) / 2)


def _sqrt_bounds(d: int, bits: int) -> tuple[Fraction, Fraction]:
    s = math.isqrt(d << (2 * bits))
    scale = 1 << bits
    if s * s == d << (2 * bits):
        return Fraction(s, scale), Fraction(s, scale)
    return Fraction(s, scale), Fraction(s + 1, scale)


def embed(a: QInt, e: RealEmbedding) -> Interval:
    """An interval guaranteed to contain sigma_e(a).  Precision doubles until
    the interval excludes zero (always reached for a != 0)."""
    bits = e.bits
    u = Fraction(2 * a.x + a.y, 2)
    v = Fraction(a.y, 2) if e.index == 1 else Fraction(-a.y, 2)
    while True:
        lo, hi = _sqrt_bounds(a.F.d, bits)
        ends = (u + v * lo, u + v * hi)
        iv = Interval(min(ends), max(ends))
        if a.is_zero() or not iv.contains_zero():
            return iv
        bits *= 2


def sign(a: QInt, index: int) -> int:
    """Sign of a under embedding `index`, confirmed exactly."""
    if a.is_zero():
        return 0
    iv = embed(a, RealEmbedding(index))
    s = 1 if iv.lo > 0 else -1
    # exact confirmation: sigma(a) = (u + v sqrt d) with 2u = 2x + y, 2v = +-y
    u2 = 2 * a.x + a.y
    v2 = a.y if index == 1 else -a.y
    exact = _sign_u_plus_v_sqrt(u2, v2, a.F.d)
    if exact != s:
        raise ArithmeticError("interval sign disagrees with exact sign")
    return s


def _sign_u_plus_v_sqrt(u: int, v: int, d: int) -> int:
    if v == 0:
        return (u > 0) - (u < 0)
    if u == 0:
        return (v > 0) - (v < 0)
    if (u > 0) == (v > 0):
        return 1 if u > 0 else -1
    # opposite signs: compare u^2 with v^2 d
    big_u = u * u > v * v * d
    return ((1 if u > 0 else -1) if big_u else (1 if v > 0 else -1))


def signs(a: QInt) -> tuple[int, int]:
    return (sign(a, 1), sign(a, 2))


def is_totally_positive(a: QInt) -> bool:
    return signs(a) == (1, 1)


def embedding_value(a: QInt, index: int) -> float:
    return embed(a, RealEmbedding(index, 60)).mid


def _reconstruct(F: QuadField, t1, t2) -> QInt:
    """The lattice point x + y*w whose embeddings are closest to (t1, t2)."""
    sd = mpmath.sqrt(F.d)
    y = (t1 - t2) / sd
    x = t1 - y * (1 + sd) / 2
    return QInt(F, int(mpmath.nint(x)), int(mpmath.nint(y)))


def working_dps(*elts: QInt) -> int:
    size = max((max(abs(e.x), abs(e.y)) for e in elts), default=1)
    return 30 + 2 * len(str(size))


def sqrt_exact(a: QInt) -> QInt | None:
    """A square root of a in O_K, or None when a is not a square."""
    if a.is_zero():
        return a
    n = a.norm()
    if n < 0 or math.isqrt(n) ** 2 != n:
        return None
    if sign(a, 1) < 0 or sign(a, 2) < 0:
        return None
    F = a.F
    with mpmath.workdps(working_dps(a)):
        s1 = mpmath.sqrt(embedding_mp(a, 1))
        s2 = mpmath.sqrt(embedding_mp(a, 2))
        for t2 in (s2, -s2):
            c = _reconstruct(F, s1, t2)
            if c * c == a:
                return c
    return None


def is_square(a: QInt) -> bool:
    return sqrt_exact(a) is not None


def embedding_mp(a: QInt, index: int):
    """sigma_index(a) at the current mpmath precision."""
    sd = mpmath.sqrt(a.F.d)
    w = (1 + sd) / 2 if index == 1 else (1 - sd) / 2
    return a.x + a.y * w
