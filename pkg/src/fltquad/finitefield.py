"""Arithmetic in F_p and F_{p^2} for small p.

Elements of F_{p^2} are pairs (c0, c1) meaning c0 + c1*t, where t is a root
of the field's fixed quadratic modulus.  For the sieve fields the modulus is
t^2 + 1 (-1 is a non-residue mod 3 and mod 7), which keeps every residue
encoding reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a/p) for an odd prime p."""
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def _default_modulus(p: int) -> tuple[int, int]:
    # (m1, m0) for t^2 + m1*t + m0
    if p == 2:
        return (1, 1)
    if p % 4 == 3:
        return (0, 1)
    n = 2
    while legendre(n, p) != -1:
        n += 1
    return (0, (-n) % p)


@dataclass(frozen=True)
class FF:
    p: int
    degree: int = 1
    modulus: tuple[int, int] | None = None

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.degree not in (1, 2):
            raise ValueError("only degree 1 and 2 fields are supported")
        if self.degree == 1:
            object.__setattr__(self, "modulus", None)
            return
        m = self.modulus or _default_modulus(self.p)
        m = (m[0] % self.p, m[1] % self.p)
        object.__setattr__(self, "modulus", m)
        # exhaustive root check: a quadratic is irreducible iff it has no root
        for x in range(self.p):
            if (x * x + m[0] * x + m[1]) % self.p == 0:
                raise ValueError(f"modulus t^2 + {m[0]}t + {m[1]} is reducible mod {self.p}")

    @property
    def q(self) -> int:
        return self.p**self.degree

    @property
    def order_units(self) -> int:
        return self.q - 1

    def __call__(self, c0: int, c1: int = 0) -> "FFElem":
        if self.degree == 1 and c1 % self.p:
            raise ValueError("degree-1 field element with nonzero t-coefficient")
        return FFElem(self, c0 % self.p, c1 % self.p)

    @property
    def zero(self) -> "FFElem":
        return self(0)

    @property
    def one(self) -> "FFElem":
        return self(1)

    @property
    def gen(self) -> "FFElem":
        """The class of t (degree 2 only)."""
        if self.degree != 2:
            raise ValueError("degree-1 field has no adjoined generator")
        return self(0, 1)

    def elements(self) -> list["FFElem"]:
        """All q elements, ordered by the integer encoding c0 + p*c1."""
        return [self.from_index(i) for i in range(self.q)]

    def enumerate_units(self) -> list["FFElem"]:
        return self.elements()[1:]

    def index(self, x: "FFElem") -> int:
        return x.c0 + self.p * x.c1

    def from_index(self, i: int) -> "FFElem":
        return FFElem(self, i % self.p, i // self.p)

    @cached_property
    def chi_table(self) -> list[int]:
        """Quadratic character indexed by element encoding."""
        return [chi(x) for x in self.elements()]

    # Integer-indexed operation tables (encoding c0 + p*c1), for hot loops.

    @cached_property
    def add_table(self) -> list[list[int]]:
        els = self.elements()
        return [[self.index(x + y) for y in els] for x in els]

    @cached_property
    def mul_table(self) -> list[list[int]]:
        els = self.elements()
        return [[self.index(x * y) for y in els] for x in els]

    @cached_property
    def neg_table(self) -> list[int]:
        return [self.index(-x) for x in self.elements()]

    @cached_property
    def inv_table(self) -> list[int | None]:
        return [None] + [self.index(x.inverse()) for x in self.enumerate_units()]

    @cached_property
    def log_table(self) -> dict[int, int]:
        """Discrete logarithm to the base primitive_root, for units."""
        g = self.primitive_root
        out = {}
        x = self.one
        for k in range(self.order_units):
            out[self.index(x)] = k
            x = x * g
        return out

    @cached_property
    def exp_table(self) -> list[int]:
        g = self.primitive_root
        out = []
        x = self.one
        for _ in range(self.order_units):
            out.append(self.index(x))
            x = x * g
        return out

    @cached_property
    def primitive_root(self) -> "FFElem":
        n = self.order_units
        factors = _prime_factors(n)
        for g in self.enumerate_units():
            if all(g ** (n // f) != self.one for f in factors):
                return g
        raise ArithmeticError("no primitive root found")  # unreachable for a field

    def roots(self, coeffs: tuple[int, ...]) -> list["FFElem"]:
        """Roots of the integer polynomial sum(coeffs[i] x^i), by exhaustive search."""
        out = []
        for x in self.elements():
            acc = self.zero
            for c in reversed(coeffs):
                acc = acc * x + self(c)
            if acc.is_zero():
                out.append(x)
        return out

    def __repr__(self):
        if self.degree == 1:
            return f"F_{self.p}"
        m1, m0 = self.modulus
        return f"F_{self.q}[t^2+{m1}t+{m0}]"


def _prime_factors(n: int) -> list[int]:
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


class FFElem:
    __slots__ = ("field", "c0", "c1")

    def __init__(self, field: FF, c0: int, c1: int = 0):
        self.field = field
        self.c0 = c0
        self.c1 = c1

    def _coerce(self, other) -> "FFElem":
        if isinstance(other, FFElem):
            if other.field != self.field:
                raise ValueError(f"mixing {self.field} and {other.field}")
            return other
        if isinstance(other, int):
            return self.field(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        p = self.field.p
        return FFElem(self.field, (self.c0 + o.c0) % p, (self.c1 + o.c1) % p)

    __radd__ = __add__

    def __neg__(self):
        p = self.field.p
        return FFElem(self.field, -self.c0 % p, -self.c1 % p)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        F = self.field
        p = F.p
        if F.degree == 1:
            return FFElem(F, self.c0 * o.c0 % p, 0)
        m1, m0 = F.modulus
        # t^2 = -m1 t - m0
        a0, a1, b0, b1 = self.c0, self.c1, o.c0, o.c1
        hi = a1 * b1
        return FFElem(F, (a0 * b0 - hi * m0) % p, (a0 * b1 + a1 * b0 - hi * m1) % p)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = self.field.one
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def inverse(self) -> "FFElem":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in a finite field")
        return self ** (self.field.q - 2)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def frobenius(self) -> "FFElem":
        return self ** self.field.p

    def is_zero(self) -> bool:
        return self.c0 == 0 and self.c1 == 0

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.field(other)
        if not isinstance(other, FFElem):
            return NotImplemented
        return self.field == other.field and self.c0 == other.c0 and self.c1 == other.c1

    def __hash__(self):
        return hash((self.field.p, self.field.degree, self.c0, self.c1))

    def encoding(self) -> tuple[int, int]:
        return (self.c0, self.c1)

    def __repr__(self):
        if self.field.degree == 1:
            return f"{self.c0}"
        return f"({self.c0}+{self.c1}t)"


def ff_new(p: int, degree: int = 1) -> FF:
    return FF(p, degree)


def chi(x: FFElem) -> int:
    """Quadratic character: 0 at zero, otherwise x^((q-1)/2) read as +-1."""
    if x.is_zero():
        return 0
    F = x.field
    v = x ** ((F.q - 1) // 2)
    if v == F.one:
        return 1
    if v == -F.one:
        return -1
    raise ArithmeticError(f"x^((q-1)/2) = {v} is not +-1")


def roots_of_unity(F: FF, r: int) -> list[FFElem]:
    """All elements of exact multiplicative order r, sorted by encoding."""
    n = F.order_units
    if r < 1 or n % r:
        raise ValueError(f"{r} does not divide #{F}^x = {n}")
    g = F.primitive_root
    out = [g ** (n // r * k) for k in range(r) if math.gcd(k, r) == 1]
    return sorted(out, key=F.index)

