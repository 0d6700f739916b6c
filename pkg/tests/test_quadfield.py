import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fltquad.quadfield import (
    PrimeIdeal,
    QuadField,
    RealEmbedding,
    UnsupportedField,
    arith,
    divmod_euclid,
    embed,
    exact_div,
    gcd,
    norm,
    prime_factorization,
    qf_new,
    reduce,
    s_unit,
    sign,
    signs,
    split_prime,
    sqrt_exact,
    trace,
)

from conftest import rand_elt

ints = st.integers(-10**6, 10**6)


def continued_fraction_unit(d):
    """Fundamental unit of O_K from the continued fraction of w = (1 + sqrt d)/2.

    Complete quotients are kept as (P + sqrt d)/Q with integers P, Q; the
    first convergent p/q with N(p - q w) = +-1 gives the unit (p - q) + q w
    (the conjugate of p - q w).
    """
    m = (d - 1) // 4
    s = math.isqrt(d)
    P, Q = 1, 2
    p_prev, p = 0, 1
    q_prev, q = 1, 0
    for _ in range(200):
        a = (P + s) // Q
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        if abs(p * p - p * q - m * q * q) == 1:
            return (p - q, q)
        P = a * Q - P
        Q = (d - P * P) // Q
    raise AssertionError("no unit found")


@pytest.mark.parametrize("d", [5, 17])
def test_fundamental_unit_matches_continued_fraction(d):
    F = QuadField(d)
    assert F.fundamental_unit.coords() == continued_fraction_unit(d)


def test_continued_fraction_oracle_on_other_fields():
    # the oracle itself, on fields with well-known units
    assert continued_fraction_unit(13) == (1, 1)  # (3 + sqrt 13)/2
    assert continued_fraction_unit(21) == (2, 1)  # (5 + sqrt 21)/2


def test_field_construction():
    F5 = qf_new(5)
    assert F5.fundamental_unit == F5.omega
    assert F5.fundamental_unit.norm() == -1
    F17 = qf_new(17)
    u = F17.fundamental_unit
    assert u == F17.from_sqrt_basis(4, 1)
    assert u.norm() == 16 - 17
    assert qf_new(5) is F5


@pytest.mark.parametrize("d", [8, 9, 3, 1, 0, -3, 45])
def test_bad_d_rejected(d):
    with pytest.raises(ValueError):
        qf_new(d)


def test_unsupported_field_refuses_gcd():
    F = QuadField(13)
    with pytest.raises(UnsupportedField):
        gcd(F(3), F(1, 1))
    with pytest.raises(UnsupportedField):
        F.fundamental_unit


def test_minimal_polynomial(F):
    w = F.omega
    assert w * w - w - F.m == 0


def test_arith_examples():
    F = QuadField(5)
    w = F.omega
    assert w * w.conj() == -1
    a = F(7, -3)
    assert a + arith(a, None, "neg") == 0
    assert (1 + w) * (1 + w.conj()) == 1
    assert arith(F(2, 3), F(1, 1), "add") == F(3, 4)
    assert arith(F(2, 3), None, "conj") == F(5, -3)


def test_norm_and_trace_examples():
    F5, F17 = QuadField(5), QuadField(17)
    assert norm(F5(2)) == 4
    assert norm(F5.omega) == -1
    assert norm(F17.from_sqrt_basis(4, 1)) == -1
    assert trace(F5.omega) == 1
    assert F17.sqrt_d() * F17.sqrt_d() == 17


def test_norm_multiplicative_bulk(F, rng):
    for _ in range(10_000):
        a, b = rand_elt(F, rng), rand_elt(F, rng)
        assert (a * b).norm() == a.norm() * b.norm()


@given(st.sampled_from([5, 17]), ints, ints)
def test_conjugate_fixes_trace_and_norm(d, x, y):
    a = QuadField(d)(x, y)
    assert a + a.conj() == a.trace()
    assert a * a.conj() == a.norm()
    assert a.conj().conj() == a


def test_embeddings_sum_to_trace(F, rng):
    for _ in range(200):
        a = rand_elt(F, rng)
        i1, i2 = embed(a, RealEmbedding(1)), embed(a, RealEmbedding(2))
        assert i1.lo + i2.lo <= a.trace() <= i1.hi + i2.hi


def test_sign_examples():
    F = QuadField(5)
    assert signs(F.omega) == (1, -1)
    assert signs(F(-3)) == (-1, -1)
    assert sign(F.zero, 1) == 0


def test_sign_escalates_precision():
    # coordinates near 10^42 with one embedding near 10^-42: 64 bits cannot
    # separate the interval from zero
    F = QuadField(5)
    tiny = F.omega ** -200
    iv = embed(tiny, RealEmbedding(1, bits=64))
    assert iv.lo > 0
    assert sign(tiny, 1) == 1 and sign(-tiny, 1) == -1
    assert sign(tiny, 2) == 1


# ---------------------------------------------------------------------------
# primes and reduction


def test_split_prime_examples():
    F5, F17 = QuadField(5), QuadField(17)
    (q3,) = split_prime(F5, 3)
    assert q3.kind == "inert" and q3.residue_field.q == 9
    P1, P2 = split_prime(F17, 2)
    assert P1.kind == P2.kind == "split"
    assert P1.generator.norm() * P2.generator.norm() in (4, -4)
    (P5,) = split_prime(F5, 5)
    assert P5.kind == "ramified"
    (P,) = split_prime(F5, 2)
    assert P.kind == "inert"
    (q7,) = split_prime(F17, 7)
    assert q7.kind == "inert"


def test_split_prime_kind_follows_legendre():
    from fltquad.finitefield import legendre

    for d in (5, 17):
        F = QuadField(d)
        for p in (3, 7, 11, 13, 19, 23, 29, 31, 37, 41, 43):
            if p == d:
                continue
            kinds = {P.kind for P in split_prime(F, p)}
            expected = "split" if legendre(d, p) == 1 else "inert"
            assert kinds == {expected}


def test_reduce_examples():
    F = QuadField(5)
    (q3,) = split_prime(F, 3)
    assert reduce(F(3), q3).is_zero()
    w = reduce(F.omega, q3)
    assert w * w - w - 1 == 0
    assert w in q3.residue_field.roots((-1, -1, 1))


def _supported_primes():
    out = []
    for d in (5, 17):
        F = QuadField(d)
        for p in (2, 3, 5, 7, 11, 13, 17):
            for P in split_prime(F, p):
                out.append(P)
    return out


@pytest.mark.parametrize("P", _supported_primes(), ids=repr)
def test_reduce_is_ring_homomorphism(P: PrimeIdeal):
    rng = random.Random(P.p * 1000 + P.F.d)
    F = P.F
    for _ in range(10_000):
        a, b = rand_elt(F, rng), rand_elt(F, rng)
        assert P.reduce(a + b) == P.reduce(a) + P.reduce(b)
        assert P.reduce(a * b) == P.reduce(a) * P.reduce(b)
    assert P.reduce(F.one) == 1
    assert P.reduce(P.generator).is_zero()
    assert abs(P.generator.norm()) == P.norm


def test_valuation_and_factorization(F, rng):
    for _ in range(200):
        a = rand_elt(F, rng, 500)
        if a.is_zero():
            continue
        rebuilt = F.one
        for P, v in prime_factorization(a):
            assert P.valuation(a) == v
            rebuilt = rebuilt * P.generator**v
        q = exact_div(a, rebuilt)
        assert q.is_unit()


# ---------------------------------------------------------------------------
# division and gcd


def test_euclidean_division_shrinks_norm(F, rng):
    for _ in range(3000):
        a, b = rand_elt(F, rng), rand_elt(F, rng, 300)
        if b.is_zero():
            continue
        q, r = divmod_euclid(a, b)
        assert a == q * b + r
        assert abs(r.norm()) < abs(b.norm())


def test_gcd_examples():
    F = QuadField(5)
    a = F(7, 3)
    assert gcd(a, F.zero).divides(a) and a.divides(gcd(a, F.zero))
    assert gcd(F(2), F.omega).is_unit()


@given(st.sampled_from([5, 17]), ints, ints, ints, ints)
def test_gcd_divides_both(d, x1, y1, x2, y2):
    F = QuadField(d)
    a, b = F(x1, y1), F(x2, y2)
    if a.is_zero() and b.is_zero():
        return
    g = gcd(a, b)
    assert g.divides(a) and g.divides(b)


@given(st.sampled_from([5, 17]), st.integers(-300, 300), st.integers(-300, 300),
       st.integers(-300, 300), st.integers(-300, 300), st.integers(-50, 50), st.integers(-50, 50))
def test_common_divisor_norm_divides_gcd_norm(d, x1, y1, x2, y2, cx, cy):
    F = QuadField(d)
    c = F(cx, cy)
    a, b = c * F(x1, y1), c * F(x2, y2)
    if a.is_zero() or b.is_zero():
        return
    g = gcd(a, b)
    assert g.norm() % c.norm() == 0


def test_gcd_of_multiple_is_associate(F, rng):
    for _ in range(300):
        a, b = rand_elt(F, rng, 200), rand_elt(F, rng, 200)
        if a.is_zero() or b.is_zero():
            continue
        g = gcd(a, a * b)
        assert exact_div(g, a).is_unit()


# ---------------------------------------------------------------------------
# S-units


def test_s_unit_examples():
    F5, F17 = QuadField(5), QuadField(17)
    assert s_unit(F5, 1, 0, [0]) == 1
    assert s_unit(F5, 1, 2, [0]) == 1 + F5.omega
    two = s_unit(F17, 1, 0, [1, 1])
    assert exact_div(two, F17(2)).is_unit()
    assert s_unit(F5, -1, 0, [1]) == -2


def test_s_unit_rejects_non_integral_and_overflow():
    F = QuadField(5)
    with pytest.raises(ArithmeticError):
        s_unit(F, 1, 0, [-1])
    with pytest.raises(OverflowError):
        s_unit(F, 1, 100, [0])
    with pytest.raises(ValueError):
        s_unit(F, 1, 0, [0, 0])


def test_s_unit_negative_exponent_when_integral():
    F = QuadField(17)
    P1, P2 = F.primes_above_2
    # pi_1^2 / pi_1 = pi_1 is integral
    assert exact_div(s_unit(F, 1, 0, [1, 0]), P1.generator).is_unit()


# ---------------------------------------------------------------------------
# square roots and sign identities


def test_sqrt_exact(F, rng):
    for _ in range(300):
        a = rand_elt(F, rng, 10**6)
        s = sqrt_exact(a * a)
        assert s is not None and s * s == a * a
    assert sqrt_exact(F.fundamental_unit) is None
    assert sqrt_exact(F(-1)) is None
    assert sqrt_exact(F(2)) is None


@given(st.sampled_from([5, 17]), ints, ints, ints, ints)
def test_ab_minus_c_squared_totally_negative(d, x1, y1, x2, y2):
    F = QuadField(d)
    a, b = F(x1, y1), F(x2, y2)
    c = -a - b
    if (a * b * c).is_zero():
        return
    x = a * b - c * c
    assert x == -(a * a + a * b + b * b)
    assert signs(x) == (-1, -1)


@given(st.floats(min_value=1e-6, max_value=1 - 1e-6), st.integers(1, 9))
def test_real_fermat_points_have_product_below_one(x, n):
    y = (1 - x**n) ** (1 / n)
    assert x * y < 1 + 1e-12
