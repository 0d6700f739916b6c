import itertools

import pytest

from fltquad.finitefield import FF, chi, ff_new, legendre, roots_of_unity

F9, F49, F7 = FF(3, 2), FF(7, 2), FF(7)
SMALL = [FF(3), FF(5), FF(7), F9, FF(5, 2), F49]


def test_constructors():
    assert ff_new(3, 2).order_units == 8
    assert ff_new(7, 2).order_units == 48
    assert ff_new(7, 1).q == 7
    assert F9.modulus == (0, 1) and F49.modulus == (0, 1)


def test_reducible_modulus_rejected():
    with pytest.raises(ValueError):
        FF(5, 2, (0, 1))  # t^2 + 1 = (t - 2)(t + 2) mod 5
    with pytest.raises(ValueError):
        FF(9)


def test_chi_examples():
    assert chi(F9.one) == 1
    assert chi(F9.zero) == 0
    assert chi(-F9.one) == 1
    assert chi(F7(-1)) == -1


@pytest.mark.parametrize("k", [F9, F49], ids=repr)
def test_chi_multiplicative_exhaustive(k):
    els = k.elements()
    for x, y in itertools.product(els, els):
        assert chi(x * y) == chi(x) * chi(y)


@pytest.mark.parametrize("k", SMALL, ids=repr)
def test_half_of_units_are_squares(k):
    units = k.enumerate_units()
    assert sum(chi(x) == 1 for x in units) == (k.q - 1) // 2
    squares = {x * x for x in units}
    assert all((chi(x) == 1) == (x in squares) for x in units)


@pytest.mark.parametrize("k", SMALL, ids=repr)
def test_frobenius_is_automorphism_fixing_prime_field(k):
    els = k.elements()
    for x, y in itertools.product(els, els):
        assert (x + y).frobenius() == x.frobenius() + y.frobenius()
        assert (x * y).frobenius() == x.frobenius() * y.frobenius()
    fixed = [x for x in els if x.frobenius() == x]
    assert sorted(fixed, key=k.index) == [k(i) for i in range(k.p)]
    assert len({x.frobenius() for x in els}) == k.q


@pytest.mark.parametrize("k", SMALL, ids=repr)
def test_inverse_and_fermat(k):
    for x in k.enumerate_units():
        assert x * x.inverse() == 1
        assert x ** (k.q - 1) == 1
        assert x**-3 * x**3 == 1
    with pytest.raises(ZeroDivisionError):
        k.zero.inverse()


def test_unit_counts():
    assert len(F49.enumerate_units()) == 48
    assert len(F9.enumerate_units()) == 8


def test_roots_of_unity():
    assert roots_of_unity(F7, 3) == [F7(2), F7(4)]
    # exhaustive oracle: x^2 + x + 1 = 0 mod 7
    assert [x for x in range(7) if (x * x + x + 1) % 7 == 0] == [2, 4]
    assert roots_of_unity(F9, 1) == [F9.one]
    with pytest.raises(ValueError):
        roots_of_unity(F9, 3)
    cube_roots = roots_of_unity(F49, 3)
    assert len(cube_roots) == 2 and all(z**3 == 1 and z != 1 for z in cube_roots)


@pytest.mark.parametrize("k", [F9, F49], ids=repr)
def test_primitive_root_generates(k):
    g = k.primitive_root
    assert len({g**i for i in range(k.order_units)}) == k.order_units


@pytest.mark.parametrize("k", [F9, F49, FF(7)], ids=repr)
def test_tables_agree_with_element_arithmetic(k):
    els = k.elements()
    for x, y in itertools.product(els, els):
        assert k.add_table[k.index(x)][k.index(y)] == k.index(x + y)
        assert k.mul_table[k.index(x)][k.index(y)] == k.index(x * y)
    for x in k.enumerate_units():
        assert k.inv_table[k.index(x)] == k.index(x.inverse())
        assert k.exp_table[k.log_table[k.index(x)]] == k.index(x)


def test_legendre_matches_chi_on_prime_field():
    for p in (3, 5, 7, 11, 13):
        k = FF(p)
        for a in range(p):
            assert legendre(a, p) == chi(k(a))


def test_mixing_fields_rejected():
    with pytest.raises(ValueError):
        F9.one + F49.one
