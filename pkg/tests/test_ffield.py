from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmrank.ffield import FieldElement, FieldMismatch, FieldSpec, inv, is_prime

GF2, GF5, GF7, Q = FieldSpec.gf(2), FieldSpec.gf(5), FieldSpec.gf(7), FieldSpec.rationals()


def test_examples():
    assert GF5.element(3) + GF5.element(4) == GF5.element(2)
    assert GF2.element(1) + GF2.element(1) == GF2.element(0)
    assert Q.element(Fraction(1, 2)) + Q.element(Fraction(1, 3)) == Q.element(Fraction(5, 6))
    assert inv(GF7.element(3)) == GF7.element(5)
    assert inv(GF2.element(1)) == GF2.element(1)
    assert inv(Q.element(Fraction(-2, 3))) == Q.element(Fraction(-3, 2))


def test_inverse_of_zero():
    with pytest.raises(ZeroDivisionError):
        GF5.element(0).inv()
    with pytest.raises(ZeroDivisionError):
        Q.element(0).inv()


def test_field_mismatch():
    with pytest.raises(FieldMismatch):
        GF5.element(1) + GF7.element(1)


def test_parse_and_primality():
    assert FieldSpec.parse("gf:5") == GF5
    assert FieldSpec.parse("q") == Q
    for bad in ("gf:4", "gf:1", "gf:x", "r"):
        with pytest.raises(ValueError):
            FieldSpec.parse(bad)
    primes = [p for p in range(2, 2000) if all(p % d for d in range(2, int(p**0.5) + 1))]
    assert [p for p in range(2000) if is_prime(p)] == primes
    assert is_prime(2_147_483_647) and not is_prime(2_147_483_649)


def test_random_nonzero(rng):
    assert all(GF2.random_nonzero(rng) == 1 for _ in range(20))
    assert {GF5.random_nonzero(rng).value for _ in range(200)} == {1, 2, 3, 4}
    small = FieldSpec.rationals((-3, 3))
    vals = {small.random_nonzero(rng).value for _ in range(300)}
    assert vals == {Fraction(k) for k in (-3, -2, -1, 1, 2, 3)}


def test_uniform_over_units(rng):
    counts = np.bincount([GF7.random_raw(rng) for _ in range(60000)], minlength=7)
    assert counts[0] == 0
    assert np.abs(counts[1:] / 60000 - 1 / 6).max() < 0.01


@pytest.mark.parametrize("p", [2, 3, 5, 7, 101, 2_147_483_647])
def test_field_axioms_randomised(p):
    # 10^4 random triples per field, checked on raw values
    F = FieldSpec.gf(p)
    r = np.random.default_rng(p)
    a, b, c = (r.integers(0, p, size=10_000).tolist() for _ in range(3))
    for x, y, z in zip(a, b, c):
        assert F.add(F.add(x, y), z) == F.add(x, F.add(y, z))
        assert F.mul(F.mul(x, y), z) == F.mul(x, F.mul(y, z))
        assert F.add(x, y) == F.add(y, x) and F.mul(x, y) == F.mul(y, x)
        assert F.mul(x, F.add(y, z)) == F.add(F.mul(x, y), F.mul(x, z))
        assert 0 <= F.mul(x, y) < p
        if x:
            assert F.mul(x, F.inv(x)) == 1 and F.inv(F.inv(x)) == x


def test_rational_axioms_randomised():
    r = np.random.default_rng(1)
    vals = [Fraction(int(n), int(d)) for n, d in zip(r.integers(-50, 50, 30_000), r.integers(1, 30, 30_000))]
    for x, y, z in zip(vals[0::3], vals[1::3], vals[2::3]):
        X, Y, Z = (Q.element(v) for v in (x, y, z))
        assert (X + Y) + Z == X + (Y + Z)
        assert X * (Y + Z) == X * Y + X * Z
        if x:
            assert X * X.inv() == Q.element(1) and X.inv().inv() == X


@settings(max_examples=300, deadline=None)
@given(st.sampled_from([2, 3, 5, 13]), st.integers(), st.integers(), st.integers())
def test_element_operators(p, x, y, z):
    F = FieldSpec.gf(p)
    X, Y, Z = F.element(x), F.element(y), F.element(z)
    assert 0 <= X.value < p
    assert (X - Y) + Y == X
    assert -(-X) == X
    assert X * (Y + Z) == X * Y + X * Z
    if Y:
        assert (X / Y) * Y == X


def test_immutable():
    x = GF5.element(2)
    with pytest.raises(AttributeError):
        x.value = 3
    assert hash(x) == hash(GF5.element(7))
