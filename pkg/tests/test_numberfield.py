from fractions import Fraction

import pytest

from hecke_pm.errors import NotAUnitError, PrecisionError
from hecke_pm.numberfield import NumberField
from hecke_pm.ring_tower import ModRing

GOLDEN = NumberField((-1, -1, 1))


def test_arithmetic_reduces_by_the_defining_polynomial():
    phi = GOLDEN.element([0, 1])
    assert phi * phi == phi + 1
    assert phi.inverse() * phi == GOLDEN.one
    assert phi.inverse() == phi - 1
    assert (phi**3).coords == (1, 2)
    with pytest.raises(NotAUnitError):
        GOLDEN.zero.inverse()


def test_monic_requirement():
    with pytest.raises(PrecisionError):
        NumberField((1, 2))
    with pytest.raises(PrecisionError):
        NumberField((1,))


def test_roots_in_split_and_inert_primes():
    roots = GOLDEN.roots_in(ModRing.integers_mod(11, 1))
    assert [r.coords[0] for r in roots] == [4, 8]
    assert GOLDEN.roots_in(ModRing.integers_mod(3, 1)) == []


def test_hensel_lifted_roots_reduce_the_field_consistently():
    ring = ModRing.integers_mod(11, 2)
    phi = GOLDEN.element([0, 1])
    for root in GOLDEN.roots_in(ring):
        image = phi.reduce_at(root)
        assert image * image - image - 1 == ring.zero
        assert (phi.inverse()).reduce_at(root) * image == ring.one


def test_reduce_at_rejects_p_in_denominator():
    ring = ModRing.integers_mod(11, 1)
    root = GOLDEN.roots_in(ring)[0]
    with pytest.raises(NotAUnitError):
        GOLDEN.element([1, Fraction(1, 11)]).reduce_at(root)
