from fractions import Fraction

import pytest

from hecke_pm.characters import DirichletCharacter, cyclotomic_field, unit_group_generators
from hecke_pm.errors import ParseError, PrecisionError
from hecke_pm.ring_tower import ModRing


def test_unit_group_generators():
    (g,) = unit_group_generators(9)
    assert (g.prime, g.local_generator, g.order) == (3, 2, 6)
    gens = unit_group_generators(52)
    assert [x.prime for x in gens] == [2, 13]
    assert [x.order for x in gens] == [2, 12]
    assert all(x.generator % 52 == x.generator for x in gens)
    assert gens[0].generator % 13 == 1
    assert gens[1].generator % 4 == 1


def test_parse_and_order():
    chi = DirichletCharacter.parse("9:2")
    assert chi.order == 3
    assert chi.exponent(2) == Fraction(1, 3)
    assert chi.spec() == "9:2"
    assert (chi**3).is_trivial()
    assert (chi * chi).exponents == (4,)
    with pytest.raises(ParseError):
        DirichletCharacter.parse("9:x")
    with pytest.raises(ParseError):
        DirichletCharacter.parse("9:1,2")


def test_quadratic_character_integer_values():
    chi = DirichletCharacter.parse("5:2")
    assert chi.value(2) == -1
    assert chi.value(4) == 1
    assert chi.value(5) == 0
    with pytest.raises(PrecisionError):
        DirichletCharacter.parse("5:1").value(2)


def test_lift_and_restrict():
    chi = DirichletCharacter.parse("9:2")
    lifted = chi.lift(63)
    assert lifted.modulus == 63
    assert lifted.restrict(9) == chi
    assert lifted.restrict(7).is_trivial()
    assert chi.agrees_with(lifted)
    with pytest.raises(PrecisionError):
        chi.lift(20)


def test_values_in_rings_and_fields():
    chi = DirichletCharacter.parse("9:2")
    R = ModRing.cyclotomic(3, 1, 2)
    assert chi.value(2, R) == R.one - R.uniformizer
    assert chi.value(2, R) ** 3 == R.one
    K = cyclotomic_field(3)
    assert K.poly == (1, 1, 1)
    assert chi.value(2, K) == K.element([0, 1])
    assert chi.value(4, K) == K.element([-1, -1])
