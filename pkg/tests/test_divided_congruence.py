from fractions import Fraction

import pytest

from hecke_pm.characters import DirichletCharacter
from hecke_pm.divided_congruence import (
    bernoulli,
    divide_congruence,
    eisenstein_factor,
    eisenstein_power,
    eisenstein_series,
    equalize_weights,
    eta_exponent,
    planted_instances,
    residue_rank,
    strip_level_search,
    variant_congruence_check,
    weight_congruence_check,
    weight_congruence_verdict,
)
from hecke_pm.errors import BasisError, CongruenceError, ConsistencyError, PreconditionError
from hecke_pm.hecke_algebra import SpaceBasis
from hecke_pm.numberfield import NumberField
from hecke_pm.qexp import QExpansion, reduce_mod
from hecke_pm.ring_tower import ModRing


class _Bases:
    def __init__(self, *spaces):
        self.spaces = {(S.level, S.weights[0]): S for S in spaces}
        self.requests = []

    def space(self, level, weight):
        self.requests.append((level, weight))
        return self.spaces.get((level, weight))


def _g_times_e_tilde(space26, bound=120):
    ring = ModRing.integers_mod(5, 2)
    g = reduce_mod(space26.generator("g").truncate(bound), ring)
    return g * eisenstein_power(5, 2, bound, ring)


def test_bernoulli_numbers():
    assert bernoulli(1) == Fraction(1, 2)
    assert bernoulli(4) == Fraction(-1, 30)
    assert bernoulli(6) == Fraction(1, 42)
    assert bernoulli(5) == 0


def test_eisenstein_normalisation():
    assert eisenstein_factor(4) == 240
    assert eisenstein_factor(6) == -504
    E4 = eisenstein_series(5, 10)
    assert E4.weight == 4
    assert E4.coefficients[:3] == (1, 240, 2160)
    assert eisenstein_series(7, 10)[1] == -504
    with pytest.raises(PreconditionError):
        eisenstein_series(3, 10)


@pytest.mark.parametrize("p,m", [(5, 2), (5, 3), (7, 2), (7, 3)])
def test_eisenstein_power_is_one_mod_p_to_the_m(p, m):
    ring = ModRing.integers_mod(p, m)
    power = eisenstein_power(p, m, 50, ring)
    assert power.weight == (p - 1) * p ** (m - 1)
    assert power[0] == 1
    assert all(c.is_zero() for c in power.coefficients[1:])


def test_eisenstein_series_is_one_mod_p():
    E = reduce_mod(eisenstein_series(7, 30), ModRing.integers_mod(7, 1))
    assert E[0] == 1
    assert all(c.is_zero() for c in E.coefficients[1:])


def test_divided_congruence_with_mixed_weights(space26):
    g = space26.generator("g").truncate(30)
    lifted = g * eisenstein_power(5, 2, 30)
    witness = divide_congruence([lifted, -g], 5, 2)
    assert witness.weights == (22, 2)
    assert witness.quotient.weight == (2, 22)
    assert witness.quotient[1] == 0
    assert witness.quotient[2] == 48
    assert witness.truncation == 30


def test_divided_congruence_reports_first_bad_coefficient(space26):
    g = space26.generator("g").truncate(30)
    g1 = space26.generator("g1").truncate(30)
    with pytest.raises(CongruenceError) as info:
        divide_congruence([g, g1], 5, 1)
    assert info.value.index == 1
    with pytest.raises(PreconditionError):
        divide_congruence([], 5, 1)


def test_divided_congruence_in_the_saturated_basis(space52, catalog52):
    f, gt = catalog52.form("f"), catalog52.form("gt")
    witness = divide_congruence([f, gt.scale(-1)], 3, 1, basis=space52)
    assert witness.coordinates is not None
    assert witness.quotient[3] * 3 == f[3] - gt[3]


def test_divided_congruence_over_a_number_field():
    K = NumberField((1, 0, 1))
    pi = K.element([1, 1])
    form = QExpansion((K.zero, K.element([2, 2])), domain=K)
    witness = divide_congruence([form], pi, 2)
    assert witness.quotient[1] == K.element([1, -1])
    with pytest.raises(CongruenceError):
        divide_congruence([form], pi, 4)


def test_equalize_weights(space26):
    g = space26.generator("g").truncate(40)
    g1 = space26.generator("g1").truncate(40)
    lifted = g1 * eisenstein_power(5, 2, 40)
    result = equalize_weights([g, lifted], 5, 2)
    assert result.weight == 22
    assert result.powers == (1, 0)
    assert result.truncation == 40
    ring = ModRing.integers_mod(5, 2)
    assert result.forms[0].coefficients == reduce_mod(g, ring).coefficients
    assert all(f.weight == 22 for f in result.forms)


def test_equalize_weights_preconditions(space26):
    g = space26.generator("g").truncate(40)
    with pytest.raises(PreconditionError):
        equalize_weights([g, QExpansion(g.coefficients, level=26, weight=8)], 5, 2)
    with pytest.raises(PreconditionError):
        equalize_weights([g], 3, 2)


def test_planted_instances_are_recovered(space26):
    ring = ModRing.integers_mod(5, 2)
    bases = _Bases(space26)
    instances = planted_instances(space26, 5, 2, 20, seed=3, bound=40)
    assert len(instances) == 20
    for instance in instances:
        assert instance.planted.level == 130
        assert instance.weight == 22
        found = strip_level_search(instance.planted, 26, 2, 40, bases, ring)
        assert found is not None
        assert found.weight == 2
        assert found.searched == (2,)
        assert found.form.values[:40] == reduce_mod(instance.source, ring).cusp_coefficients(40)
    assert (26, 1) in bases.requests


def test_strip_level_search_exhausts(space26, catalog52):
    ring = ModRing.integers_mod(5, 2)
    f = catalog52.form("f").truncate(40)
    raised = QExpansion(f.coefficients, level=130, weight=22)
    assert strip_level_search(raised, 26, 2, 40, _Bases(space26), ring) is None


def test_strip_level_search_preconditions(space26):
    ring = ModRing.integers_mod(5, 2)
    f = QExpansion(space26.generator("g").truncate(40).coefficients, level=130, weight=22)
    with pytest.raises(PreconditionError):
        strip_level_search(QExpansion(f.coefficients, level=260, weight=22), 26, 2, 40, _Bases(space26), ring)
    with pytest.raises(BasisError):
        strip_level_search(f, 26, 2, 40, _Bases(), ring)


def _delta_and_delta_e4(bound=30):
    E4 = eisenstein_series(5, bound)
    E6 = eisenstein_series(7, bound)
    diff = E4**3 - E6**2
    delta = QExpansion(
        tuple(c // 1728 for c in diff.coefficients),
        level=1,
        weight=12,
        character=DirichletCharacter.trivial(1),
        label="Delta",
    )
    product = delta * E4
    return delta, QExpansion(product.coefficients, level=1, weight=16, character=product.character, label="DeltaE4")


def test_strip_level_search_spans_several_weights():
    delta, delta_e4 = _delta_and_delta_e4()
    assert delta.coefficients[:4] == (0, 1, -24, 252)
    bases = _Bases(SpaceBasis.from_generators([delta], "g1"), SpaceBasis.from_generators([delta_e4], "g1"))
    ring = ModRing.integers_mod(7, 1)
    mixed = QExpansion(tuple(a + b for a, b in zip(delta.coefficients, delta_e4.coefficients)), level=7, weight=16)
    found = strip_level_search(mixed, 1, 16, 30, bases, ring)
    assert found is not None
    assert found.weight == 16
    assert found.searched == (12, 16)
    assert found.form.values[:30] == reduce_mod(mixed, ring).cusp_coefficients(30)
    assert strip_level_search(mixed, 1, 15, 30, bases, ring) is None


def test_weight_verdicts():
    assert weight_congruence_verdict([2, 22], 1, 5, 2).consistent
    flagged = weight_congruence_verdict([2, 8], 1, 5, 2)
    assert not flagged.consistent
    assert flagged.violations == ((2, 8),)
    assert flagged.modulus == 20
    assert weight_congruence_verdict([2, 7], 4, 5, 2).consistent
    with pytest.raises(PreconditionError):
        weight_congruence_verdict([2, 22], 3, 5, 2)


def test_residue_rank(space26):
    g = space26.generator("g").truncate(120)
    g1 = space26.generator("g1").truncate(120)
    assert residue_rank([g, g1], 5) == 2
    assert residue_rank([g, _g_times_e_tilde(space26)], 5) == 1


def test_weight_congruence_for_an_eigen_sum(space26):
    g1 = space26.generator("g1").truncate(120)
    verdict = weight_congruence_check([g1, _g_times_e_tilde(space26)], 5, 2)
    assert verdict.consistent
    assert verdict.weights == (2, 22)
    assert verdict.stroke_values == {3: 9}


def test_weight_congruence_needs_independent_reductions(space26):
    g = space26.generator("g").truncate(120)
    with pytest.raises(PreconditionError):
        weight_congruence_check([g, _g_times_e_tilde(space26)], 5, 2)


def test_variant_congruence_for_a_vanishing_sum(space26):
    g = space26.generator("g").truncate(120)
    lifted = _g_times_e_tilde(space26)
    verdict = variant_congruence_check([g, -lifted], 5, 2)
    assert verdict.consistent
    assert verdict.stroke_values[3] == [9, 9]
    with pytest.raises(CongruenceError):
        variant_congruence_check([g, lifted], 5, 2)


def _wild_pair(space26, bound=120, weights=(2, 4)):
    coefficients = space26.generator("g").truncate(bound).coefficients
    tame = QExpansion(coefficients, level=9, weight=weights[0], character=DirichletCharacter.trivial(9), label="tame")
    wild = QExpansion(
        tuple(-c for c in coefficients),
        level=9,
        weight=weights[1],
        character=DirichletCharacter.parse("9:2"),
        label="wild",
    )
    return tame, wild


def test_eta_exponent_from_characters(space26):
    tame, wild = _wild_pair(space26)
    assert eta_exponent([tame], 3, 2) == (1, ModRing.integers_mod(3, 2))
    assert eta_exponent([tame, wild], 3, 2) == (3, ModRing.cyclotomic(3, 1, 2))
    assert eta_exponent([tame, wild], 3, 1)[0] == 1
    g1 = space26.generator("g1").truncate(120)
    assert eta_exponent([g1, _g_times_e_tilde(space26)], 5, 2)[0] == 1


def test_variant_congruence_with_a_wild_character(space26):
    tame, wild = _wild_pair(space26)
    assert not weight_congruence_verdict([2, 4], 1, 3, 2).consistent
    verdict = variant_congruence_check([tame, wild], 3, 2)
    assert verdict.h == 3
    assert verdict.modulus == 2
    assert verdict.consistent
    assert sorted(verdict.stroke_values) == [2, 5]
    assert variant_congruence_check([tame, wild], 3, 2, h=3).consistent
    flagged = variant_congruence_check(list(_wild_pair(space26, weights=(2, 5))), 3, 2)
    assert flagged.violations == ((2, 5),)


def test_weight_congruence_with_a_wild_character(space26):
    _, wild = _wild_pair(space26)
    verdict = weight_congruence_check([wild], 3, 2)
    assert verdict.h == 3
    assert verdict.modulus == 2
    assert set(verdict.stroke_values) == {2, 5}


def test_given_h_must_match_the_characters(space26):
    tame, wild = _wild_pair(space26)
    with pytest.raises(ConsistencyError):
        variant_congruence_check([tame, wild], 3, 2, h=1)
    with pytest.raises(ConsistencyError):
        weight_congruence_check([wild], 3, 2, h=1)
