import pytest

from hecke_pm.characters import DirichletCharacter
from hecke_pm.errors import IncomparableRingsError, PreconditionError, PrecisionError
from hecke_pm.qexp import (
    DirectSumForm,
    QExpansion,
    diamond,
    hecke_Tn,
    reduce_mod,
    restrict_support,
    sl2_index,
    stroke,
    sturm_bound,
)
from hecke_pm.ring_tower import ModRing


def test_sturm_bounds():
    assert sl2_index(52) == 84
    assert sturm_bound(52, 2) == 14
    assert sturm_bound(26, 2) == 7
    assert sturm_bound(1, 12) == 1
    assert sturm_bound(52, 2, "g1") == 336
    with pytest.raises(PreconditionError):
        sturm_bound(0, 2)


def test_newforms_are_hecke_eigenforms(space26):
    g1 = space26.generator("g1")
    for n in (3, 5, 7):
        image = hecke_Tn(g1, n)
        expected = g1.truncate(image.truncation).scale(g1[n])
        assert image.coefficients == expected.coefficients


def test_bad_prime_acts_by_u_operator(space26):
    g1 = space26.generator("g1")
    image = hecke_Tn(g1, 2)
    assert image.coefficients == tuple(-c for c in g1.coefficients[: image.truncation + 1])


def test_vanishing_eigenvalue(space52):
    f = space52.generator("f")
    assert hecke_Tn(f, 3).is_zero()


def test_stroke_is_ell_to_the_weight(space26):
    g = space26.generator("g")
    image = stroke(g, 3)
    assert image.coefficients == g.truncate(image.truncation).scale(9).coefficients
    with pytest.raises(PreconditionError):
        stroke(g, 13)


def test_scale_variable_and_restrict_support(space26, space52, catalog52):
    g = space26.generator("g")
    assert g.scale_variable(2).coefficients == space52.generator("g_q2").coefficients
    assert restrict_support(g, 2).coefficients == catalog52.form("gt").coefficients


def test_truncation_is_enforced(space26):
    g = space26.generator("g")
    with pytest.raises(PrecisionError):
        hecke_Tn(g, 5, 100)
    with pytest.raises(PrecisionError):
        g[401]


def test_reduce_mod_and_domain_mixing(space26):
    g = space26.generator("g")
    R = ModRing.integers_mod(3, 2)
    reduced = reduce_mod(g, R)
    assert reduced.domain == R
    assert reduced[3] == R(-3)
    assert reduced[9] == R(6)
    with pytest.raises(IncomparableRingsError):
        reduced + reduce_mod(g, ModRing.integers_mod(5, 1))


def test_series_product_adds_weights():
    f = QExpansion((1, 2, 0, 0), level=1, weight=4)
    q = QExpansion((0, 1, 0, 0), level=1, weight=2)
    product = f * q
    assert product.weight == 6
    assert product.coefficients == (0, 1, 2, 0)


def test_direct_sum_needs_distinct_weights(space26):
    g = space26.generator("g")
    with pytest.raises(PreconditionError):
        DirectSumForm((g, g))


def test_diamond_scales_by_the_character():
    f = QExpansion((0, 1, 3, 0, 2), level=5, weight=3, character=DirichletCharacter.parse("5:2"))
    assert diamond(f, 2).coefficients == (0, -1, -3, 0, -2)
    assert diamond(f, 4).coefficients == f.coefficients
    R = ModRing.integers_mod(5, 2)
    quartic = reduce_mod(QExpansion((0, 1, 0), level=5, weight=2, character=DirichletCharacter.parse("5:1")), R)
    twice = diamond(diamond(quartic, 2), 2)
    assert twice[1] == R(-1)
    with pytest.raises(PreconditionError):
        diamond(f, 5)
    with pytest.raises(PreconditionError):
        diamond(QExpansion((0, 1), level=5), 2)
