import random

import pytest

from hecke_pm.eigen_classify import (
    RESIDUAL_IRREDUCIBILITY,
    classify_space,
    enumerate_weak_eigenforms,
    half_sum_construct,
    is_dc_weak_eigenform,
    is_weak_eigenform,
    strong_match,
    systems_agree,
)
from hecke_pm.errors import IncomparableRingsError, NotAUnitError, PreconditionError
from hecke_pm.hecke_algebra import CoefficientForm, HeckeOperator, SpaceBasis, form_from_generator, reduce_form
from hecke_pm.linalg import IntMatrix
from hecke_pm.qexp import QExpansion
from hecke_pm.ring_tower import ModRing

H_MOD_9 = [1, 0, 3, 0, 5, 0, 4, 0, 6, 0, 7, 0, 8, 0, 6, 0, 6]


def _half_sum(space52, catalog52, cache):
    f = form_from_generator(space52, "f")
    gt = reduce_form(space52, catalog52.form("gt"))
    return half_sum_construct(f, gt, 3, cache=cache)


def test_mod_3_congruence_between_f_and_g_tilde(catalog52):
    f, gt = catalog52.form("f"), catalog52.form("gt")
    assert all((f[n] - gt[n]) % 3 == 0 for n in range(1, 15))


def test_enumeration_mod_3_on_gamma0_52(space52, cache):
    found = enumerate_weak_eigenforms(space52, ModRing.integers_mod(3, 1), cache=cache)
    assert len(found) == 6
    systems = {system.sort_key() for _, system in found}
    assert len(systems) == 2
    assert all(form.value(1) == 1 for form, _ in found)


def test_enumeration_mod_3_on_gamma0_26(space26, cache):
    found = enumerate_weak_eigenforms(space26, ModRing.integers_mod(3, 1), cache=cache)
    assert len(found) == 2


def test_every_enumerated_form_is_an_eigenform(space26, cache):
    R = ModRing.integers_mod(3, 2)
    for form, system in enumerate_weak_eigenforms(space26, R, cache=cache):
        again = is_weak_eigenform(form, system.away_from, system.bound, cache)
        assert again is not None
        assert again.values == system.values


def test_enumeration_needs_unramified_ring(space26):
    with pytest.raises(PreconditionError):
        enumerate_weak_eigenforms(space26, ModRing.cyclotomic(3, 1, 2))


def test_classification_groups_forms_by_system(space52, catalog52, cache):
    classes = classify_space(space52, ModRing.integers_mod(3, 1), catalog=catalog52.forms, cache=cache)
    assert [len(c.forms) for c in classes] == [3, 3]
    assert all(c.residual_irreducibility == RESIDUAL_IRREDUCIBILITY for c in classes)


@pytest.mark.parametrize("space_name,catalog_name", [("space26", "catalog26"), ("space52", "catalog52")])
def test_systems_mod_p_come_from_characteristic_zero(space_name, catalog_name, request, cache):
    space = request.getfixturevalue(space_name)
    catalog = request.getfixturevalue(catalog_name)
    classes = classify_space(space, ModRing.integers_mod(3, 1), catalog=catalog.forms, cache=cache)
    assert classes
    for entry in classes:
        assert entry.matches
        assert entry.provenance == "strong"


def test_half_sum_expansion_mod_9(space52, catalog52, cache):
    result = _half_sum(space52, catalog52, cache)
    R = ModRing.integers_mod(3, 2)
    assert list(result.h.values[:17]) == [R(v) for v in H_MOD_9]
    assert result.verified
    assert not result.liftable
    assert result.away_from == 156
    assert result.bound == 14


def test_half_sum_is_weak_but_not_strong(space52, catalog52, cache):
    result = _half_sum(space52, catalog52, cache)
    system = is_weak_eigenform(result.h, 156, 14, cache)
    assert system is not None
    assert system.value(5) == 5
    assert strong_match(system, catalog52.forms) == []


def test_half_sum_preconditions(space52, cache):
    f = form_from_generator(space52, "f")
    g1 = form_from_generator(space52, "g1")
    with pytest.raises(PreconditionError):
        half_sum_construct(f, g1, 3, cache=cache)
    with pytest.raises(PreconditionError):
        half_sum_construct(f, f, 2, cache=cache)


def test_weak_eigenform_checks(space26, cache):
    R = ModRing.integers_mod(3, 2)
    g = form_from_generator(space26, "g").reduce(R)
    g1 = form_from_generator(space26, "g1").reduce(R)
    system = is_weak_eigenform(g, 78, 7, cache)
    assert system is not None
    assert system.value(5) == R(-1)
    assert system.is_multiplicative()
    assert is_weak_eigenform(g + g1, 78, 7, cache) is None


def test_normalization_needs_unit_leading_coefficient(space52, cache):
    g_q2 = form_from_generator(space52, "g_q2").reduce(ModRing.integers_mod(3, 1))
    with pytest.raises(NotAUnitError):
        is_weak_eigenform(g_q2, 156, 14, cache)


def test_dc_weak_check_records_strokes(space26, cache):
    g = form_from_generator(space26, "g").reduce(ModRing.integers_mod(5, 2))
    system = is_dc_weak_eigenform(g, 130, 9, cache)
    assert system is not None
    assert system.provenance == "dc-weak"
    assert dict(system.strokes)[3] == 9


def test_systems_agree_mod_3_not_mod_9(space52, catalog52, cache):
    f = form_from_generator(space52, "f")
    gt = reduce_form(space52, catalog52.form("gt"))
    low = ModRing.integers_mod(3, 1)
    high = ModRing.integers_mod(3, 2)
    assert systems_agree(is_weak_eigenform(f.reduce(low), 156, 14, cache), is_weak_eigenform(gt.reduce(low), 156, 14, cache))
    assert not systems_agree(
        is_weak_eigenform(f.reduce(high), 156, 14, cache), is_weak_eigenform(gt.reduce(high), 156, 14, cache)
    )
    assert systems_agree(
        is_weak_eigenform(f.reduce(high), 156, 14, cache),
        is_weak_eigenform(gt.reduce(high), 156, 14, cache),
        exclude=(5, 7),
    )


def test_systems_in_unrelated_rings(space26, cache):
    g = form_from_generator(space26, "g")
    e3 = is_weak_eigenform(g.reduce(ModRing.integers_mod(3, 2)), 78, 7, cache)
    e5 = is_weak_eigenform(g.reduce(ModRing.integers_mod(5, 2)), 130, 7, cache)
    with pytest.raises(IncomparableRingsError):
        systems_agree(e3, e5)


def _unit_space(length: int = 6) -> SpaceBasis:
    u = QExpansion((0, 1) + (0,) * (length - 1), level=1, weight=2, label="u")
    v = QExpansion((0, 0, 1) + (0,) * (length - 2), level=1, weight=2, label="v")
    return SpaceBasis.from_generators([u, v])


def test_half_sum_identity_on_synthetic_rank_two_instances():
    rng = random.Random(7)
    S = _unit_space()
    for _ in range(100):
        p = rng.choice([3, 5, 7, 11])
        lam = rng.randint(-60, 60)
        mu = lam + p * rng.randint(-6, 6)
        # f = u and g = u + p v with T f = lam f, T g = mu g
        op = HeckeOperator("T", IntMatrix.from_rows([[lam, 0], [(mu - lam) // p, mu]]))
        ring = ModRing.integers_mod(p, 2)
        half = ring(2).inverse()
        h = CoefficientForm(S, (ring.one, ring(p) * half), ring)
        assert h.apply(op) == h.scale(ring(lam + mu) * half)
