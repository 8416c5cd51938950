import pytest

from hecke_pm.errors import BasisError, NotInSpanError, PrecisionError
from hecke_pm.hecke_algebra import (
    CoefficientForm,
    HeckeMatrixCache,
    SpaceBasis,
    algebra_rank,
    form_from_generator,
    form_with_coefficients,
    hecke_matrix,
    lift_form,
    pairing_matrix,
    reduce_form,
    stroke_matrix,
)
from hecke_pm.qexp import QExpansion, hecke_Tn
from hecke_pm.ring_tower import ModRing
from hecke_pm.services.matrix_store import MatrixStore


def test_space_metadata(space52, space26):
    assert space52.dimension == 5
    assert space52.level == 52
    assert space52.weights == (2,)
    assert space52.injectivity_bound == 14
    assert space26.dimension == 2
    assert space26.injectivity_bound == 7


def test_saturation_repairs_the_mod_3_congruence(space52):
    product = 1
    for d in space52.elementary_divisors:
        product *= d
    assert product % 3 == 0
    assert space52.warnings


def test_hecke_algebra_rank(space52, cache):
    assert algebra_rank(space52, 14, cache) == 5


def test_hecke_matrix_matches_q_expansion_action(space52, cache):
    f = form_from_generator(space52, "f")
    g1 = form_from_generator(space52, "g1")
    for n in (2, 5, 7):
        op = hecke_matrix(space52, n, cache)
        expected = hecke_Tn(space52.generator("g1"), n, 20)
        assert g1.apply(op).values[:20] == expected.coefficients[1:21]
    assert f.apply(hecke_matrix(space52, 5, cache)) == f.scale(2)


def test_stroke_matrix_is_ell_squared_on_trivial_character(space26, cache):
    g = form_from_generator(space26, "g")
    assert g.apply(stroke_matrix(space26, 3, cache)) == g.scale(9)


def test_pairing_matrix_rows_are_coefficients(space26):
    P = pairing_matrix(space26, 7)
    assert P.nrows == 7
    assert P.ncols == 2
    with pytest.raises(PrecisionError):
        pairing_matrix(space26, 401)


def test_form_with_coefficients_finds_the_unique_form(space26):
    R = ModRing.integers_mod(3, 2)
    g = form_from_generator(space26, "g")
    values = g.reduce(R).values[:7]
    found = form_with_coefficients(space26, values, R)
    assert found.values[:20] == g.reduce(R).values[:20]
    assert lift_form(found).reduce(R) == g.reduce(R)


def test_form_with_coefficients_reports_missing_forms(space26):
    R = ModRing.integers_mod(3, 1)
    with pytest.raises(NotInSpanError):
        form_with_coefficients(space26, [R(1), R(0), R(0), R(0), R(0), R(0), R(0)], R)


def test_reduce_form_rejects_forms_outside_the_lattice(space26):
    with pytest.raises(NotInSpanError):
        reduce_form(space26, QExpansion((0, 1) + (1,) * 399, level=26))


def test_rank_deficient_generators():
    g = QExpansion((0, 1, 2, 3), level=1, weight=12, label="a")
    with pytest.raises(BasisError):
        SpaceBasis.from_generators([g, g.scale(2)])


def test_matrix_cache_persists_to_store(space26, tmp_path):
    cache = HeckeMatrixCache(MatrixStore(tmp_path))
    first = hecke_matrix(space26, 5, cache)
    fresh = HeckeMatrixCache(MatrixStore(tmp_path))
    assert fresh.get(space26.digest, "T5") == first.matrix
    assert hecke_matrix(space26, 5, fresh).matrix == first.matrix


def test_coefficient_form_arithmetic(space26):
    R = ModRing.integers_mod(3, 2)
    g = form_from_generator(space26, "g").reduce(R)
    g1 = form_from_generator(space26, "g1").reduce(R)
    total = g + g1
    assert isinstance(total, CoefficientForm)
    assert total.value(5) == R(-4)
    assert (total - g1) == g
    with pytest.raises(PrecisionError):
        g.value(401)
