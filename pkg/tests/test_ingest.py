import pytest

from hecke_pm.errors import BasisError, ParseError
from hecke_pm.ingest import (
    BasisDirectory,
    basis_file_name,
    parse_catalog_text,
    parse_space_file,
    parse_space_text,
    sibling_catalog,
)
from hecke_pm.numberfield import NumberFieldElement

DELTA = "space level=1 weight=12 group=g1 char=none trunc=5 coeffring=int\nDelta: 1,-24,252,-1472,4830\n"


def test_parse_small_space():
    S = parse_space_text(DELTA)
    assert S.dimension == 1
    assert S.level == 1
    assert S.weights == (12,)
    assert S.generator("Delta")[2] == -24
    assert S.generator("Delta")[0] == 0


def test_fixture_headers(space52, catalog52):
    assert space52.truncation == 400
    assert catalog52.header.level == 52
    assert "f" in catalog52.labels
    assert catalog52.form("f").character.is_trivial()
    with pytest.raises(BasisError):
        catalog52.form("nope")


def test_header_errors_carry_a_position():
    with pytest.raises(ParseError) as info:
        parse_space_text("# comment\nspace level=x weight=2 group=g0 char=none trunc=5 coeffring=int\nf: 1,2,3,4,5\n")
    assert info.value.line == 2
    assert info.value.column == 7
    with pytest.raises(ParseError):
        parse_space_text("space level=1 weight=12\nDelta: 1,-24\n")
    with pytest.raises(ParseError):
        parse_space_text("basis level=1 weight=12 group=g1 char=none trunc=5 coeffring=int\nDelta: 1,-24,252,-1472,4830\n")
    with pytest.raises(ParseError):
        parse_space_text("space level=1 weight=12 group=g2 char=none trunc=5 coeffring=int\nDelta: 1,-24,252,-1472,4830\n")


def test_row_errors_carry_a_position():
    text = DELTA.replace("252", "zz")
    with pytest.raises(ParseError) as info:
        parse_space_text(text)
    assert info.value.line == 2
    assert info.value.column == 14
    with pytest.raises(ParseError):
        parse_space_text(DELTA.replace(",4830", ""))
    with pytest.raises(ParseError):
        parse_space_text(DELTA + "Delta: 1,0,0,0,0\n")


DIRECT_SUM = (
    "catalog level=1 weight=12,16 group=g1 char=none trunc=5 coeffring=int\n"
    "Delta@12: 1,-24,252,-1472,4830\n"
    "DeltaE4@16: 1,216,-3348,13888,52110\n"
)


def test_direct_sum_rows_carry_their_weight():
    catalog = parse_catalog_text(DIRECT_SUM)
    assert catalog.form("Delta").weight == 12
    assert catalog.form("DeltaE4").weight == 16
    assert catalog.form("DeltaE4")[3] == -3348
    with pytest.raises(ParseError) as info:
        parse_catalog_text(DIRECT_SUM.replace("Delta@12:", "Delta:"))
    assert info.value.line == 2
    assert info.value.column == 1
    with pytest.raises(ParseError):
        parse_catalog_text(DIRECT_SUM.replace("Delta@12: ", ""))
    with pytest.raises(ParseError):
        parse_catalog_text(DIRECT_SUM.replace("Delta@12:", "Delta@14:"))


def test_character_parity_is_checked():
    text = "space level=7 weight=2 group=g1 char=7:3 trunc=3 coeffring=int\nf: 1,0,0\n"
    with pytest.raises(BasisError):
        parse_space_text(text)


def test_number_field_catalog_rows():
    text = "catalog level=23 weight=2 group=g0 char=none trunc=3 coeffring=nf:-1,1,1\nf: 1,[0;-1],[1;1]\n"
    catalog = parse_catalog_text(text)
    f = catalog.form("f")
    assert isinstance(f[2], NumberFieldElement)
    assert f[2] == catalog.header.field.element([0, -1])
    assert f[1] == 1


def test_space_rows_must_be_integral():
    text = "space level=23 weight=2 group=g0 char=none trunc=3 coeffring=nf:-1,1,1\nf: 1,[0;-1],[1;1]\n"
    with pytest.raises(BasisError):
        parse_space_text(text)


def test_missing_file_is_a_basis_error(tmp_path):
    with pytest.raises(BasisError):
        parse_space_file(tmp_path / "missing.basis")


def test_sibling_catalog(fixtures_dir, tmp_path):
    assert sibling_catalog(fixtures_dir / "S_2_G0_52.basis") == fixtures_dir / "S_2_G0_52.catalog"
    assert sibling_catalog(tmp_path / "S_2_G0_52.basis") is None


def test_basis_directory_falls_back_to_gamma0(fixtures_dir):
    bases = BasisDirectory(fixtures_dir)
    S = bases.space(26, 2)
    assert S is not None
    assert S.dimension == 2
    assert bases.warnings
    assert bases.space(26, 4) is None
    assert bases.space(26, 2) is S


def test_basis_directory_prefers_gamma1(tmp_path):
    (tmp_path / basis_file_name(1, 12)).write_text(DELTA)
    bases = BasisDirectory(tmp_path)
    assert bases.space(1, 12).dimension == 1
    assert not bases.warnings
    assert basis_file_name(1, 12) == "S_12_G1_1.basis"
