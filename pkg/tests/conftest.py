from pathlib import Path

import pytest

from hecke_pm.hecke_algebra import HeckeMatrixCache
from hecke_pm.ingest import parse_catalog_file, parse_space_file

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def space52():
    return parse_space_file(FIXTURES / "S_2_G0_52.basis")


@pytest.fixture(scope="session")
def space26():
    return parse_space_file(FIXTURES / "S_2_G0_26.basis")


@pytest.fixture(scope="session")
def catalog52():
    return parse_catalog_file(FIXTURES / "S_2_G0_52.catalog")


@pytest.fixture(scope="session")
def catalog26():
    return parse_catalog_file(FIXTURES / "S_2_G0_26.catalog")


@pytest.fixture(scope="session")
def cache():
    return HeckeMatrixCache()
