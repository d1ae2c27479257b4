from pathlib import Path

import pytest

from characters import Character
from config import TOLERANCES
from group import length_spectrum
from lfunc import SpectrumSeries
from utils import load_presentation

ROOT = Path(__file__).parent
PRESENTATIONS = ROOT / "presentations"
CONFIGS = ROOT / "configs"


@pytest.fixture(autouse=True)
def reset_tolerances():
    TOLERANCES.reset()
    yield
    TOLERANCES.reset()


@pytest.fixture(scope="session")
def figure8():
    return load_presentation(PRESENTATIONS / "figure8.toml")


@pytest.fixture(scope="session")
def trefoil():
    return load_presentation(PRESENTATIONS / "trefoil.toml")


@pytest.fixture(scope="session")
def cyclic():
    return load_presentation(PRESENTATIONS / "cyclic.toml")


@pytest.fixture(scope="session")
def quarter():
    return Character.parse("1/4")


@pytest.fixture(scope="session")
def figure8_spectrum(figure8, quarter):
    return length_spectrum(figure8, quarter, 3.0, 8)


@pytest.fixture(scope="session")
def figure8_series(figure8_spectrum):
    return SpectrumSeries.from_spectrum(figure8_spectrum, label="figure8")
