import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

import pytest

from hotcache import designs, hhpda, sim


@pytest.fixture(scope="session")
def example_pair():
    return hhpda.example_pair()


@pytest.fixture(scope="session")
def design_381():
    return designs.load_design("ex2-3-8-4-1")


@pytest.fixture(scope="session")
def built_pair(design_381):
    return hhpda.build_from_design(design_381, 2, (1, 2), design_id="ex2-3-8-4-1")


@pytest.fixture(scope="session")
def worked_tau():
    return [(1, 1), (2, 2), (3, 1)]


@pytest.fixture
def small_library(example_pair):
    return sim.make_library(4, example_pair.Fprime, 16, seed=0)
