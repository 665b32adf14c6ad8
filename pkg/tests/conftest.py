import pathlib

import pytest

from lexsg import SolverConfig, parse_game

GAMES = pathlib.Path(__file__).resolve().parent.parent / "games"


def load_game(name):
    return parse_game((GAMES / f"{name}.sg").read_text())


@pytest.fixture(scope="session")
def fig1():
    return load_game("fig1")


@pytest.fixture(scope="session")
def fig3():
    return load_game("fig3")


@pytest.fixture(scope="session")
def exact_cfg():
    return SolverConfig(mode="exact")


@pytest.fixture(scope="session")
def vi_cfg():
    return SolverConfig(mode="vi")
