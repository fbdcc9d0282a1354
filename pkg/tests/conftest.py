from __future__ import annotations

import importlib.resources as resources

import pytest

from gamehedge.market import load_model
from gamehedge.options import load_payoff


def _data(name: str) -> str:
    return resources.files("gamehedge").joinpath("data", name).read_text()


@pytest.fixture(scope="session")
def example1():
    m = load_model(_data("example1.model.json"))
    g = load_payoff(_data("example1.option.json"), m)
    return m, g


@pytest.fixture(scope="session")
def example2():
    m = load_model(_data("example2.model.json"))
    g = load_payoff(_data("example2.option.json"), m)
    return m, g
