"""Shared fixtures: the bundled example models run through the pipeline."""

from pathlib import Path

import pytest

from lqdisc import build_deq, load_model, realize_plant

MODELS = Path(__file__).resolve().parents[1] / "models"


@pytest.fixture(scope="session")
def mimo_model():
    return load_model(MODELS / "mimo_delayed.json")


@pytest.fixture(scope="session")
def mimo_realization(mimo_model):
    plant, cost = mimo_model
    return realize_plant(plant, cost.Ts)


@pytest.fixture(scope="session")
def mimo_deq(mimo_model, mimo_realization):
    _, cost = mimo_model
    return build_deq(mimo_realization, cost)


@pytest.fixture(scope="session")
def scalar_model():
    return load_model(MODELS / "scalar.json")


@pytest.fixture(scope="session")
def scalar_deq(scalar_model):
    plant, cost = scalar_model
    return build_deq(plant, cost)
