import json

import pytest

from app.core.models import make_class, threshold_class, uniform_distribution
from app.core.random_source import RandomSource


@pytest.fixture
def thresholds3():
    # rows by id: 000, 001, 011, 111
    return threshold_class(3)


@pytest.fixture
def thresholds8():
    return threshold_class(8)


@pytest.fixture
def two_rows():
    return make_class(["00", "11"])


@pytest.fixture
def exact_uniform(thresholds3):
    return uniform_distribution(thresholds3, target_id=3, exact=True)


@pytest.fixture
def rng():
    return RandomSource(2024)


@pytest.fixture
def write_config(tmp_path):
    def write(data: dict, name: str = "config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return write


@pytest.fixture(autouse=True)
def clean_experiment_env(monkeypatch):
    monkeypatch.delenv("EXPERIMENT_SEED", raising=False)
    monkeypatch.delenv("EXPERIMENT_OUT_DIR", raising=False)
