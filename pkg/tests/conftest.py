import json

import pytest

from levyruin import BrownianRisk, CramerLundbergExp


@pytest.fixture(scope="session")
def bm():
    return BrownianRisk(c=1.0, sigma=1.0)


@pytest.fixture(scope="session")
def cl():
    return CramerLundbergExp(c=2.0, eta=1.0, alpha=1.0)


@pytest.fixture()
def model_config_file(tmp_path):
    """Write a model config JSON and return its path."""

    def write(config: dict) -> str:
        path = tmp_path / "model.json"
        path.write_text(json.dumps(config))
        return str(path)

    return write
