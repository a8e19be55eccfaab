from pathlib import Path

import pytest

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def embeddings_path() -> Path:
    return FIXTURES / "embeddings_50x10.txt"


@pytest.fixture(scope="session")
def dump_path() -> Path:
    return FIXTURES / "conceptnet_edges.tsv"


@pytest.fixture(scope="session")
def simlex_path() -> Path:
    return FIXTURES / "simlex_6pairs.tsv"


@pytest.fixture(scope="session")
def config_path() -> Path:
    return FIXTURES / "build_config.json"


@pytest.fixture(scope="session")
def api_cache_dir() -> Path:
    return FIXTURES / "api_cache"
