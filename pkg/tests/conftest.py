import pytest

from coach2vec.model import MatchMeta
from coach2vec.synth import GeneratorConfig


@pytest.fixture
def meta():
    return MatchMeta("m1", "2019/2020", "A", "B", "cA", "cB")


@pytest.fixture(scope="session")
def small_synth_config():
    return GeneratorConfig(coaches_per_archetype=2, matches_per_coach=3, possessions_per_match=12, seed=3)
