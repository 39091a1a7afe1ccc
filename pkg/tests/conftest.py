import pytest

from sigaware import gen


@pytest.fixture(scope="session")
def small_corpus():
    return gen.generate(gen.GenConfig(count=120, seed=11))


@pytest.fixture(scope="session")
def small_splits(small_corpus):
    return gen.split(small_corpus, (80, 10, 10), seed=11)
