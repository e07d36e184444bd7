import pytest

import toylang
from dtparser import models
from dtparser.config import Config
from dtparser.corpus import split_corpus

TOY_SEED = 7
TOY_SIZE = 50


def toy_config():
    return Config(unk_threshold=1, min_events=2, cluster_window=64, seed=13)


@pytest.fixture(scope="session")
def toy_treebank():
    return toylang.corpus(TOY_SIZE, TOY_SEED)


@pytest.fixture(scope="session")
def toy_model_set(toy_treebank):
    config = toy_config()
    grow, heldout = split_corpus(toy_treebank, config.grow_fraction,
                                 config.seed)
    return models.train(grow, heldout, config)


@pytest.fixture(scope="session")
def config():
    return toy_config()
