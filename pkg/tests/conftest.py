import numpy as np
import pytest

from simrec.model import ModelConfig, build_params


def tiny_config(vocab_size=12, embed_dim=6, hidden_size=8, ff_width=5, num_labels=9):
    return ModelConfig(
        vocab_size=vocab_size,
        embed_dim=embed_dim,
        hidden_size=hidden_size,
        ff_width=ff_width,
        num_labels=num_labels,
    )


@pytest.fixture
def tiny_model():
    config = tiny_config()
    return config, build_params(config, seed=11)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
