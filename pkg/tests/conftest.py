import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from codematch.corpus import load_corpus
from codematch.models import ModelConfig, init_params
from codematch.sbt import sbt_string
from codematch.subword import train_unigram

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def train_samples():
    return load_corpus(DATA_DIR / "mini_train.json", "train")


@pytest.fixture(scope="session")
def test_samples():
    return load_corpus(DATA_DIR / "mini_test.json", "test")


@pytest.fixture(scope="session")
def code_vocab(train_samples):
    texts = []
    for s in train_samples:
        texts.append(s.code)
        texts.append(sbt_string(s.code))
    return train_unigram(texts, vocab_size=300)


@pytest.fixture(scope="session")
def text_vocab(train_samples):
    return train_unigram([s.description for s in train_samples], vocab_size=200)


def tiny_config(kind: str, code_vocab_size: int = 40, text_vocab_size: int = 40,
                embed_dim: int = 6, hidden_dim: int = 4, agg_hidden: int = 3,
                perspectives: int = 3) -> ModelConfig:
    return ModelConfig(kind=kind, code_vocab_size=code_vocab_size,
                       text_vocab_size=text_vocab_size, embed_dim=embed_dim,
                       hidden_dim=hidden_dim, agg_hidden=agg_hidden,
                       perspectives=perspectives, code_cap=16, ast_cap=24,
                       text_cap=12)


def tiny_store(cfg: ModelConfig, seed: int = 0):
    return init_params(cfg, seed)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)


@pytest.fixture(scope="session")
def ct_train_config(code_vocab, text_vocab):
    from codematch.training import TrainConfig

    cfg = TrainConfig(model=tiny_config("ct", code_vocab.size, text_vocab.size,
                                        embed_dim=8, hidden_dim=6))
    cfg.epochs = 4
    cfg.batch_size = 16
    cfg.negatives = 2
    cfg.alpha = None
    cfg.pretrain_embeddings = False
    return cfg


@pytest.fixture(scope="session")
def ct_ckpt_blob(ct_train_config, train_samples, code_vocab, text_vocab):
    """A small trained ct checkpoint shared by index/service tests."""
    from codematch.checkpoint import checkpoint_bytes
    from codematch.training import train

    store, _ = train(ct_train_config, train_samples[:20], code_vocab, text_vocab)
    return checkpoint_bytes(ct_train_config.to_dict(), store,
                            code_vocab.content_hash(), text_vocab.content_hash())


@pytest.fixture(scope="session")
def ct_index(ct_ckpt_blob, test_samples, code_vocab, text_vocab):
    from codematch.index import build_index

    return build_index(ct_ckpt_blob, test_samples, code_vocab, text_vocab)
