"""Shared fixtures: tiny offline model checkpoints and synthetic corpora.

Everything runs without network access; the stand-in checkpoints mirror
the real models' interfaces (tokenizer, hidden states, label heads) at a
fraction of the size.
"""

import os

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")

import pytest

from sarcfuse.cnn_branch import CnnConfig
from sarcfuse.extractors import EmotionExtractor, SentimentExtractor
from sarcfuse.fusion import FusionConfig, TrainConfig, train_fused
from sarcfuse.lexical import build_vocabulary, load_embeddings
from sarcfuse.testing import (
    BASE_WORDS,
    make_fixture_bundle,
    make_tiny_emotion_model,
    make_tiny_sarcasm_base,
    make_tiny_sentiment_model,
    write_vector_file,
)

EMBED_DIM = 12


@pytest.fixture(scope="session")
def asset_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("assets")
    return {
        "sarc_base": make_tiny_sarcasm_base(root / "sarc_base"),
        "emotion": make_tiny_emotion_model(root / "emotion"),
        "sentiment": make_tiny_sentiment_model(root / "sentiment"),
        "vectors": write_vector_file(root / "vectors.txt", BASE_WORDS, dim=EMBED_DIM, seed=7),
    }


@pytest.fixture(scope="session")
def emotion(asset_dir):
    return EmotionExtractor(asset_dir["emotion"])


@pytest.fixture(scope="session")
def sentiment(asset_dir):
    return SentimentExtractor(asset_dir["sentiment"])


@pytest.fixture
def bundle():
    return make_fixture_bundle(n_train=16, n_test=8, seed=0)


def small_train_config(**overrides):
    params = {
        "max_length": 12,
        "max_epochs": 2,
        "lr": 1e-3,
        "batch_size": 4,
        "seed": 0,
        "val_fraction": 0.0,
    }
    params.update(overrides)
    return TrainConfig(**params)


def small_fusion_config(**overrides):
    params = {"projection_dim": 16, "head_hidden_dim": 32}
    params.update(overrides)
    return FusionConfig(**params)


def small_cnn_config(**overrides):
    params = {
        "filter_sizes": (2, 3),
        "filters_per_size": 8,
        "embedding_dim": EMBED_DIM,
        "max_words": 24,
    }
    params.update(overrides)
    return CnnConfig(**params)


@pytest.fixture
def train_tiny(asset_dir, emotion, sentiment, tmp_path):
    """Run a miniature fused training; returns the TrainResult."""

    def run(bundle, out_name="run", train_config=None, fusion_config=None, cnn_config=None):
        vocab = build_vocabulary(bundle.train)
        table = load_embeddings(vocab, asset_dir["vectors"], dim=EMBED_DIM, seed=0)
        return train_fused(
            bundle,
            asset_dir["sarc_base"],
            emotion,
            sentiment,
            table,
            vocab,
            train_config or small_train_config(),
            fusion_config or small_fusion_config(),
            cnn_config or small_cnn_config(),
            tmp_path / out_name,
        )

    return run
