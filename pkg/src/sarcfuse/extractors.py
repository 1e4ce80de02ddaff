"""Frozen affective transformers used as feature extractors.

Both wrappers expose the last-hidden-state vector at the CLS position and
the model's label scores. The emotion model is a 28-label multi-label
classifier, so its label scores are per-label sigmoid activations (they do
not sum to 1); the sentiment model is a 2-class classifier whose scores
are a softmax distribution. Neither model ever receives gradient updates.
"""

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
import transformers
from transformers import AutoModelForSequenceClassification, AutoTokenizer

from .errors import CheckpointError
from .utils import atomic_write_bytes, text_digest

transformers.logging.set_verbosity_error()
transformers.logging.disable_progress_bar()

EMOTION_LABEL_COUNT = 28
SENTIMENT_LABEL_COUNT = 2

# Published checkpoints the full-scale experiments use; tests substitute
# tiny local stand-ins with the same head shapes.
DEFAULT_EMOTION_MODEL = "bhadresh-savani/bert-base-go-emotion"
DEFAULT_SENTIMENT_MODEL = "siebert/sentiment-roberta-large-english"


@dataclass
class EmotionFeatures:
    u_cls: np.ndarray
    el: np.ndarray  # 28 per-label scores, each in [0, 1]


@dataclass
class SentimentFeatures:
    s_cls: np.ndarray
    sl: np.ndarray  # 2-way probability distribution


class _FrozenClassifier:
    """Shared loading/inference for the two frozen extractors."""

    expected_labels = None
    score_activation = None

    def __init__(self, checkpoint):
        self.checkpoint = str(checkpoint)
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(checkpoint)
            self.model = AutoModelForSequenceClassification.from_pretrained(checkpoint)
        except Exception as exc:
            raise CheckpointError(f"cannot load extractor from {checkpoint}: {exc}") from exc
        if self.model.config.num_labels != self.expected_labels:
            raise CheckpointError(
                f"{checkpoint}: expected {self.expected_labels} labels, "
                f"got {self.model.config.num_labels}"
            )
        self.model.eval()
        self.model.requires_grad_(False)

    @property
    def hidden_size(self):
        return self.model.config.hidden_size

    @property
    def model_id(self):
        return self.checkpoint

    def _encode(self, texts, max_length):
        """Batch forward pass -> (cls_vectors, label_scores) numpy arrays."""
        if max_length < 2:
            raise ValueError("max_length must leave room for CLS and SEP")
        if not texts:
            dim = self.hidden_size
            return np.zeros((0, dim), np.float32), np.zeros((0, self.expected_labels), np.float32)
        enc = self.tokenizer(
            list(texts),
            padding="max_length",
            truncation=True,
            max_length=max_length,
            return_tensors="pt",
        )
        with torch.no_grad():
            out = self.model(
                input_ids=enc["input_ids"],
                attention_mask=enc["attention_mask"],
                output_hidden_states=True,
            )
            cls = out.hidden_states[-1][:, 0, :]
            scores = self.score_activation(out.logits)
        return cls.numpy(), scores.numpy()


class EmotionExtractor(_FrozenClassifier):
    expected_labels = EMOTION_LABEL_COUNT

    @staticmethod
    def score_activation(logits):
        return torch.sigmoid(logits)

    def extract(self, texts, max_length) -> list[EmotionFeatures]:
        cls, scores = self._encode(texts, max_length)
        return [EmotionFeatures(u_cls=c, el=s) for c, s in zip(cls, scores)]


class SentimentExtractor(_FrozenClassifier):
    expected_labels = SENTIMENT_LABEL_COUNT

    @staticmethod
    def score_activation(logits):
        return torch.softmax(logits, dim=-1)

    def extract(self, texts, max_length) -> list[SentimentFeatures]:
        cls, scores = self._encode(texts, max_length)
        return [SentimentFeatures(s_cls=c, sl=s) for c, s in zip(cls, scores)]


def extract_emotion(extractor: EmotionExtractor, texts, max_length):
    return extractor.extract(texts, max_length)


def extract_sentiment(extractor: SentimentExtractor, texts, max_length):
    return extractor.extract(texts, max_length)


def assert_frozen(extractor) -> bool:
    """True iff every parameter is non-trainable and inference mode is set."""
    model = extractor.model if hasattr(extractor, "model") else extractor
    if model.training:
        return False
    return all(not p.requires_grad for p in model.parameters())


class FeatureCache:
    """Disk memo for frozen-extractor outputs.

    Keyed by (model id, text digest, max_length); entries are written
    atomically (temp file + rename) so concurrent writers are safe.
    """

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, model_id, text, max_length):
        key = text_digest(f"{model_id}\x00{max_length}\x00{text}")
        return self.directory / key[:2] / f"{key}.npz"

    def get(self, model_id, text, max_length):
        path = self._path(model_id, text, max_length)
        if not path.exists():
            return None
        with np.load(path) as data:
            return data["cls"], data["scores"]

    def put(self, model_id, text, max_length, cls, scores):
        path = self._path(model_id, text, max_length)
        buffer = io.BytesIO()
        np.savez(buffer, cls=cls, scores=scores)
        atomic_write_bytes(path, buffer.getvalue())


def extract_batched(extractor, texts, max_length, cache=None, batch_size=32):
    """(cls, scores) matrices for a text list, consulting the cache.

    Returns float32 arrays of shape (n, hidden) and (n, num_labels);
    order-preserving.
    """
    n = len(texts)
    cls_rows = [None] * n
    score_rows = [None] * n
    missing = []
    if cache is not None:
        for i, text in enumerate(texts):
            hit = cache.get(extractor.model_id, text, max_length)
            if hit is None:
                missing.append(i)
            else:
                cls_rows[i], score_rows[i] = hit
    else:
        missing = list(range(n))

    for start in range(0, len(missing), batch_size):
        chunk = missing[start : start + batch_size]
        cls, scores = extractor._encode([texts[i] for i in chunk], max_length)
        for j, i in enumerate(chunk):
            cls_rows[i] = cls[j]
            score_rows[i] = scores[j]
            if cache is not None:
                cache.put(extractor.model_id, texts[i], max_length, cls[j], scores[j])

    if n == 0:
        return (
            np.zeros((0, extractor.hidden_size), np.float32),
            np.zeros((0, extractor.expected_labels), np.float32),
        )
    return np.stack(cls_rows).astype(np.float32), np.stack(score_rows).astype(np.float32)
