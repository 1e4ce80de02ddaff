"""Tiny offline stand-ins for tests and demos.

Real runs load multi-hundred-megabyte published checkpoints; everything
here builds miniature models with the same interfaces (word-level
tokenizer, RoBERTa-style encoder, 28-label emotion head, 2-label
sentiment head) so the whole pipeline exercises end to end in seconds
with no downloads.
"""

from pathlib import Path

import numpy as np
import torch
from tokenizers import Tokenizer, models, pre_tokenizers, processors
from transformers import (
    BertConfig,
    BertForSequenceClassification,
    PreTrainedTokenizerFast,
    RobertaConfig,
    RobertaForMaskedLM,
    RobertaForSequenceClassification,
)

from .corpus import DatasetBundle, Example
from .utils import seed_everything

BASE_WORDS = [
    "the", "a", "is", "was", "this", "movie", "day", "great", "terrible",
    "awful", "amazing", "love", "hate", "really", "so", "totally", "sure",
    "right", "wow", "nice", "bad", "good", "best", "worst", "ever", "just",
    "what", "fun", "boring", "brilliant", "genius", "idea", "plan", "work",
    "monday", "weather", "perfect", "lovely", "happy", "sad", "angry",
    "yeah", "oh", "thanks", "helpful", "useless", "fantastic", "horrible",
]


def make_word_tokenizer(out_dir, extra_words=()) -> Path:
    """Word-level fast tokenizer over a small fixed vocabulary."""
    out_dir = Path(out_dir)
    vocab = {"<s>": 0, "<pad>": 1, "</s>": 2, "<unk>": 3, "<mask>": 4}
    for word in list(BASE_WORDS) + list(extra_words):
        if word not in vocab:
            vocab[word] = len(vocab)
    tok = Tokenizer(models.WordLevel(vocab, unk_token="<unk>"))
    tok.pre_tokenizer = pre_tokenizers.Whitespace()
    tok.post_processor = processors.TemplateProcessing(
        single="<s> $A </s>",
        pair="<s> $A </s> </s> $B </s>",
        special_tokens=[("<s>", 0), ("</s>", 2)],
    )
    fast = PreTrainedTokenizerFast(
        tokenizer_object=tok,
        bos_token="<s>",
        eos_token="</s>",
        unk_token="<unk>",
        pad_token="<pad>",
        cls_token="<s>",
        sep_token="</s>",
        mask_token="<mask>",
    )
    fast.save_pretrained(out_dir)
    return out_dir


def _tiny_roberta_config(vocab_size, hidden=32, labels=None):
    kwargs = {}
    if labels is not None:
        kwargs["num_labels"] = labels
    return RobertaConfig(
        vocab_size=vocab_size,
        hidden_size=hidden,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=2 * hidden,
        max_position_embeddings=130,
        pad_token_id=1,
        bos_token_id=0,
        eos_token_id=2,
        **kwargs,
    )


def _tokenizer_vocab_size(tokenizer_dir):
    fast = PreTrainedTokenizerFast.from_pretrained(tokenizer_dir)
    return len(fast)


def make_tiny_sarcasm_base(out_dir, seed=0, extra_words=()) -> Path:
    """Miniature masked-LM checkpoint usable as the sarcasm encoder base."""
    out_dir = Path(out_dir)
    make_word_tokenizer(out_dir, extra_words=extra_words)
    seed_everything(seed)
    model = RobertaForMaskedLM(_tiny_roberta_config(_tokenizer_vocab_size(out_dir)))
    model.save_pretrained(out_dir)
    return out_dir


def make_tiny_emotion_model(out_dir, seed=1, extra_words=()) -> Path:
    """Miniature 28-label multi-label classifier (emotion stand-in)."""
    out_dir = Path(out_dir)
    make_word_tokenizer(out_dir, extra_words=extra_words)
    seed_everything(seed)
    config = BertConfig(
        vocab_size=_tokenizer_vocab_size(out_dir),
        hidden_size=24,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=48,
        max_position_embeddings=130,
        num_labels=28,
        problem_type="multi_label_classification",
        pad_token_id=1,
    )
    model = BertForSequenceClassification(config)
    model.save_pretrained(out_dir)
    return out_dir


def make_tiny_sentiment_model(out_dir, seed=2, extra_words=()) -> Path:
    """Miniature 2-label classifier (sentiment stand-in)."""
    out_dir = Path(out_dir)
    make_word_tokenizer(out_dir, extra_words=extra_words)
    seed_everything(seed)
    model = RobertaForSequenceClassification(
        _tiny_roberta_config(_tokenizer_vocab_size(out_dir), hidden=28, labels=2)
    )
    model.save_pretrained(out_dir)
    return out_dir


SARCASTIC_TEMPLATES = [
    "oh great another {} monday",
    "wow what a totally brilliant {} plan",
    "sure this {} idea will really work",
    "yeah right the {} weather is just perfect",
    "totally the best {} movie ever",
    "so helpful thanks for the {} advice",
]

LITERAL_TEMPLATES = [
    "the {} movie was good",
    "i love this {} day",
    "this {} plan seems sensible",
    "the {} weather is nice today",
    "a really {} fun time",
    "thanks for the {} helpful advice",
]

FILLERS = ["great", "nice", "lovely", "fun", "good", "happy", "sunny", "quiet"]


def make_fixture_bundle(
    n_train=32, n_test=8, seed=0, dataset="sarc_movies"
) -> DatasetBundle:
    """Synthetic separable bundle: sarcastic vs literal templated texts."""
    rng = np.random.default_rng(seed)

    def build(count, split, offset=0):
        examples = []
        for i in range(count):
            label = i % 2
            pool = SARCASTIC_TEMPLATES if label else LITERAL_TEMPLATES
            template = pool[int(rng.integers(len(pool)))]
            text = template.format(FILLERS[int(rng.integers(len(FILLERS)))])
            examples.append(
                Example(f"{dataset}-{split}-{offset + i:04d}", text, label, dataset, split)
            )
        return examples

    return DatasetBundle(dataset, build(n_train, "train"), build(n_test, "test", offset=n_train))


def random_texts(count, seed=0, min_words=3, max_words=8) -> list[str]:
    """Gibberish-but-tokenizable texts drawn from the stand-in word list."""
    rng = np.random.default_rng(seed)
    texts = []
    for _ in range(count):
        n = int(rng.integers(min_words, max_words + 1))
        words = [BASE_WORDS[int(rng.integers(len(BASE_WORDS)))] for _ in range(n)]
        texts.append(" ".join(words))
    return texts


def write_vector_file(path, tokens, dim=300, seed=0, vectors=None) -> Path:
    """Write a pretrained-vector text file for the given tokens.

    Vectors default to seeded random values; pass a {token: array} dict to
    pin specific rows.
    """
    path = Path(path)
    rng = np.random.default_rng(seed)
    lines = []
    for token in tokens:
        if vectors and token in vectors:
            vec = np.asarray(vectors[token], dtype=np.float64)
        else:
            vec = rng.normal(scale=0.3, size=dim)
        values = " ".join(f"{v:.5f}" for v in vec)
        lines.append(f"{token} {values}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
