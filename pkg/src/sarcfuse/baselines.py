"""Reference baselines scored through the shared evaluation path.

Three trainable baselines (bag-of-vectors logistic regression, a plain
convolutional classifier, and a convolution-plus-recurrent stack) plus an
importer that scores prediction files produced by external systems. All
of them consume the same dataset bundles and report through
:func:`sarcfuse.evalkit.score`, so numbers are comparable to the fused
model by construction.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import torch
from sklearn.linear_model import LogisticRegression
from torch import nn

from .cnn_branch import CnnBranch, CnnConfig
from .corpus import DatasetBundle
from .errors import (
    CoverageError,
    DivergenceError,
    EmptyCorpusError,
    LabelError,
    ParseError,
)
from .evalkit import MetricsReport, score
from .fusion import TrainConfig, default_max_words
from .lexical import (
    PROV_PRETRAINED,
    PROV_STEMMED,
    EmbeddingTable,
    Vocabulary,
    encode_for_cnn,
    word_tokenize,
)
from .utils import read_jsonl, seed_everything

BASELINE_KINDS = ("nbow", "cnn", "cnn_lstm_dnn", "external")

_REQUIRED_KEYS = {
    "nbow": (),
    "cnn": (),
    "cnn_lstm_dnn": (
        "conv_filters",
        "conv_kernel_size",
        "lstm_hidden",
        "dense_sizes",
        "dropout_rate",
    ),
    "external": ("path",),
}


@dataclass
class BaselineSpec:
    """Named baseline plus its hyperparameters and seed."""

    kind: str
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in BASELINE_KINDS:
            raise ValueError(f"unknown baseline kind {self.kind!r}")
        missing = [k for k in _REQUIRED_KEYS[self.kind] if k not in self.hyperparameters]
        if missing:
            raise ValueError(
                f"baseline kind {self.kind!r} requires hyperparameters {missing}"
            )


def default_nbow_spec(seed=0, **overrides) -> BaselineSpec:
    params = {"c": 1.0, "tol": 1e-6, "max_iter": 1000}
    params.update(overrides)
    return BaselineSpec("nbow", params, seed)


def default_cnn_lstm_dnn_spec(seed=0, **overrides) -> BaselineSpec:
    params = {
        "conv_filters": 64,
        "conv_kernel_size": 3,
        "lstm_hidden": 128,
        "dense_sizes": (),
        "dropout_rate": 0.25,
    }
    params.update(overrides)
    return BaselineSpec("cnn_lstm_dnn", params, seed)


def nbow_sentence_vector(text, vocab: Vocabulary, table: EmbeddingTable) -> np.ndarray:
    """Unweighted mean of the pretrained vectors of the words in `text`.

    Words without a pretrained (or stem-matched) vector are skipped; a
    text with no covered word maps to the zero vector.
    """
    rows = []
    for token in word_tokenize(text):
        idx = vocab.index(token)
        if table.provenance[idx] in (PROV_PRETRAINED, PROV_STEMMED):
            rows.append(table.matrix[idx])
    if not rows:
        return np.zeros(table.dim, dtype=np.float64)
    return np.mean(np.asarray(rows, dtype=np.float64), axis=0)


def nbow_features(texts, vocab, table) -> np.ndarray:
    return np.stack([nbow_sentence_vector(t, vocab, table) for t in texts])


def nbow_train_eval(
    bundle: DatasetBundle,
    vocab: Vocabulary,
    table: EmbeddingTable,
    spec: BaselineSpec = None,
) -> MetricsReport:
    """Logistic regression over averaged word vectors."""
    if spec is None:
        spec = default_nbow_spec()
    if not bundle.train:
        raise EmptyCorpusError(f"bundle {bundle.name!r} has no training examples")
    params = spec.hyperparameters
    clf = LogisticRegression(
        penalty="l2",
        C=params.get("c", 1.0),
        tol=params.get("tol", 1e-6),
        max_iter=params.get("max_iter", 1000),
        random_state=spec.seed,
    )
    clf.fit(
        nbow_features([e.text for e in bundle.train], vocab, table),
        [e.label for e in bundle.train],
    )
    test = bundle.test
    predictions = clf.predict(nbow_features([e.text for e in test], vocab, table))
    return score([int(p) for p in predictions], [e.label for e in test])


class CnnBaselineModel(nn.Module):
    """Convolutional branch followed directly by a 2-way linear head."""

    def __init__(self, table: EmbeddingTable, config: CnnConfig):
        super().__init__()
        self.branch = CnnBranch(table, config)
        self.head = nn.Linear(config.output_dim, 2)

    def forward(self, indices):
        return self.head(self.branch(indices))


class CnnLstmDnnModel(nn.Module):
    """Two stacked convolutions, two recurrent layers, feed-forward head.

    Convolutions are length-preserving (symmetric padding), so the
    recurrent stack sees one state per input position; classification
    reads the top-layer state at each sequence's last real token.
    """

    def __init__(self, table: EmbeddingTable, spec: BaselineSpec):
        super().__init__()
        params = spec.hyperparameters
        filters = params["conv_filters"]
        kernel = params["conv_kernel_size"]
        hidden = params["lstm_hidden"]
        dropout = params["dropout_rate"]
        embedding_dim = table.dim

        weights = torch.as_tensor(table.matrix, dtype=torch.float32)
        self.embedding = nn.Embedding.from_pretrained(weights, freeze=False, padding_idx=0)
        self.conv1 = nn.Conv1d(embedding_dim, filters, kernel, padding=kernel // 2)
        self.conv2 = nn.Conv1d(filters, filters, kernel, padding=kernel // 2)
        self.lstm = nn.LSTM(
            filters, hidden, num_layers=2, batch_first=True, dropout=dropout
        )
        self.dropout = nn.Dropout(dropout)
        layers = []
        width = hidden
        for size in params["dense_sizes"]:
            layers += [nn.Linear(width, size), nn.ReLU(), nn.Dropout(dropout)]
            width = size
        layers.append(nn.Linear(width, 2))
        self.head = nn.Sequential(*layers)

    def forward(self, indices, lengths):
        x = self.embedding(indices).transpose(1, 2)
        x = torch.relu(self.conv1(x))
        x = torch.relu(self.conv2(x))
        outputs, _ = self.lstm(x.transpose(1, 2))
        last = (lengths - 1).clamp(min=0)
        gathered = outputs[torch.arange(outputs.shape[0]), last]
        return self.head(self.dropout(gathered))


def _index_tensors(texts, vocab, max_words):
    rows = [encode_for_cnn(text, vocab, max_words) for text in texts]
    indices = torch.as_tensor(rows, dtype=torch.long)
    lengths = (indices != 0).sum(dim=1)
    return indices, lengths


def _fit_classifier(model, batches_fn, n_examples, config: TrainConfig):
    """Shared seeded loop: AdamW plus cross-entropy for a fixed epoch budget."""
    loss_fn = nn.CrossEntropyLoss()
    optimizer = torch.optim.AdamW(
        model.parameters(), lr=config.lr, weight_decay=config.weight_decay
    )
    rng = np.random.default_rng(config.seed)
    model.train()
    for epoch in range(config.max_epochs):
        order = rng.permutation(n_examples)
        for start in range(0, n_examples, config.batch_size):
            batch = order[start : start + config.batch_size]
            logits, labels = batches_fn(model, batch)
            loss = loss_fn(logits, labels)
            if not math.isfinite(loss.item()):
                raise DivergenceError(
                    "non-finite training loss", epoch=epoch, step=start // config.batch_size
                )
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
    model.eval()
    return model


def cnn_baseline_train_eval(
    bundle: DatasetBundle,
    vocab: Vocabulary,
    table: EmbeddingTable,
    cnn_config: CnnConfig = None,
    train_config: TrainConfig = None,
) -> MetricsReport:
    """Plain convolutional classifier: embed, convolve, pool, predict."""
    if train_config is None:
        train_config = TrainConfig()
    if cnn_config is None:
        cnn_config = CnnConfig(
            embedding_dim=table.dim,
            max_words=default_max_words(train_config.max_length),
        )
    if not bundle.train:
        raise EmptyCorpusError(f"bundle {bundle.name!r} has no training examples")

    seed_everything(train_config.seed)
    model = CnnBaselineModel(table, cnn_config)
    indices, _ = _index_tensors(
        [e.text for e in bundle.train], vocab, cnn_config.max_words
    )
    labels = torch.as_tensor([e.label for e in bundle.train], dtype=torch.long)

    def run(model, batch):
        rows = torch.as_tensor(batch, dtype=torch.long)
        return model(indices[rows]), labels[rows]

    _fit_classifier(model, run, len(bundle.train), train_config)

    test = bundle.test
    test_indices, _ = _index_tensors([e.text for e in test], vocab, cnn_config.max_words)
    with torch.no_grad():
        predictions = model(test_indices).argmax(dim=1).tolist()
    return score(predictions, [e.label for e in test])


def cnn_lstm_dnn_train_eval(
    bundle: DatasetBundle,
    vocab: Vocabulary,
    table: EmbeddingTable,
    spec: BaselineSpec = None,
    train_config: TrainConfig = None,
    max_words: int = None,
) -> MetricsReport:
    """Convolution-into-recurrence classifier."""
    if spec is None:
        spec = default_cnn_lstm_dnn_spec()
    if train_config is None:
        train_config = TrainConfig()
    if max_words is None:
        max_words = default_max_words(train_config.max_length)
    if not bundle.train:
        raise EmptyCorpusError(f"bundle {bundle.name!r} has no training examples")

    seed_everything(train_config.seed)
    model = CnnLstmDnnModel(table, spec)
    indices, lengths = _index_tensors([e.text for e in bundle.train], vocab, max_words)
    labels = torch.as_tensor([e.label for e in bundle.train], dtype=torch.long)

    def run(model, batch):
        rows = torch.as_tensor(batch, dtype=torch.long)
        return model(indices[rows], lengths[rows]), labels[rows]

    _fit_classifier(model, run, len(bundle.train), train_config)

    test = bundle.test
    test_indices, test_lengths = _index_tensors([e.text for e in test], vocab, max_words)
    with torch.no_grad():
        predictions = model(test_indices, test_lengths).argmax(dim=1).tolist()
    return score(predictions, [e.label for e in test])


def import_external_predictions(path, bundle: DatasetBundle) -> MetricsReport:
    """Score a prediction file (JSONL of {"id", "label"}) against the test split.

    Every test id must appear exactly once; missing, surplus, or duplicate
    ids are hard errors, as are labels outside {0, 1}.
    """
    predicted = {}
    for line_number, record in enumerate(read_jsonl(path), start=1):
        if "id" not in record or "label" not in record:
            raise ParseError("prediction records need id and label", line_number=line_number)
        example_id = record["id"]
        if example_id in predicted:
            raise ParseError(f"duplicate id {example_id!r}", line_number=line_number)
        label = record["label"]
        if label not in (0, 1):
            raise LabelError(f"label must be 0 or 1, got {label!r} for id {example_id!r}")
        predicted[example_id] = label

    test = bundle.test
    gold_ids = [e.id for e in test]
    missing = sorted(set(gold_ids) - set(predicted))
    surplus = sorted(set(predicted) - set(gold_ids))
    if missing or surplus:
        raise CoverageError(
            f"prediction file does not cover the test split of {bundle.name!r}",
            missing=missing,
            surplus=surplus,
        )
    return score([predicted[i] for i in gold_ids], [e.label for e in test])
