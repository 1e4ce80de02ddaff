"""Run the reference baselines and render a model-comparison table."""

import tempfile
from pathlib import Path

from sarcfuse.baselines import (
    cnn_baseline_train_eval,
    default_nbow_spec,
    nbow_train_eval,
)
from sarcfuse.evalkit import render_results_table, score
from sarcfuse.fusion import TrainConfig
from sarcfuse.lexical import build_vocabulary, load_embeddings
from sarcfuse.testing import BASE_WORDS, make_fixture_bundle, write_vector_file

work = Path(tempfile.mkdtemp(prefix="sarcfuse-demo-"))
bundle = make_fixture_bundle(n_train=48, n_test=16, seed=0)

# Pretrained vectors may cover evaluation text too; they carry no labels.
vocab = build_vocabulary(bundle.train + bundle.test)
vectors = write_vector_file(work / "vectors.txt", BASE_WORDS, dim=12, seed=7)
table = load_embeddings(vocab, vectors, dim=12, seed=0)

# Averaged-word-vector logistic regression: the floor any model must beat.
nbow = nbow_train_eval(bundle, vocab, table, default_nbow_spec(seed=0))
print(f"NBOW  accuracy {nbow.accuracy:.3f}  macro F1 {nbow.f1_macro:.3f}")

# Convolutional baseline over the same embedding table.
cnn = cnn_baseline_train_eval(
    bundle, vocab, table,
    train_config=TrainConfig(max_length=12, max_epochs=10, lr=5e-3, batch_size=8,
                             seed=0, val_fraction=0.0),
)
print(f"CNN   accuracy {cnn.accuracy:.3f}  macro F1 {cnn.f1_macro:.3f}")

# Metrics come from plain confusion counts; per-class rows included.
for label, m in nbow.per_class.items():
    print(f"NBOW class {label}: precision {m.precision:.3f} recall {m.recall:.3f} f1 {m.f1:.3f}")

# Collect runs into one table; the best macro F1 per dataset is starred.
tbl = render_results_table({
    ("fixture", "nbow"): nbow,
    ("fixture", "cnn"): cnn,
    ("fixture", "majority"): score([1] * 16, [e.label for e in bundle.test]),
})
print()
print(tbl.to_text())
print()
print(tbl.to_csv())
