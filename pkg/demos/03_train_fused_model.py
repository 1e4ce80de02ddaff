"""Train the four-branch fused classifier end to end on synthetic data.

Uses miniature stand-in checkpoints so the whole script runs offline in
seconds; swap in real checkpoints and a real corpus for actual use.
"""

import tempfile
from pathlib import Path

from sarcfuse.cnn_branch import CnnConfig
from sarcfuse.extractors import EmotionExtractor, SentimentExtractor
from sarcfuse.fusion import FusionConfig, TrainConfig, load_pipeline, train_fused
from sarcfuse.lexical import build_vocabulary, load_embeddings
from sarcfuse.sarc_encoder import MlmConfig, mlm_pretrain
from sarcfuse.testing import (
    BASE_WORDS,
    make_fixture_bundle,
    make_tiny_emotion_model,
    make_tiny_sarcasm_base,
    make_tiny_sentiment_model,
    write_vector_file,
)

work = Path(tempfile.mkdtemp(prefix="sarcfuse-demo-"))

# Stand-in assets: a small masked-LM base plus frozen emotion (28 labels)
# and sentiment (2 labels) classifiers, all with real tokenizer files.
base = make_tiny_sarcasm_base(work / "base")
emotion = EmotionExtractor(make_tiny_emotion_model(work / "emotion"))
sentiment = SentimentExtractor(make_tiny_sentiment_model(work / "sentiment"))
vectors = write_vector_file(work / "vectors.txt", BASE_WORDS, dim=12, seed=7)

bundle = make_fixture_bundle(n_train=32, n_test=8, seed=0)

# Optional first stage: adapt the base encoder to the corpus with masked
# language modeling before any supervised training.
mlm = mlm_pretrain(
    [e.text for e in bundle.train],
    base,
    work / "mlm",
    MlmConfig(epochs=2, batch_size=8, max_length=16, learning_rate=5e-4, seed=0),
)
print("MLM epoch losses:", [round(x, 3) for x in mlm.epoch_losses])

# Supervised stage: the adapted encoder, both frozen extractors and the
# convolutional word branch feed one fusion classifier.
vocab = build_vocabulary(bundle.train)
table = load_embeddings(vocab, vectors, dim=12, seed=0)
result = train_fused(
    bundle,
    mlm.checkpoint_dir,
    emotion,
    sentiment,
    table,
    vocab,
    TrainConfig(max_length=12, max_epochs=8, lr=1e-3, batch_size=8, seed=0,
                val_fraction=0.25),
    FusionConfig(projection_dim=16, head_hidden_dim=32),
    CnnConfig(filter_sizes=(2, 3), filters_per_size=8, embedding_dim=12, max_words=24),
    work / "fused",
)
print("best epoch:", result.best_epoch)
print("last history row:", result.history[-1])

# The pipeline classifies raw text and exposes each branch of the fused
# representation for inspection.
rep, pred = result.pipeline.fused_forward("oh sure, the plot twist was so original")
print("probs:", [round(float(p), 3) for p in pred.probs], "-> label", pred.predicted_label)
print("fused z dim:", rep.z.shape[-1])

# Checkpoints reload into an identical pipeline.
reloaded = load_pipeline(result.checkpoint_dir, emotion=emotion, sentiment=sentiment)
texts = [e.text for e in bundle.train[:4]]
print("reloaded agrees:", reloaded.predicted_labels(texts) == result.pipeline.predicted_labels(texts))
