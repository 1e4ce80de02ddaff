"""Branch fusion and the end-to-end sarcasm classifier.

Each branch output goes through its own fully connected projection
(affine + ReLU) into a common dimension p; the five projected vectors are
concatenated in the fixed order [sarcasm CLS, emotion CLS, sentiment CLS,
label distributions, CNN] and classified by a small head with softmax.
Gradients reach the sarcasm encoder, the CNN branch, the projections and
the head; the two affective extractors only ever supply constant features.
"""

import json
import math
import shutil
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .cnn_branch import CnnBranch, CnnConfig
from .errors import DivergenceError, EmptyCorpusError, CheckpointError, SarcfuseError, ShapeError
from .extractors import EmotionExtractor, SentimentExtractor, assert_frozen, extract_batched
from .evalkit import score
from .lexical import EmbeddingTable, Vocabulary, encode_for_cnn
from .sarc_encoder import SarcasmEncoder
from .utils import seed_everything, write_json

LABEL_SCORE_DIM = 28 + 2  # concatenated emotion + sentiment label scores
BRANCH_ORDER = ("sarc", "emo_cls", "sent_cls", "labels", "cnn")


@dataclass
class FusionConfig:
    projection_dim: int = 128
    head_hidden_dim: int = 256
    dropout_rate: float = 0.2
    activation: str = "relu"

    def __post_init__(self):
        if self.projection_dim < 1:
            raise ValueError("projection_dim must be >= 1")
        if self.activation != "relu":
            raise ValueError(f"unsupported activation {self.activation!r}")


@dataclass
class TrainConfig:
    """Fine-tuning hyperparameters plus the knobs the defaults pin down."""

    max_length: int = 18
    max_epochs: int = 12
    lr: float = 1e-5
    batch_size: int = 8
    seed: int = 0
    weight_decay: float = 0.01
    val_fraction: float = 0.1
    class_weighting: bool = False

    def __post_init__(self):
        if self.max_length < 2:
            raise ValueError("max_length must be >= 2")
        if not 0 <= self.val_fraction < 1:
            raise ValueError("val_fraction must be in [0, 1)")


# Best-performing fine-tuning settings per benchmark dataset.
TUNED_DEFAULTS = {
    "sarc_movies": {"max_length": 18, "max_epochs": 12, "lr": 1e-5, "batch_size": 8},
    "sarc_technology": {"max_length": 14, "max_epochs": 30, "lr": 1e-5, "batch_size": 4},
    "iac_v2": {"max_length": 16, "max_epochs": 20, "lr": 1e-5, "batch_size": 32},
    "twitter": {"max_length": 16, "max_epochs": 20, "lr": 1e-5, "batch_size": 32},
}


def default_train_config(dataset: str, **overrides) -> TrainConfig:
    if dataset not in TUNED_DEFAULTS:
        raise ValueError(f"unknown dataset {dataset!r}")
    params = dict(TUNED_DEFAULTS[dataset])
    params.update(overrides)
    return TrainConfig(**params)


def default_max_words(max_length: int) -> int:
    """CNN word budget: twice the transformer subword budget."""
    return 2 * max_length


@dataclass
class FusedRepresentation:
    v_l: np.ndarray
    u_l: np.ndarray
    s_l: np.ndarray
    d_l: np.ndarray
    c_l: np.ndarray
    z: np.ndarray


@dataclass
class Prediction:
    probs: np.ndarray  # [p(non-sarcastic), p(sarcastic)]
    predicted_label: int


class BranchProjection(nn.Module):
    """Affine map + ReLU with a named input dimension check."""

    def __init__(self, name, in_dim, out_dim):
        super().__init__()
        self.name = name
        self.in_dim = in_dim
        self.linear = nn.Linear(in_dim, out_dim)

    def forward(self, x):
        if x.shape[-1] != self.in_dim:
            raise ShapeError(
                f"{self.name}: expected input dimension {self.in_dim}, got {x.shape[-1]}"
            )
        return torch.relu(self.linear(x))


class FusionNet(nn.Module):
    """Five branch projections plus the classification head."""

    def __init__(self, branch_dims: dict, config: FusionConfig):
        super().__init__()
        self.config = config
        self.branch_dims = dict(branch_dims)
        p = config.projection_dim
        self.projections = nn.ModuleDict(
            {
                "sarc": BranchProjection("sarc", branch_dims["sarc"], p),
                "emo_cls": BranchProjection("emo_cls", branch_dims["emo_cls"], p),
                "sent_cls": BranchProjection("sent_cls", branch_dims["sent_cls"], p),
                "labels": BranchProjection("labels", LABEL_SCORE_DIM, p),
                "cnn": BranchProjection("cnn", branch_dims["cnn"], p),
            }
        )
        self.head = nn.Sequential(
            nn.Linear(5 * p, config.head_hidden_dim),
            nn.ReLU(),
            nn.Dropout(config.dropout_rate),
            nn.Linear(config.head_hidden_dim, 2),
        )

    def project_branch(self, vector, which):
        if which not in ("sarc", "emo_cls", "sent_cls", "cnn"):
            raise ValueError(f"unknown branch {which!r}")
        return self.projections[which](vector)

    def project_label_distributions(self, el, sl):
        if el.shape[-1] != 28:
            raise ShapeError(f"labels: emotion scores must have 28 components, got {el.shape[-1]}")
        if sl.shape[-1] != 2:
            raise ShapeError(f"labels: sentiment scores must have 2 components, got {sl.shape[-1]}")
        return self.projections["labels"](torch.cat([el, sl], dim=-1))

    def fuse(self, v_cls, u_cls, s_cls, el, sl, c):
        v_l = self.project_branch(v_cls, "sarc")
        u_l = self.project_branch(u_cls, "emo_cls")
        s_l = self.project_branch(s_cls, "sent_cls")
        d_l = self.project_label_distributions(el, sl)
        c_l = self.project_branch(c, "cnn")
        z = torch.cat([v_l, u_l, s_l, d_l, c_l], dim=-1)
        return (v_l, u_l, s_l, d_l, c_l), z

    def forward(self, v_cls, u_cls, s_cls, el, sl, c):
        _, z = self.fuse(v_cls, u_cls, s_cls, el, sl, c)
        return self.head(z)


class FusedSarcasmModel(nn.Module):
    """The trainable stack: sarcasm encoder, CNN branch, fusion net.

    The frozen extractors are deliberately not submodules; their features
    arrive as constant tensors, so no optimizer can ever touch them.
    """

    def __init__(self, sarc_encoder: SarcasmEncoder, cnn: CnnBranch, fusion: FusionNet):
        super().__init__()
        self.sarc_encoder = sarc_encoder
        self.cnn = cnn
        self.fusion = fusion

    def forward(self, sarc_ids, sarc_mask, cnn_indices, u_cls, s_cls, el, sl):
        v_cls = self.sarc_encoder(sarc_ids, sarc_mask)
        c = self.cnn(cnn_indices)
        return self.fusion(v_cls, u_cls, s_cls, el, sl, c)


class SarcasmPipeline:
    """Everything needed to classify raw text with a trained fused model."""

    def __init__(
        self,
        model: FusedSarcasmModel,
        emotion: EmotionExtractor,
        sentiment: SentimentExtractor,
        vocab: Vocabulary,
        max_length: int,
        cache=None,
    ):
        self.model = model
        self.emotion = emotion
        self.sentiment = sentiment
        self.vocab = vocab
        self.max_length = max_length
        self.cache = cache

    def _prepare(self, texts):
        enc = self.model.sarc_encoder.tokenize(texts, self.max_length)
        cnn_indices = torch.tensor(
            [encode_for_cnn(t, self.vocab, self.model.cnn.config.max_words) for t in texts],
            dtype=torch.long,
        )
        u_cls, el = extract_batched(self.emotion, texts, self.max_length, cache=self.cache)
        s_cls, sl = extract_batched(self.sentiment, texts, self.max_length, cache=self.cache)
        return {
            "sarc_ids": enc["input_ids"],
            "sarc_mask": enc["attention_mask"],
            "cnn_indices": cnn_indices,
            "u_cls": torch.from_numpy(u_cls),
            "s_cls": torch.from_numpy(s_cls),
            "el": torch.from_numpy(el),
            "sl": torch.from_numpy(sl),
        }

    def fused_forward(self, text: str):
        """Run all four branches on one text -> (FusedRepresentation, Prediction)."""
        if not text.strip():
            raise SarcfuseError("cannot classify empty text")
        self.model.eval()
        batch = self._prepare([text])
        with torch.no_grad():
            v_cls = self.model.sarc_encoder(batch["sarc_ids"], batch["sarc_mask"])
            c = self.model.cnn(batch["cnn_indices"])
            (v_l, u_l, s_l, d_l, c_l), z = self.model.fusion.fuse(
                v_cls, batch["u_cls"], batch["s_cls"], batch["el"], batch["sl"], c
            )
            logits = self.model.fusion.head(z)
            probs = torch.softmax(logits, dim=-1)
        rep = FusedRepresentation(
            v_l=v_l[0].numpy(),
            u_l=u_l[0].numpy(),
            s_l=s_l[0].numpy(),
            d_l=d_l[0].numpy(),
            c_l=c_l[0].numpy(),
            z=z[0].numpy(),
        )
        p = probs[0].numpy()
        return rep, Prediction(probs=p, predicted_label=int(p.argmax()))

    def predict(self, texts, batch_size: int = 32) -> list[Prediction]:
        """Deterministic, order-preserving batch prediction."""
        self.model.eval()
        predictions = []
        for start in range(0, len(texts), batch_size):
            chunk = list(texts[start : start + batch_size])
            batch = self._prepare(chunk)
            with torch.no_grad():
                logits = self.model(**batch)
                probs = torch.softmax(logits, dim=-1).numpy()
            for row in probs:
                predictions.append(Prediction(probs=row, predicted_label=int(row.argmax())))
        return predictions

    def predicted_labels(self, texts, batch_size: int = 32) -> list[int]:
        return [p.predicted_label for p in self.predict(texts, batch_size=batch_size)]

    def save(self, checkpoint_dir):
        """Atomic checkpoint write (assemble in a temp dir, then rename)."""
        checkpoint_dir = Path(checkpoint_dir)
        tmp = checkpoint_dir.with_name(checkpoint_dir.name + ".writing")
        if tmp.exists():
            shutil.rmtree(tmp)
        tmp.mkdir(parents=True)

        self.model.sarc_encoder.model.save_pretrained(tmp / "sarc_encoder")
        self.model.sarc_encoder.tokenizer.save_pretrained(tmp / "sarc_encoder")
        (tmp / "cnn").mkdir()
        torch.save(
            {"state_dict": self.model.cnn.state_dict(), "config": asdict(self.model.cnn.config)},
            tmp / "cnn" / "cnn.pt",
        )
        self.vocab.save(tmp / "cnn" / "vocab.txt")
        (tmp / "fusion").mkdir()
        torch.save(
            {
                "state_dict": self.model.fusion.state_dict(),
                "config": asdict(self.model.fusion.config),
                "branch_dims": self.model.fusion.branch_dims,
            },
            tmp / "fusion" / "fusion.pt",
        )
        write_json(
            tmp / "config.snapshot",
            {
                "max_length": self.max_length,
                "emotion_model": self.emotion.model_id,
                "sentiment_model": self.sentiment.model_id,
            },
        )
        if checkpoint_dir.exists():
            shutil.rmtree(checkpoint_dir)
        tmp.rename(checkpoint_dir)
        return checkpoint_dir


def load_pipeline(checkpoint_dir, emotion=None, sentiment=None, cache=None) -> SarcasmPipeline:
    """Rebuild a SarcasmPipeline from a saved checkpoint directory.

    Extractors are reloaded from the ids recorded in the snapshot unless
    already-loaded instances are passed in.
    """
    checkpoint_dir = Path(checkpoint_dir)
    snapshot_path = checkpoint_dir / "config.snapshot"
    if not snapshot_path.exists():
        raise CheckpointError(f"{checkpoint_dir} has no config.snapshot")
    snapshot = json.loads(snapshot_path.read_text())

    sarc = SarcasmEncoder(checkpoint_dir / "sarc_encoder")
    cnn_blob = torch.load(checkpoint_dir / "cnn" / "cnn.pt", weights_only=True)
    cnn_config = CnnConfig(**cnn_blob["config"])
    vocab = Vocabulary.load(checkpoint_dir / "cnn" / "vocab.txt")
    table = EmbeddingTable(
        matrix=np.zeros((len(vocab), cnn_config.embedding_dim), dtype=np.float32),
        provenance=["pad_zero"] * len(vocab),
    )
    cnn = CnnBranch(table, cnn_config)
    cnn.load_state_dict(cnn_blob["state_dict"])

    fusion_blob = torch.load(checkpoint_dir / "fusion" / "fusion.pt", weights_only=True)
    fusion = FusionNet(fusion_blob["branch_dims"], FusionConfig(**fusion_blob["config"]))
    fusion.load_state_dict(fusion_blob["state_dict"])

    emotion = emotion or EmotionExtractor(snapshot["emotion_model"])
    sentiment = sentiment or SentimentExtractor(snapshot["sentiment_model"])
    for extractor, branch in ((emotion, "emo_cls"), (sentiment, "sent_cls")):
        if extractor.hidden_size != fusion.branch_dims[branch]:
            raise CheckpointError(
                f"{branch} extractor hidden size {extractor.hidden_size} "
                f"does not match checkpoint ({fusion.branch_dims[branch]})"
            )

    model = FusedSarcasmModel(sarc, cnn, fusion)
    model.eval()
    return SarcasmPipeline(model, emotion, sentiment, vocab, snapshot["max_length"], cache=cache)


@dataclass
class TrainResult:
    checkpoint_dir: Path
    history: list
    best_epoch: int
    pipeline: SarcasmPipeline = field(repr=False)


def _epoch_metrics(model, tensors, indices, batch_size):
    """Macro F1 of the current model over the given example indices."""
    model.eval()
    predictions = []
    gold = []
    with torch.no_grad():
        for start in range(0, len(indices), batch_size):
            batch_idx = indices[start : start + batch_size]
            logits = model(
                tensors["sarc_ids"][batch_idx],
                tensors["sarc_mask"][batch_idx],
                tensors["cnn_indices"][batch_idx],
                tensors["u_cls"][batch_idx],
                tensors["s_cls"][batch_idx],
                tensors["el"][batch_idx],
                tensors["sl"][batch_idx],
            )
            predictions.extend(logits.argmax(dim=-1).tolist())
            gold.extend(tensors["labels"][batch_idx].tolist())
    model.train()
    return score(predictions, gold).f1_macro


def train_fused(
    bundle,
    sarc_checkpoint,
    emotion: EmotionExtractor,
    sentiment: SentimentExtractor,
    embedding_table: EmbeddingTable,
    vocab: Vocabulary,
    train_config: TrainConfig,
    fusion_config: FusionConfig,
    cnn_config: CnnConfig,
    out_dir,
    cache=None,
) -> TrainResult:
    """Fine-tune the fused model on a bundle's train split.

    The last `val_fraction` of a seeded shuffle of the train split is held
    out for best-epoch selection by macro F1; the test split is never read.
    Cross-entropy loss, AdamW, per-epoch reshuffling; reproducible given
    the seed. Writes the best checkpoint plus `history.jsonl` to out_dir.
    """
    examples = bundle.train
    if not examples:
        raise EmptyCorpusError(f"{bundle.name}: train split is empty")
    for extractor, label in ((emotion, "emotion"), (sentiment, "sentiment")):
        if not assert_frozen(extractor):
            raise SarcfuseError(f"{label} extractor must be frozen before fused training")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seed_everything(train_config.seed)

    sarc = SarcasmEncoder(sarc_checkpoint)
    cnn = CnnBranch(embedding_table, cnn_config)
    fusion = FusionNet(
        {
            "sarc": sarc.hidden_size,
            "emo_cls": emotion.hidden_size,
            "sent_cls": sentiment.hidden_size,
            "cnn": cnn.output_dim,
        },
        fusion_config,
    )
    model = FusedSarcasmModel(sarc, cnn, fusion)

    texts = [e.text for e in examples]
    enc = sarc.tokenize(texts, train_config.max_length)
    u_cls, el = extract_batched(emotion, texts, train_config.max_length, cache=cache)
    s_cls, sl = extract_batched(sentiment, texts, train_config.max_length, cache=cache)
    tensors = {
        "sarc_ids": enc["input_ids"],
        "sarc_mask": enc["attention_mask"],
        "cnn_indices": torch.tensor(
            [encode_for_cnn(t, vocab, cnn_config.max_words) for t in texts], dtype=torch.long
        ),
        "u_cls": torch.from_numpy(u_cls),
        "s_cls": torch.from_numpy(s_cls),
        "el": torch.from_numpy(el),
        "sl": torch.from_numpy(sl),
        "labels": torch.tensor([e.label for e in examples], dtype=torch.long),
    }

    rng = np.random.default_rng(train_config.seed)
    split_order = rng.permutation(len(examples))
    n_val = int(len(examples) * train_config.val_fraction)
    val_indices = torch.from_numpy(split_order[len(examples) - n_val :].copy()) if n_val else None
    fit_indices = split_order[: len(examples) - n_val]

    weights = None
    if train_config.class_weighting:
        counts = np.bincount(tensors["labels"].numpy(), minlength=2)
        weights = torch.tensor(len(examples) / (2.0 * np.maximum(counts, 1)), dtype=torch.float32)
    loss_fn = nn.CrossEntropyLoss(weight=weights)
    optimizer = torch.optim.AdamW(
        model.parameters(), lr=train_config.lr, weight_decay=train_config.weight_decay
    )

    history = []
    best_score = -math.inf
    best_epoch = -1
    best_state = None
    model.train()
    step = 0
    for epoch in range(train_config.max_epochs):
        epoch_order = rng.permutation(fit_indices)
        losses = []
        for start in range(0, len(epoch_order), train_config.batch_size):
            batch_idx = torch.from_numpy(epoch_order[start : start + train_config.batch_size].copy())
            logits = model(
                tensors["sarc_ids"][batch_idx],
                tensors["sarc_mask"][batch_idx],
                tensors["cnn_indices"][batch_idx],
                tensors["u_cls"][batch_idx],
                tensors["s_cls"][batch_idx],
                tensors["el"][batch_idx],
                tensors["sl"][batch_idx],
            )
            loss = loss_fn(logits, tensors["labels"][batch_idx])
            if not math.isfinite(loss.item()):
                raise DivergenceError(
                    f"training loss became {loss.item()} at epoch {epoch} step {step}",
                    epoch=epoch,
                    step=step,
                )
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            losses.append(loss.item())
            step += 1

        train_loss = sum(losses) / len(losses)
        val_f1 = (
            _epoch_metrics(model, tensors, val_indices, train_config.batch_size)
            if val_indices is not None
            else None
        )
        history.append({"epoch": epoch, "train_loss": train_loss, "val_f1_macro": val_f1})
        # Without a held-out slice, fall back to lowest train loss.
        selection_score = val_f1 if val_f1 is not None else -train_loss
        if selection_score > best_score:
            best_score = selection_score
            best_epoch = epoch
            best_state = {
                k: v.detach().clone() for k, v in model.state_dict().items()
            }

    if best_state is not None:
        model.load_state_dict(best_state)
    model.eval()

    with open(out_dir / "history.jsonl", "w", encoding="utf-8") as f:
        for row in history:
            f.write(json.dumps(row) + "\n")

    pipeline = SarcasmPipeline(
        model, emotion, sentiment, vocab, train_config.max_length, cache=cache
    )
    checkpoint_dir = pipeline.save(out_dir / "checkpoint")
    return TrainResult(
        checkpoint_dir=checkpoint_dir, history=history, best_epoch=best_epoch, pipeline=pipeline
    )
