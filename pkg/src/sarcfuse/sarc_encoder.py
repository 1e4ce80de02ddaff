"""Trainable sarcasm encoder.

Domain-adaptive pre-training continues a RoBERTa-class checkpoint with
the masked-LM objective over the merged train splits, then the encoder's
CLS vector feeds the fused classifier. Unlike the affective extractors,
this encoder keeps receiving gradients during fused fine-tuning.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import torch
import transformers
from transformers import AutoModel, AutoModelForMaskedLM, AutoTokenizer

from .errors import CheckpointError, EmptyCorpusError
from .utils import seed_everything, write_json

transformers.logging.set_verbosity_error()
transformers.logging.disable_progress_bar()

DEFAULT_BASE_MODEL = "roberta-base"
IGNORE_INDEX = -100


@dataclass
class MlmConfig:
    mask_probability: float = 0.15
    epochs: int = 3
    learning_rate: float = 5e-5
    batch_size: int = 16
    seed: int = 0
    max_length: int = 128

    def __post_init__(self):
        if not 0 < self.mask_probability < 1:
            raise ValueError("mask_probability must be in (0, 1)")
        for name in ("epochs", "learning_rate", "batch_size", "max_length"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class SarcFeatures:
    v_cls: torch.Tensor = field(repr=False)


def mask_tokens(
    input_ids: torch.Tensor,
    special_tokens_mask: torch.Tensor,
    mask_probability: float,
    mask_token_id: int,
    vocab_size: int,
    generator: torch.Generator,
):
    """Dynamic masking for the MLM objective.

    Selects `mask_probability` of the non-special positions as prediction
    targets; of those, 80% become the mask token, 10% a random token and
    10% stay unchanged. Returns (masked_inputs, labels) where unselected
    label positions hold IGNORE_INDEX. Selection is generator-deterministic.
    """
    inputs = input_ids.clone()
    labels = input_ids.clone()
    special = special_tokens_mask.bool()

    probabilities = torch.full(labels.shape, mask_probability)
    probabilities.masked_fill_(special, 0.0)
    selected = torch.bernoulli(probabilities, generator=generator).bool()
    labels[~selected] = IGNORE_INDEX

    replace_draw = torch.rand(labels.shape, generator=generator)
    masked = selected & (replace_draw < 0.8)
    randomized = selected & (replace_draw >= 0.8) & (replace_draw < 0.9)

    inputs[masked] = mask_token_id
    random_tokens = torch.randint(
        vocab_size, labels.shape, dtype=inputs.dtype, generator=generator
    )
    inputs[randomized] = random_tokens[randomized]
    return inputs, labels


@dataclass
class MlmResult:
    checkpoint_dir: Path
    epoch_losses: list


def mlm_pretrain(texts, base_checkpoint, out_dir, config: MlmConfig) -> MlmResult:
    """Continue masked-LM training of `base_checkpoint` on raw texts.

    Writes the adapted checkpoint (weights + tokenizer + config snapshot)
    and a per-step loss log to `out_dir`; returns it with the mean loss of
    each epoch.
    """
    texts = list(texts)
    if not texts:
        raise EmptyCorpusError("masked-LM pre-training needs a non-empty corpus")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    seed_everything(config.seed)
    try:
        tokenizer = AutoTokenizer.from_pretrained(base_checkpoint)
        model = AutoModelForMaskedLM.from_pretrained(base_checkpoint)
    except Exception as exc:
        raise CheckpointError(f"cannot load base encoder {base_checkpoint}: {exc}") from exc
    model.train()

    enc = tokenizer(
        texts,
        padding="max_length",
        truncation=True,
        max_length=config.max_length,
        return_tensors="pt",
        return_special_tokens_mask=True,
    )
    # Padding counts as special, so PAD positions are never selected.
    input_ids = enc["input_ids"]
    attention_mask = enc["attention_mask"]
    special_mask = enc["special_tokens_mask"]

    optimizer = torch.optim.AdamW(model.parameters(), lr=config.learning_rate)
    generator = torch.Generator().manual_seed(config.seed)
    shuffle_rng = torch.Generator().manual_seed(config.seed)

    epoch_losses = []
    step = 0
    with open(out_dir / "loss_log.jsonl", "w", encoding="utf-8") as log:
        for epoch in range(config.epochs):
            order = torch.randperm(len(texts), generator=shuffle_rng)
            losses = []
            for start in range(0, len(texts), config.batch_size):
                batch = order[start : start + config.batch_size]
                masked, labels = mask_tokens(
                    input_ids[batch],
                    special_mask[batch],
                    config.mask_probability,
                    tokenizer.mask_token_id,
                    len(tokenizer),
                    generator,
                )
                out = model(
                    input_ids=masked,
                    attention_mask=attention_mask[batch],
                    labels=labels,
                )
                optimizer.zero_grad()
                out.loss.backward()
                optimizer.step()
                loss = out.loss.item()
                losses.append(loss)
                log.write(json.dumps({"step": step, "loss": loss}) + "\n")
                step += 1
            epoch_losses.append(sum(losses) / len(losses))

    model.eval()
    model.save_pretrained(out_dir)
    tokenizer.save_pretrained(out_dir)
    write_json(
        out_dir / "pretrain_snapshot.json",
        {
            "base_checkpoint": str(base_checkpoint),
            "num_texts": len(texts),
            "config": {
                "mask_probability": config.mask_probability,
                "epochs": config.epochs,
                "learning_rate": config.learning_rate,
                "batch_size": config.batch_size,
                "seed": config.seed,
                "max_length": config.max_length,
            },
            "epoch_losses": epoch_losses,
        },
    )
    return MlmResult(checkpoint_dir=out_dir, epoch_losses=epoch_losses)


class SarcasmEncoder(torch.nn.Module):
    """Transformer encoder whose CLS vector represents the input text."""

    def __init__(self, checkpoint):
        super().__init__()
        self.checkpoint = str(checkpoint)
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(checkpoint)
            self.model = AutoModel.from_pretrained(checkpoint, add_pooling_layer=False)
        except Exception as exc:
            raise CheckpointError(f"cannot load sarcasm encoder {checkpoint}: {exc}") from exc

    @property
    def hidden_size(self):
        return self.model.config.hidden_size

    def tokenize(self, texts, max_length):
        return self.tokenizer(
            list(texts),
            padding="max_length",
            truncation=True,
            max_length=max_length,
            return_tensors="pt",
        )

    def forward(self, input_ids, attention_mask) -> torch.Tensor:
        """CLS vector of the last hidden state, with gradient flow."""
        out = self.model(input_ids=input_ids, attention_mask=attention_mask)
        return out.last_hidden_state[:, 0, :]

    def encode(self, texts, max_length) -> SarcFeatures:
        enc = self.tokenize(texts, max_length)
        return SarcFeatures(v_cls=self(enc["input_ids"], enc["attention_mask"]))


def encode_sarcasm(encoder: SarcasmEncoder, texts, max_length) -> SarcFeatures:
    return encoder.encode(texts, max_length)
