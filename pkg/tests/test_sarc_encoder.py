"""Masked-LM adaptation and the trainable sarcasm encoder."""

import json

import pytest
import torch

from sarcfuse.sarc_encoder import (
    IGNORE_INDEX,
    MlmConfig,
    SarcasmEncoder,
    encode_sarcasm,
    mask_tokens,
    mlm_pretrain,
)
from sarcfuse.testing import random_texts

MASK_ID = 4
VOCAB = 40


def _batch(n_rows=64, n_cols=40, seed=0):
    g = torch.Generator().manual_seed(seed)
    ids = torch.randint(5, VOCAB, (n_rows, n_cols), generator=g)
    special = torch.zeros_like(ids)
    special[:, 0] = 1
    special[:, -1] = 1
    return ids, special


class TestMaskTokens:
    def test_rate_close_to_configured(self):
        ids, special = _batch(n_rows=300, n_cols=40)
        g = torch.Generator().manual_seed(1)
        _, labels = mask_tokens(ids, special, 0.15, MASK_ID, VOCAB, g)
        eligible = (special == 0).sum().item()
        assert eligible >= 10_000
        rate = (labels != IGNORE_INDEX).sum().item() / eligible
        assert abs(rate - 0.15) < 0.02

    def test_specials_never_selected(self):
        ids, special = _batch()
        g = torch.Generator().manual_seed(2)
        inputs, labels = mask_tokens(ids, special, 0.9, MASK_ID, VOCAB, g)
        assert (labels[special.bool()] == IGNORE_INDEX).all()
        assert torch.equal(inputs[special.bool()], ids[special.bool()])

    def test_unselected_positions_untouched(self):
        ids, special = _batch()
        g = torch.Generator().manual_seed(3)
        inputs, labels = mask_tokens(ids, special, 0.15, MASK_ID, VOCAB, g)
        untouched = labels == IGNORE_INDEX
        assert torch.equal(inputs[untouched], ids[untouched])

    def test_selected_positions_keep_gold_label(self):
        ids, special = _batch()
        g = torch.Generator().manual_seed(4)
        _, labels = mask_tokens(ids, special, 0.3, MASK_ID, VOCAB, g)
        chosen = labels != IGNORE_INDEX
        assert torch.equal(labels[chosen], ids[chosen])

    def test_replacement_split_roughly_80_10_10(self):
        ids, special = _batch(n_rows=500, n_cols=40)
        g = torch.Generator().manual_seed(5)
        inputs, labels = mask_tokens(ids, special, 0.5, MASK_ID, VOCAB, g)
        chosen = labels != IGNORE_INDEX
        n = chosen.sum().item()
        masked = (inputs[chosen] == MASK_ID).sum().item()
        unchanged = (inputs[chosen] == ids[chosen]).sum().item()
        assert abs(masked / n - 0.8) < 0.03
        # "Unchanged" includes the random draws that happen to redraw the
        # original token, so give it a little extra slack.
        assert abs(unchanged / n - 0.1) < 0.04

    def test_generator_determinism(self):
        ids, special = _batch()
        a = mask_tokens(ids, special, 0.2, MASK_ID, VOCAB, torch.Generator().manual_seed(9))
        b = mask_tokens(ids, special, 0.2, MASK_ID, VOCAB, torch.Generator().manual_seed(9))
        assert torch.equal(a[0], b[0]) and torch.equal(a[1], b[1])


class TestMlmConfig:
    def test_rejects_bad_probability(self):
        with pytest.raises(ValueError):
            MlmConfig(mask_probability=0.0)
        with pytest.raises(ValueError):
            MlmConfig(mask_probability=1.5)


@pytest.fixture(scope="module")
def mlm_run(asset_dir, tmp_path_factory):
    texts = random_texts(64, seed=11, min_words=4, max_words=10)
    out = tmp_path_factory.mktemp("mlm")
    config = MlmConfig(epochs=3, batch_size=8, max_length=16, learning_rate=5e-4, seed=0)
    result = mlm_pretrain(texts, asset_dir["sarc_base"], out / "ckpt", config)
    return result, out


class TestMlmPretrain:
    def test_loss_decreases(self, mlm_run):
        result, _ = mlm_run
        assert len(result.epoch_losses) == 3
        assert result.epoch_losses[-1] < result.epoch_losses[0]

    def test_loss_log_one_line_per_step(self, mlm_run):
        result, _ = mlm_run
        lines = (result.checkpoint_dir / "loss_log.jsonl").read_text().splitlines()
        records = [json.loads(l) for l in lines]
        # 64 texts, batch 8, 3 epochs -> 24 steps.
        assert len(records) == 24
        assert [r["step"] for r in records] == list(range(24))
        assert all("loss" in r for r in records)

    def test_snapshot_written(self, mlm_run):
        result, _ = mlm_run
        snapshot = json.loads((result.checkpoint_dir / "pretrain_snapshot.json").read_text())
        assert snapshot["config"]["epochs"] == 3
        assert snapshot["num_texts"] == 64
        assert snapshot["epoch_losses"] == result.epoch_losses

    def test_checkpoint_loads_as_encoder(self, mlm_run):
        result, _ = mlm_run
        encoder = SarcasmEncoder(result.checkpoint_dir)
        out = encoder.encode(["wow what a plan", "nice day"], max_length=10)
        assert out.v_cls.shape == (2, encoder.hidden_size)

    def test_deterministic_given_seed(self, asset_dir, tmp_path):
        texts = random_texts(16, seed=3)
        config = MlmConfig(epochs=1, batch_size=8, max_length=12, seed=5)
        a = mlm_pretrain(texts, asset_dir["sarc_base"], tmp_path / "a", config)
        b = mlm_pretrain(texts, asset_dir["sarc_base"], tmp_path / "b", config)
        assert a.epoch_losses == b.epoch_losses


class TestSarcasmEncoder:
    def test_cls_vector_shapes(self, asset_dir):
        encoder = SarcasmEncoder(asset_dir["sarc_base"])
        enc = encoder.tokenize(["the movie was great", "so fun"], max_length=8)
        out = encoder(enc["input_ids"], enc["attention_mask"])
        assert out.shape == (2, encoder.hidden_size)

    def test_fixed_length_padding(self, asset_dir):
        encoder = SarcasmEncoder(asset_dir["sarc_base"])
        enc = encoder.tokenize(["short"], max_length=10)
        assert enc["input_ids"].shape == (1, 10)

    def test_module_level_helper(self, asset_dir):
        encoder = SarcasmEncoder(asset_dir["sarc_base"])
        features = encode_sarcasm(encoder, ["totally brilliant plan"], max_length=8)
        assert features.v_cls.shape == (1, encoder.hidden_size)

    def test_trainable(self, asset_dir):
        encoder = SarcasmEncoder(asset_dir["sarc_base"])
        assert any(p.requires_grad for p in encoder.parameters())
