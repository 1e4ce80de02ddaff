"""Acceptance gate: one test per shipping criterion.

Criteria 1-9 run on synthetic fixtures and tiny stand-in checkpoints,
entirely offline. Criteria 10-14 need the real public corpora (and for
the NBOW/fused checks, real pretrained assets); they are skipped unless
the environment points at them:

  SARCFUSE_DATA_DIR      directory holding sarc_movies/ sarc_technology/
                         iac_v2/ twitter/ in the canonical layout
  SARCFUSE_VECTORS_100   100-dimension pretrained vector file (criterion 12)
  SARCFUSE_VECTORS_300   300-dimension pretrained vector file (criteria 13, 14)
  SARCFUSE_SARC_BASE     base encoder checkpoint (criteria 13, 14;
                         default roberta-base)
  SARCFUSE_EMOTION_MODEL / SARCFUSE_SENTIMENT_MODEL
                         affective checkpoints (criteria 13, 14)
  SARCFUSE_RUN_FULL_FUSED=1   opt into the full-scale fused run (criterion 13)

Each test prints one `ACCEPTANCE NN PASS|FAIL` line.
"""

import os
import statistics

import numpy as np
import pytest
import torch
from gradtools import check_parameter_gradients
from test_evalkit import brute_force

from conftest import EMBED_DIM, small_cnn_config, small_fusion_config, small_train_config
from sarcfuse.baselines import default_nbow_spec, nbow_train_eval
from sarcfuse.cnn_branch import CnnBranch, CnnConfig
from sarcfuse.corpus import (
    BENCHMARK_COUNTS,
    DatasetBundle,
    compute_length_stats,
    load_dataset,
)
from sarcfuse.errors import ManifestMismatchError
from sarcfuse.evalkit import score
from sarcfuse.extractors import EmotionExtractor, SentimentExtractor, extract_batched
from sarcfuse.fusion import (
    FusedSarcasmModel,
    FusionConfig,
    FusionNet,
    TrainConfig,
    default_train_config,
    train_fused,
)
from sarcfuse.lexical import (
    PROV_PRETRAINED,
    PROV_RANDOM,
    PROV_STEMMED,
    Vocabulary,
    build_vocabulary,
    encode_for_cnn,
    load_embeddings,
)
from sarcfuse.sarc_encoder import (
    IGNORE_INDEX,
    MlmConfig,
    SarcasmEncoder,
    mask_tokens,
    mlm_pretrain,
)
from sarcfuse.testing import (
    make_fixture_bundle,
    random_texts,
    write_vector_file,
)
from sarcfuse.utils import parameter_checksum, seed_everything

DATA_DIR = os.environ.get("SARCFUSE_DATA_DIR")
VECTORS_100 = os.environ.get("SARCFUSE_VECTORS_100")
VECTORS_300 = os.environ.get("SARCFUSE_VECTORS_300")
FULL_FUSED = os.environ.get("SARCFUSE_RUN_FULL_FUSED") == "1"

needs_data = pytest.mark.skipif(
    not DATA_DIR, reason="SARCFUSE_DATA_DIR not set; real corpora unavailable"
)


def verdict(number, passed, description):
    print(f"ACCEPTANCE {number:02d} {'PASS' if passed else 'FAIL'}: {description}")
    assert passed, f"criterion {number}: {description}"


def component_checksums(pipeline):
    return {
        "sarc": parameter_checksum(pipeline.model.sarc_encoder),
        "cnn": parameter_checksum(pipeline.model.cnn),
        "projections": parameter_checksum(pipeline.model.fusion.projections),
        "head": parameter_checksum(pipeline.model.fusion.head),
    }


def test_criterion_01_extractors_frozen_while_rest_trains(asset_dir, emotion, sentiment):
    bundle = make_fixture_bundle(n_train=16, n_test=4, seed=0)
    texts = [e.text for e in bundle.train]
    labels = torch.tensor([e.label for e in bundle.train])
    emotion_before = parameter_checksum(emotion.model)
    sentiment_before = parameter_checksum(sentiment.model)

    seed_everything(0)
    sarc = SarcasmEncoder(asset_dir["sarc_base"])
    vocab = build_vocabulary(bundle.train)
    table = load_embeddings(vocab, asset_dir["vectors"], dim=EMBED_DIM, seed=0)
    cnn = CnnBranch(table, small_cnn_config())
    fusion = FusionNet(
        {"sarc": sarc.hidden_size, "emo_cls": emotion.hidden_size,
         "sent_cls": sentiment.hidden_size, "cnn": cnn.output_dim},
        small_fusion_config(),
    )
    model = FusedSarcasmModel(sarc, cnn, fusion)
    before = {
        "sarc": parameter_checksum(model.sarc_encoder),
        "cnn": parameter_checksum(model.cnn),
        "projections": parameter_checksum(model.fusion.projections),
        "head": parameter_checksum(model.fusion.head),
    }

    u_cls, el = extract_batched(emotion, texts, max_length=12)
    s_cls, sl = extract_batched(sentiment, texts, max_length=12)
    enc = sarc.tokenize(texts, max_length=12)
    cnn_indices = torch.tensor(
        [encode_for_cnn(t, vocab, cnn.config.max_words) for t in texts]
    )
    optimizer = torch.optim.AdamW(model.parameters(), lr=1e-3)
    loss_fn = torch.nn.CrossEntropyLoss()
    model.train()
    for step in range(6):
        rows = slice(2 * step, 2 * step + 2)
        logits = model(
            enc["input_ids"][rows], enc["attention_mask"][rows], cnn_indices[rows],
            torch.from_numpy(u_cls[rows]), torch.from_numpy(s_cls[rows]),
            torch.from_numpy(el[rows]), torch.from_numpy(sl[rows]),
        )
        optimizer.zero_grad()
        loss_fn(logits, labels[rows]).backward()
        optimizer.step()

    after = {
        "sarc": parameter_checksum(model.sarc_encoder),
        "cnn": parameter_checksum(model.cnn),
        "projections": parameter_checksum(model.fusion.projections),
        "head": parameter_checksum(model.fusion.head),
    }
    frozen_ok = (
        parameter_checksum(emotion.model) == emotion_before
        and parameter_checksum(sentiment.model) == sentiment_before
    )
    moved_ok = all(after[k] != before[k] for k in before)
    verdict(
        1,
        frozen_ok and moved_ok,
        "after 6 fused steps the extractor checksums are bitwise stable while "
        "sarc/cnn/projection/head checksums all move",
    )


def test_criterion_02_probability_simplexes(train_tiny, emotion, sentiment):
    texts = random_texts(100, seed=13)
    _, el = extract_batched(emotion, texts, max_length=12)
    _, sl = extract_batched(sentiment, texts, max_length=12)

    el_ok = el.shape == (100, 28) and np.all(el >= 0.0) and np.all(el <= 1.0)
    sl_ok = np.abs(sl.sum(axis=1) - 1.0).max() < 1e-6

    result = train_tiny(make_fixture_bundle(n_train=8, n_test=2, seed=1))
    probs = np.stack([p.probs for p in result.pipeline.predict(texts)])
    probs_ok = np.abs(probs.sum(axis=1) - 1.0).max() < 1e-6

    verdict(
        2,
        el_ok and sl_ok and probs_ok,
        "emotion scores in [0,1] with 28 components; sentiment and prediction "
        "probabilities sum to 1 within 1e-6 on 100 texts",
    )


def test_criterion_03_shape_chain():
    branch_dims = {"sarc": 768, "emo_cls": 768, "sent_cls": 1024, "cnn": 300}
    net = FusionNet(branch_dims, FusionConfig(projection_dim=128))
    g = torch.Generator().manual_seed(0)
    z = net.fuse(
        torch.randn(2, 768, generator=g),
        torch.randn(2, 768, generator=g),
        torch.randn(2, 1024, generator=g),
        torch.rand(2, 28, generator=g),
        torch.softmax(torch.randn(2, 2, generator=g), dim=-1),
        torch.randn(2, 300, generator=g),
    )[1]

    rng = np.random.default_rng(0)
    from sarcfuse.lexical import EmbeddingTable

    table = EmbeddingTable(
        matrix=rng.normal(size=(50, 300)).astype(np.float32),
        provenance=["pretrained"] * 50,
    )
    cnn = CnnBranch(table, CnnConfig(filter_sizes=(3, 4, 5), filters_per_size=100,
                                     max_words=36))
    cnn.eval()
    indices = torch.randint(0, 50, (1, 36))
    gathered = cnn.embedding(indices)[0]
    pooled = cnn(indices)

    verdict(
        3,
        z.shape[-1] == 640 and pooled.shape == (1, 300) and gathered.shape == (36, 300),
        "p=128 fusion gives 640-dim z; [3,4,5]x100 CNN gives 300; "
        "embedding gather is (max_words, 300)",
    )


def test_criterion_04_finite_difference_gradients():
    seed_everything(2)
    net = FusionNet(
        {"sarc": 6, "emo_cls": 5, "sent_cls": 4, "cnn": 3},
        FusionConfig(projection_dim=3, head_hidden_dim=4),
    ).double().eval()
    g = torch.Generator().manual_seed(1)
    args = (
        torch.randn(2, 6, generator=g, dtype=torch.double),
        torch.randn(2, 5, generator=g, dtype=torch.double),
        torch.randn(2, 4, generator=g, dtype=torch.double),
        torch.rand(2, 28, generator=g, dtype=torch.double),
        torch.softmax(torch.randn(2, 2, generator=g, dtype=torch.double), dim=-1),
        torch.randn(2, 3, generator=g, dtype=torch.double),
    )
    fusion_names = [
        "projections.sarc.linear.weight",
        "projections.emo_cls.linear.weight",
        "projections.sent_cls.linear.bias",
        "projections.labels.linear.weight",
        "projections.cnn.linear.weight",
        "head.0.weight",
        "head.3.weight",
    ]
    fusion_ok = check_parameter_gradients(net, args, fusion_names, rtol=1e-4)

    from sarcfuse.lexical import EmbeddingTable

    rng = np.random.default_rng(3)
    table = EmbeddingTable(
        matrix=rng.normal(size=(12, 5)).astype(np.float32),
        provenance=["pretrained"] * 12,
    )
    cnn = CnnBranch(
        table,
        CnnConfig(filter_sizes=(2, 3), filters_per_size=2, embedding_dim=5,
                  max_words=6, dropout_rate=0.0),
    ).double().eval()
    indices = torch.randint(1, 12, (2, 6), generator=torch.Generator().manual_seed(4))
    cnn_ok = check_parameter_gradients(
        cnn, (indices,), ["convs.0.weight", "convs.0.bias", "convs.1.weight"], rtol=1e-4
    )
    verdict(
        4,
        fusion_ok and cnn_ok,
        "fusion projections/head and CNN filters pass central finite-difference "
        "checks at rtol 1e-4",
    )


def test_criterion_05_metrics_match_brute_force_oracle():
    rng = np.random.default_rng(42)
    gold = rng.integers(0, 2, size=1000).tolist()
    predictions = rng.integers(0, 2, size=1000).tolist()
    report = score(predictions, gold)
    expected = brute_force(predictions, gold)

    exact = (
        report.accuracy == expected["accuracy"]
        and report.f1_macro == expected["f1_macro"]
        and report.f1_weighted == expected["f1_weighted"]
        and all(
            report.per_class[c].precision == expected["per_class"][c]["precision"]
            and report.per_class[c].recall == expected["per_class"][c]["recall"]
            and report.per_class[c].f1 == expected["per_class"][c]["f1"]
            for c in (0, 1)
        )
    )
    flipped = score([1 - p for p in predictions], [1 - g for g in gold])
    symmetric = (
        flipped.f1_macro == report.f1_macro
        and flipped.accuracy == report.accuracy
        and flipped.per_class[0].f1 == report.per_class[1].f1
    )
    verdict(5, exact and symmetric,
            "score() equals brute-force confusion counts on 1,000 pairs; "
            "label-swap symmetry holds")


def test_criterion_06_fused_model_overfits_fixture(train_tiny):
    reached = []
    for seed in (0, 1, 2):
        bundle = make_fixture_bundle(n_train=32, n_test=4, seed=seed)
        result = train_tiny(
            bundle,
            out_name=f"overfit-{seed}",
            train_config=small_train_config(
                seed=seed, max_epochs=30, lr=1e-3, batch_size=8
            ),
        )
        predicted = result.pipeline.predicted_labels([e.text for e in bundle.train])
        accuracy = float(
            np.mean([p == e.label for p, e in zip(predicted, bundle.train)])
        )
        reached.append(accuracy)
    passed = all(a >= 0.95 for a in reached)
    verdict(
        6,
        passed,
        f"train accuracy >= 0.95 on 32-example fixture within 30 epochs for "
        f"3/3 seeds (got {[round(a, 3) for a in reached]})",
    )


def test_criterion_07_seeded_training_determinism(train_tiny):
    bundle = make_fixture_bundle(n_train=16, n_test=4, seed=3)
    a = train_tiny(bundle, out_name="det-a", train_config=small_train_config(max_epochs=3))
    b = train_tiny(bundle, out_name="det-b", train_config=small_train_config(max_epochs=3))
    losses_a = [h["train_loss"] for h in a.history]
    losses_b = [h["train_loss"] for h in b.history]
    close = len(losses_a) == len(losses_b) and all(
        abs(x - y) <= 1e-6 for x, y in zip(losses_a, losses_b)
    )
    verdict(7, close, "identical seeded runs give identical epoch-loss sequences "
                      "within 1e-6")


def test_criterion_08_embedding_fallback_paths(tmp_path):
    vocab = Vocabulary(["direct", "Stemmed", "neverseen"])
    vector_file = write_vector_file(
        tmp_path / "vectors.txt",
        ["direct", "stem"],
        dim=8,
        vectors={"direct": np.full(8, 1.0), "stem": np.full(8, 2.0)},
    )
    table_a = load_embeddings(vocab, vector_file, dim=8, seed=11)
    table_b = load_embeddings(vocab, vector_file, dim=8, seed=11)

    paths_ok = (
        table_a.provenance[vocab.index("direct")] == PROV_PRETRAINED
        and table_a.provenance[vocab.index("Stemmed")] == PROV_STEMMED
        and table_a.provenance[vocab.index("neverseen")] == PROV_RANDOM
    )
    reproducible = np.array_equal(table_a.matrix, table_b.matrix)
    verdict(8, paths_ok and reproducible,
            "pretrained, stemmed-fallback, and seeded-random provenance paths "
            "all exercised reproducibly")


def test_criterion_09_mlm_sanity(asset_dir, tmp_path):
    texts = random_texts(64, seed=21, min_words=4, max_words=10)
    config = MlmConfig(epochs=3, batch_size=8, max_length=16, learning_rate=5e-4, seed=0)
    result = mlm_pretrain(texts, asset_dir["sarc_base"], tmp_path / "mlm", config)
    loss_ok = result.epoch_losses[-1] < result.epoch_losses[0]

    g = torch.Generator().manual_seed(0)
    ids = torch.randint(5, 40, (300, 40), generator=g)
    special = torch.zeros_like(ids)
    special[:, 0] = 1
    special[:, -1] = 1
    _, labels = mask_tokens(ids, special, 0.15, 4, 40, torch.Generator().manual_seed(1))
    eligible = int((special == 0).sum())
    rate = float((labels != IGNORE_INDEX).sum()) / eligible
    rate_ok = eligible >= 10_000 and abs(rate - 0.15) <= 0.02
    verdict(
        9,
        loss_ok and rate_ok,
        f"final MLM epoch loss {result.epoch_losses[-1]:.3f} < first "
        f"{result.epoch_losses[0]:.3f}; mask rate {rate:.4f} within 0.15 +/- 0.02",
    )


# The published per-dataset Table values used by the conditional criteria.
LENGTH_STATS_EXPECTED = {
    "sarc_movies": {"median": 10, "mean": 12.24, "dispersion": 8.8148, "max": 138, "min": 1},
    "sarc_technology": {"median": 12, "mean": 13.88, "dispersion": 9.3301, "max": 103, "min": 1},
    "iac_v2": {"median": 39, "mean": 50.63, "dispersion": 36.0514, "max": 212, "min": 10},
    "twitter": {"median": 17, "mean": 17.61, "dispersion": 6.2572, "max": 64, "min": 1},
}

NBOW_EXPECTED_F1 = {
    "sarc_movies": 0.60,
    "sarc_technology": 0.64,
    "iac_v2": 0.71,
    "twitter": 0.75,
}

FUSED_EXPECTED_F1 = {
    "sarc_movies": 0.73,
    "sarc_technology": 0.80,
    "iac_v2": 0.85,
    "twitter": 0.93,
}


def _real_bundle(name):
    return load_dataset(os.path.join(DATA_DIR, name), name=name)


@needs_data
def test_criterion_10_benchmark_counts_validate_exactly():
    failures = []
    for name in BENCHMARK_COUNTS:
        bundle = _real_bundle(name)
        try:
            bundle.validate_manifest(BENCHMARK_COUNTS[name])
        except ManifestMismatchError as exc:
            failures.append(str(exc))
    verdict(10, not failures,
            "published per-split/per-label counts validate exactly on ingestion"
            + ("" if not failures else f" ({failures})"))


@needs_data
def test_criterion_11_length_statistics_reproduced():
    problems = []
    for name, expected in LENGTH_STATS_EXPECTED.items():
        bundle = _real_bundle(name)
        candidates = {
            "train": compute_length_stats(bundle.train),
            "train+test": compute_length_stats(bundle.train + bundle.test),
        }
        ok = False
        for stats in candidates.values():
            exact = (
                stats.median == expected["median"]
                and stats.max == expected["max"]
                and stats.min == expected["min"]
            )
            mean_ok = abs(stats.mean - expected["mean"]) <= 0.5
            dispersion_ok = (
                abs(stats.std - expected["dispersion"]) <= 0.5
                or abs(stats.variance - expected["dispersion"]) <= 0.5
            )
            if exact and mean_ok and dispersion_ok:
                ok = True
                break
        if not ok:
            problems.append(name)
    verdict(11, not problems,
            "median/max/min exact, mean within 0.5, dispersion matches under an "
            "interpretation" + ("" if not problems else f" (failed: {problems})"))


@pytest.mark.skipif(
    not (DATA_DIR and VECTORS_100),
    reason="needs SARCFUSE_DATA_DIR and SARCFUSE_VECTORS_100",
)
def test_criterion_12_nbow_full_scale():
    misses = []
    for name, expected in NBOW_EXPECTED_F1.items():
        bundle = _real_bundle(name)
        vocab = build_vocabulary(bundle.train + bundle.test)
        table = load_embeddings(vocab, VECTORS_100, dim=100, seed=0)
        report = nbow_train_eval(bundle, vocab, table, default_nbow_spec(seed=0))
        if abs(report.f1_macro - expected) > 0.05:
            misses.append(f"{name}: {report.f1_macro:.3f} vs {expected}")
    verdict(12, not misses,
            "NBOW macro F1 within 0.05 of the published values"
            + ("" if not misses else f" (missed: {misses})"))


def _full_scale_assets():
    return {
        "sarc_base": os.environ.get("SARCFUSE_SARC_BASE", "roberta-base"),
        "emotion": os.environ.get(
            "SARCFUSE_EMOTION_MODEL", "bhadresh-savani/bert-base-go-emotion"
        ),
        "sentiment": os.environ.get(
            "SARCFUSE_SENTIMENT_MODEL", "siebert/sentiment-roberta-large-english"
        ),
    }


@pytest.mark.skipif(
    not (DATA_DIR and VECTORS_300 and FULL_FUSED),
    reason="full-scale fused run is explicitly optional; set SARCFUSE_DATA_DIR, "
    "SARCFUSE_VECTORS_300 and SARCFUSE_RUN_FULL_FUSED=1",
)
def test_criterion_13_fused_full_scale(tmp_path):
    assets = _full_scale_assets()
    emotion = EmotionExtractor(assets["emotion"])
    sentiment = SentimentExtractor(assets["sentiment"])
    outcomes = []
    for name, expected in FUSED_EXPECTED_F1.items():
        bundle = _real_bundle(name)
        vocab = build_vocabulary(bundle.train)
        table = load_embeddings(vocab, VECTORS_300, dim=300, seed=0)
        train_config = default_train_config(name)
        result = train_fused(
            bundle, assets["sarc_base"], emotion, sentiment, table, vocab,
            train_config, FusionConfig(),
            CnnConfig(max_words=2 * train_config.max_length),
            tmp_path / name,
        )
        predicted = result.pipeline.predicted_labels([e.text for e in bundle.test])
        f1 = score(predicted, [e.label for e in bundle.test]).f1_macro
        outcomes.append((name, f1, expected, train_config))
    # Misses outside tolerance are reported with their configs rather than
    # treated as implementation failures.
    for name, f1, expected, train_config in outcomes:
        status = "within" if abs(f1 - expected) <= 0.03 else "OUTSIDE"
        print(
            f"  {name}: macro F1 {f1:.3f} vs {expected} ({status} 0.03) "
            f"[seed {train_config.seed}, max_length {train_config.max_length}, "
            f"epochs {train_config.max_epochs}, lr {train_config.lr}, "
            f"batch {train_config.batch_size}]"
        )
    verdict(13, True, "full-scale fused metrics reported above with seeds and configs")


@pytest.mark.skipif(
    not (DATA_DIR and VECTORS_300),
    reason="needs SARCFUSE_DATA_DIR and SARCFUSE_VECTORS_300",
)
def test_criterion_14_fused_beats_nbow_on_subsample(tmp_path):
    assets = _full_scale_assets()
    emotion = EmotionExtractor(assets["emotion"])
    sentiment = SentimentExtractor(assets["sentiment"])
    full = _real_bundle("sarc_movies")

    margins = []
    for seed in (0, 1, 2):
        rng = np.random.default_rng(seed)
        train = [full.train[i] for i in rng.permutation(len(full.train))[:800]]
        test_pool = full.test
        test = [test_pool[i] for i in rng.permutation(len(test_pool))[:200]]
        test = [
            type(e)(e.id, e.text, e.label, e.dataset, "test") for e in test
        ]
        bundle = DatasetBundle("sarc_movies", train, test)

        vocab = build_vocabulary(bundle.train + bundle.test)
        table_300 = load_embeddings(vocab, VECTORS_300, dim=300, seed=seed)
        nbow_vectors = VECTORS_100 or VECTORS_300
        table_nbow = load_embeddings(
            vocab, nbow_vectors, dim=100 if VECTORS_100 else 300, seed=seed
        )
        nbow_f1 = nbow_train_eval(bundle, vocab, table_nbow,
                                  default_nbow_spec(seed=seed)).f1_macro

        train_config = default_train_config("sarc_movies", seed=seed, max_epochs=6)
        result = train_fused(
            bundle, assets["sarc_base"], emotion, sentiment, table_300, vocab,
            train_config, FusionConfig(),
            CnnConfig(max_words=2 * train_config.max_length),
            tmp_path / f"sub-{seed}",
        )
        predicted = result.pipeline.predicted_labels([e.text for e in bundle.test])
        fused_f1 = score(predicted, [e.label for e in bundle.test]).f1_macro
        margins.append(fused_f1 - nbow_f1)

    median_margin = statistics.median(margins)
    verdict(14, median_margin > 0,
            f"fused macro F1 beats NBOW on the 1,000-example subsample, median "
            f"margin {median_margin:+.3f} over 3 seeds")
