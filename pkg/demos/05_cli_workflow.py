"""Drive the whole workflow through the command-line interface.

Each step is the same `sarcfuse` subcommand you would run in a shell;
this script invokes them in-process and shows the artifacts they leave.
"""

import json
import tempfile
from pathlib import Path

import yaml

from sarcfuse.cli import main
from sarcfuse.corpus import write_bundle
from sarcfuse.testing import (
    BASE_WORDS,
    make_fixture_bundle,
    make_tiny_emotion_model,
    make_tiny_sarcasm_base,
    make_tiny_sentiment_model,
    write_vector_file,
)

work = Path(tempfile.mkdtemp(prefix="sarcfuse-demo-"))
data_dir = work / "data"
write_bundle(make_fixture_bundle(n_train=24, n_test=8, seed=0), data_dir)

config = {
    "dataset": "sarc_movies",
    "data_path": str(data_dir),
    "seed": 0,
    "assets": {
        "sarc_base": str(make_tiny_sarcasm_base(work / "base")),
        "emotion_model": str(make_tiny_emotion_model(work / "emotion")),
        "sentiment_model": str(make_tiny_sentiment_model(work / "sentiment")),
        "vector_file": str(write_vector_file(work / "vec.txt", BASE_WORDS, dim=12, seed=7)),
        "vector_dim": 12,
        "nbow_vector_file": str(work / "vec.txt"),
        "nbow_vector_dim": 12,
    },
    "train": {"max_length": 12, "max_epochs": 4, "lr": 1e-3, "batch_size": 8,
              "val_fraction": 0.0},
    "fusion": {"projection_dim": 16, "head_hidden_dim": 32},
    "cnn": {"filter_sizes": [2, 3], "filters_per_size": 8, "max_words": 24},
}
config_path = work / "config.yaml"
config_path.write_text(yaml.safe_dump(config))

steps = [
    ["stats", "--data", str(data_dir), "--split", "train"],
    ["train", "--config", str(config_path), "--out", str(work / "run")],
    ["eval", "--config", str(config_path), "--checkpoint", str(work / "run/checkpoint"),
     "--out", str(work / "run")],
    ["baseline", "--config", str(config_path), "--kind", "nbow",
     "--out", str(work / "nbow-run")],
    ["predict", "--checkpoint", str(work / "run/checkpoint"),
     "--text", "what a absolutely flawless plan that was"],
    ["report", "--runs", str(work / "run/report.json"), str(work / "nbow-run/report.json")],
]
for argv in steps:
    print(f"\n$ sarcfuse {' '.join(argv)}")
    code = main(argv)
    assert code == 0, argv

# Every run directory carries a manifest describing how it was produced.
manifest = json.loads((work / "run" / "run_manifest.json").read_text())
print("\nrun manifest keys:", sorted(manifest))
