"""Load a labeled corpus, validate its manifest, and summarize text lengths."""

import json
import tempfile
from pathlib import Path

from sarcfuse.corpus import compute_length_stats, load_dataset, write_bundle
from sarcfuse.errors import ManifestMismatchError
from sarcfuse.testing import make_fixture_bundle

work = Path(tempfile.mkdtemp(prefix="sarcfuse-demo-"))

# Build a small synthetic corpus and write it in the canonical layout:
# train.jsonl, test.jsonl and a manifest with per-split label counts.
bundle = make_fixture_bundle(n_train=24, n_test=8, seed=0)
data_dir = work / "corpus"
write_bundle(bundle, data_dir)
print("wrote", sorted(p.name for p in data_dir.iterdir()))

# Loading checks ids for uniqueness and the manifest for exact counts.
loaded = load_dataset(data_dir, name="sarc_movies")
print("train examples:", len(loaded.train))
print("first example:", loaded.train[0].text[:60], "->", loaded.train[0].label)

# A wrong manifest is rejected with the offending split and label named.
bad_counts = {"train": {0: 12, 1: 11}, "test": {0: 4, 1: 4}}
try:
    loaded.validate_manifest(bad_counts)
except ManifestMismatchError as exc:
    print("manifest check caught:", exc)

# Word-count statistics report every common dispersion summary at once.
stats = compute_length_stats(loaded.train)
print(json.dumps(stats.to_dict(), indent=2))

# Reads of the test split are counted, so a training script can prove
# after the fact that it never looked at held-out data.
print("test reads so far:", loaded.test_reads)
_ = loaded.test
print("test reads after one access:", loaded.test_reads)
