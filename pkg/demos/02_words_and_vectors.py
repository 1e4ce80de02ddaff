"""Tokenize text, build a vocabulary, and fill an embedding table.

Every vocabulary word gets a vector through one of three routes: a direct
hit in the pretrained file, the pretrained vector of its stem, or a seeded
random draw. The table records which route each row took.
"""

import tempfile
from pathlib import Path

from sarcfuse.lexical import (
    Vocabulary,
    load_embeddings,
    porter_stem,
    word_tokenize,
)
from sarcfuse.testing import write_vector_file

text = "The movie wasn't \"terrible\" -- it was worse, somehow."
tokens = word_tokenize(text)
print("tokens:", tokens)
print("stems: ", [porter_stem(t) for t in tokens])

# A vocabulary maps tokens to indices, reserving 0 for padding and 1 for
# unknown words. Build it from training text only.
vocab = Vocabulary(["movie", "movies", "terrible", "unseen-word"])
print("size:", len(vocab), " movie ->", vocab.index("movie"))

# Write a tiny pretrained-vector file covering "movie" and "terrible"
# but not "movies" (falls back to its stem) or "unseen-word" (random).
work = Path(tempfile.mkdtemp(prefix="sarcfuse-demo-"))
vector_file = write_vector_file(work / "vectors.txt", ["movie", "movi", "terrible"], dim=8)

table = load_embeddings(vocab, vector_file, dim=8, seed=0)
for token in ("movie", "movies", "terrible", "unseen-word"):
    row = vocab.index(token)
    print(f"{token:12s} row {row}  provenance={table.provenance[row]}")

# The same seed gives the same random rows, so runs are reproducible.
again = load_embeddings(vocab, vector_file, dim=8, seed=0)
print("identical across reloads:", bool((table.matrix == again.matrix).all()))
