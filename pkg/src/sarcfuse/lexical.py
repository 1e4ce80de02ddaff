"""Word-level text machinery for the convolutional branch.

Covers word tokenization (Penn Treebank conventions), per-dataset
vocabulary construction, and loading pretrained word vectors with a
stemming fallback and seeded random initialization for the remainder.
"""

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyCorpusError, VectorFormatError

PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"
PAD_INDEX = 0
UNK_INDEX = 1

# Row provenance tags for EmbeddingTable.
PROV_PRETRAINED = "pretrained"
PROV_STEMMED = "stemmed_fallback"
PROV_RANDOM = "random"
PROV_PAD = "pad_zero"


class TreebankWordTokenizer:
    """Penn Treebank word tokenizer (classic sed-script rule set).

    Splits standard punctuation, converts double quotes to `` / '' and
    separates English contractions ("don't" -> "do", "n't"). Operates on
    single texts; no sentence splitting is attempted.
    """

    STARTING_QUOTES = [
        (re.compile(r"^\""), r"``"),
        (re.compile(r"(``)"), r" \1 "),
        (re.compile(r"([ \(\[{<])(\"|\'{2})"), r"\1 `` "),
    ]

    PUNCTUATION = [
        (re.compile(r"([:,])([^\d])"), r" \1 \2"),
        (re.compile(r"([:,])$"), r" \1 "),
        (re.compile(r"\.\.\."), r" ... "),
        (re.compile(r"[;@#$%&]"), r" \g<0> "),
        # Final period (optionally followed by closers) splits only at end
        # of text; interior abbreviation periods stay attached.
        (re.compile(r'([^\.])(\.)([\]\)}>"\']*)\s*$'), r"\1 \2\3 "),
        (re.compile(r"[?!]"), r" \g<0> "),
        (re.compile(r"([^'])' "), r"\1 ' "),
    ]

    PARENS_BRACKETS = (re.compile(r"[\]\[\(\)\{\}\<\>]"), r" \g<0> ")

    DOUBLE_DASHES = (re.compile(r"--"), r" -- ")

    ENDING_QUOTES = [
        (re.compile(r'"'), " '' "),
        (re.compile(r"(\S)(\'\')"), r"\1 \2 "),
        (re.compile(r"([^' ])('[sS]|'[mM]|'[dD]|') "), r"\1 \2 "),
        (re.compile(r"([^' ])('ll|'LL|'re|'RE|'ve|'VE|n't|N'T) "), r"\1 \2 "),
    ]

    CONTRACTIONS = [
        re.compile(r"(?i)\b(can)(not)\b"),
        re.compile(r"(?i)\b(d)('ye)\b"),
        re.compile(r"(?i)\b(gim)(me)\b"),
        re.compile(r"(?i)\b(gon)(na)\b"),
        re.compile(r"(?i)\b(got)(ta)\b"),
        re.compile(r"(?i)\b(lem)(me)\b"),
        re.compile(r"(?i)\b(more)('n)\b"),
        re.compile(r"(?i)\b(wan)(na)\s"),
        re.compile(r"(?i) ('t)(is)\b"),
        re.compile(r"(?i) ('t)(was)\b"),
    ]

    def tokenize(self, text: str) -> list[str]:
        for pattern, sub in self.STARTING_QUOTES:
            text = pattern.sub(sub, text)
        for pattern, sub in self.PUNCTUATION:
            text = pattern.sub(sub, text)
        pattern, sub = self.PARENS_BRACKETS
        text = pattern.sub(sub, text)
        pattern, sub = self.DOUBLE_DASHES
        text = pattern.sub(sub, text)
        # Pad so the ending-quote / contraction rules can anchor on spaces.
        text = " " + text + " "
        for pattern, sub in self.ENDING_QUOTES:
            text = pattern.sub(sub, text)
        for pattern in self.CONTRACTIONS:
            text = pattern.sub(r" \1 \2 ", text)
        return text.split()


_TOKENIZER = TreebankWordTokenizer()


def word_tokenize(text: str) -> list[str]:
    """Tokenize one text into Treebank-style word tokens.

    Deterministic; empty input yields an empty list.
    """
    return _TOKENIZER.tokenize(text)


class PorterStemmer:
    """The Porter suffix-stripping algorithm, as originally published.

    Lowercases its input before stemming.
    """

    def stem(self, word: str) -> str:
        word = word.lower()
        if len(word) <= 2:
            return word
        word = self._step1ab(word)
        word = self._step1c(word)
        word = self._step2(word)
        word = self._step3(word)
        word = self._step4(word)
        word = self._step5(word)
        return word

    # -- letter classification -------------------------------------------

    def _is_consonant(self, word, i):
        ch = word[i]
        if ch in "aeiou":
            return False
        if ch == "y":
            return True if i == 0 else not self._is_consonant(word, i - 1)
        return True

    def _measure(self, stem):
        """Count VC sequences in the stem ([C](VC)^m[V])."""
        cv = [self._is_consonant(stem, i) for i in range(len(stem))]
        m = 0
        prev = None
        for is_cons in cv:
            if prev is False and is_cons:
                m += 1
            prev = is_cons
        return m

    def _has_vowel(self, stem):
        return any(not self._is_consonant(stem, i) for i in range(len(stem)))

    def _ends_double_consonant(self, word):
        return (
            len(word) >= 2
            and word[-1] == word[-2]
            and self._is_consonant(word, len(word) - 1)
        )

    def _ends_cvc(self, word):
        if len(word) < 3:
            return False
        return (
            self._is_consonant(word, len(word) - 3)
            and not self._is_consonant(word, len(word) - 2)
            and self._is_consonant(word, len(word) - 1)
            and word[-1] not in "wxy"
        )

    def _replace_if_m(self, word, suffix, replacement):
        """Replace suffix when the remaining stem's measure is positive."""
        stem = word[: len(word) - len(suffix)]
        if self._measure(stem) > 0:
            return stem + replacement
        return word

    def _step1ab(self, word):
        if word.endswith("s"):
            if word.endswith("sses"):
                word = word[:-2]
            elif word.endswith("ies"):
                word = word[:-3] + "i"
            elif not word.endswith("ss"):
                word = word[:-1]
        if word.endswith("eed"):
            if self._measure(word[:-3]) > 0:
                word = word[:-1]
            return word
        flag = False
        if word.endswith("ed") and self._has_vowel(word[:-2]):
            word = word[:-2]
            flag = True
        elif word.endswith("ing") and self._has_vowel(word[:-3]):
            word = word[:-3]
            flag = True
        if flag:
            if word.endswith(("at", "bl", "iz")):
                word += "e"
            elif self._ends_double_consonant(word) and word[-1] not in "lsz":
                word = word[:-1]
            elif self._measure(word) == 1 and self._ends_cvc(word):
                word += "e"
        return word

    def _step1c(self, word):
        if word.endswith("y") and self._has_vowel(word[:-1]):
            word = word[:-1] + "i"
        return word

    _STEP2_RULES = [
        ("ational", "ate"), ("tional", "tion"),
        ("enci", "ence"), ("anci", "ance"),
        ("izer", "ize"),
        ("abli", "able"), ("alli", "al"), ("entli", "ent"),
        ("eli", "e"), ("ousli", "ous"),
        ("ization", "ize"), ("ation", "ate"), ("ator", "ate"),
        ("alism", "al"), ("iveness", "ive"), ("fulness", "ful"),
        ("ousness", "ous"),
        ("aliti", "al"), ("iviti", "ive"), ("biliti", "ble"),
    ]

    _STEP3_RULES = [
        ("icate", "ic"), ("ative", ""), ("alize", "al"),
        ("iciti", "ic"), ("ical", "ic"), ("ful", ""), ("ness", ""),
    ]

    def _apply_rules(self, word, rules):
        # Longest matching suffix wins, as in the published rule tables.
        best = None
        for suffix, replacement in rules:
            if word.endswith(suffix) and (best is None or len(suffix) > len(best[0])):
                best = (suffix, replacement)
        if best is None:
            return word
        return self._replace_if_m(word, best[0], best[1])

    def _step2(self, word):
        return self._apply_rules(word, self._STEP2_RULES)

    def _step3(self, word):
        return self._apply_rules(word, self._STEP3_RULES)

    _STEP4_SUFFIXES = [
        "al", "ance", "ence", "er", "ic", "able", "ible", "ant",
        "ement", "ment", "ent", "ion", "ou", "ism", "ate", "iti",
        "ous", "ive", "ize",
    ]

    def _step4(self, word):
        best = None
        for suffix in self._STEP4_SUFFIXES:
            if word.endswith(suffix) and (best is None or len(suffix) > len(best)):
                best = suffix
        if best is None:
            return word
        stem = word[: len(word) - len(best)]
        if best == "ion" and (not stem or stem[-1] not in "st"):
            return word
        if self._measure(stem) > 1:
            return stem
        return word

    def _step5(self, word):
        if word.endswith("e"):
            stem = word[:-1]
            m = self._measure(stem)
            if m > 1 or (m == 1 and not self._ends_cvc(stem)):
                word = stem
        if (
            word.endswith("l")
            and self._ends_double_consonant(word)
            and self._measure(word) > 1
        ):
            word = word[:-1]
        return word


_STEMMER = PorterStemmer()


def porter_stem(word: str) -> str:
    return _STEMMER.stem(word)


class Vocabulary:
    """Token <-> index bijection with PAD at 0 and UNK at 1.

    Tokens are added in first-occurrence order; built from a dataset's
    train split only, so unseen test tokens map to UNK.
    """

    def __init__(self, tokens=()):
        self.index_to_token = [PAD_TOKEN, UNK_TOKEN]
        self.token_to_index = {PAD_TOKEN: PAD_INDEX, UNK_TOKEN: UNK_INDEX}
        for token in tokens:
            self.add(token)

    def add(self, token: str) -> int:
        idx = self.token_to_index.get(token)
        if idx is None:
            idx = len(self.index_to_token)
            self.token_to_index[token] = idx
            self.index_to_token.append(token)
        return idx

    def index(self, token: str) -> int:
        return self.token_to_index.get(token, UNK_INDEX)

    def __len__(self):
        return len(self.index_to_token)

    def __contains__(self, token):
        return token in self.token_to_index

    def save(self, path):
        Path(path).write_text(
            "\n".join(self.index_to_token) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, path):
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if lines[:2] != [PAD_TOKEN, UNK_TOKEN]:
            raise VectorFormatError(f"{path} is not a vocabulary file")
        vocab = cls()
        for token in lines[2:]:
            vocab.add(token)
        return vocab


def build_vocabulary(examples) -> Vocabulary:
    """Collect all distinct train tokens, in first-occurrence order."""
    if not examples:
        raise EmptyCorpusError("cannot build a vocabulary from zero examples")
    vocab = Vocabulary()
    for example in examples:
        for token in word_tokenize(example.text):
            vocab.add(token)
    return vocab


@dataclass
class EmbeddingTable:
    """Per-vocabulary embedding matrix with per-row provenance tags."""

    matrix: np.ndarray
    provenance: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.matrix.ndim != 2:
            raise VectorFormatError("embedding matrix must be 2-dimensional")
        if len(self.provenance) != self.matrix.shape[0]:
            raise VectorFormatError("one provenance tag required per row")

    @property
    def dim(self):
        return self.matrix.shape[1]

    def __len__(self):
        return self.matrix.shape[0]


def read_vector_file(path, dim, wanted=None):
    """Stream a `token v1 ... vdim` text file into a dict.

    When `wanted` is given, only those tokens are kept (memory-friendly for
    multi-gigabyte vector files). A line with the wrong field count raises
    VectorFormatError with its line number.
    """
    vectors = {}
    with open(path, encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split(" ")
            if len(fields) != dim + 1:
                raise VectorFormatError(
                    f"expected {dim + 1} fields, got {len(fields)}",
                    line_number=line_number,
                )
            token = fields[0]
            if wanted is not None and token not in wanted:
                continue
            try:
                vectors[token] = np.asarray(fields[1:], dtype=np.float32)
            except ValueError as exc:
                raise VectorFormatError(str(exc), line_number=line_number) from exc
    return vectors


def load_embeddings(
    vocab: Vocabulary,
    vector_file,
    dim: int = 300,
    stemmer=porter_stem,
    seed: int = 0,
) -> EmbeddingTable:
    """Build the embedding table for a vocabulary.

    Lookup order per token: raw form, lowercased form, stem of each
    (provenance "stemmed_fallback"), then a seeded uniform[-0.25, 0.25]
    vector (provenance "random"). The PAD row is all zeros.
    """
    wanted = set()
    for token in vocab.index_to_token:
        lower = token.lower()
        wanted.update((token, lower, stemmer(token), stemmer(lower)))
    vectors = read_vector_file(vector_file, dim, wanted=wanted)

    rng = np.random.default_rng(seed)
    matrix = np.zeros((len(vocab), dim), dtype=np.float32)
    provenance = []
    for idx, token in enumerate(vocab.index_to_token):
        if idx == PAD_INDEX:
            provenance.append(PROV_PAD)
            continue
        hit = vectors.get(token)
        if hit is None:
            hit = vectors.get(token.lower())
        if hit is not None:
            matrix[idx] = hit
            provenance.append(PROV_PRETRAINED)
            continue
        stemmed = vectors.get(stemmer(token))
        if stemmed is None:
            stemmed = vectors.get(stemmer(token.lower()))
        if stemmed is not None:
            matrix[idx] = stemmed
            provenance.append(PROV_STEMMED)
            continue
        matrix[idx] = rng.uniform(-0.25, 0.25, size=dim).astype(np.float32)
        provenance.append(PROV_RANDOM)
    return EmbeddingTable(matrix=matrix, provenance=provenance)


def encode_for_cnn(text: str, vocab: Vocabulary, max_words: int) -> list[int]:
    """Map a text to exactly `max_words` token indices.

    Tokens beyond `max_words` are dropped; shorter texts are right-padded
    with PAD. Out-of-vocabulary tokens map to UNK.
    """
    if max_words < 1:
        raise ValueError("max_words must be >= 1")
    indices = [vocab.index(token) for token in word_tokenize(text)[:max_words]]
    indices.extend([PAD_INDEX] * (max_words - len(indices)))
    return indices
