"""Synthetic dataset generators and word-corpus ingestion.

Generators draw one bucket per client from a Binomial or Geometric law with
the support clamped to [0, B), deterministically per (n, B, seed).  Corpus
ingestion tokenizes a UTF-8 text file (lowercase, split on non-alphabetic
characters) and maps each word to a bucket with FNV-1a-64, a bit-exact,
dependency-free hash, so the same file always yields the same dataset.
"""

from __future__ import annotations

import math

import numpy as np

from .mechanism import Dataset, Histogram, count_items

FNV64_OFFSET_BASIS = 14695981039346656037
FNV64_PRIME = 1099511628211
_MASK64 = (1 << 64) - 1


def gen_binomial(n: int, B: int, seed: int) -> Dataset:
    """Each client picks bucket ~ Binomial(B - 1, 0.5), support exactly [0, B)."""
    if B < 2:
        raise ValueError(f"B must be >= 2, got {B}")
    rng = np.random.default_rng(seed)
    items = rng.binomial(B - 1, 0.5, size=n).astype(np.int64)
    return Dataset(items=items, B=B)


def gen_geometric(n: int, B: int, seed: int) -> Dataset:
    """Each client picks bucket min(g, B) - 1 with g ~ Geometric(1/sqrt(B)).

    Overflow past the last bucket is clamped rather than resampled, so the
    final bucket carries the full tail mass (1 - 1/sqrt(B))^(B-1).
    """
    if B < 2:
        raise ValueError(f"B must be >= 2, got {B}")
    rng = np.random.default_rng(seed)
    g = rng.geometric(1.0 / math.sqrt(B), size=n)
    items = (np.minimum(g, B) - 1).astype(np.int64)
    return Dataset(items=items, B=B)


def fnv1a_64(data: bytes) -> int:
    """FNV-1a 64-bit hash of a byte string."""
    h = FNV64_OFFSET_BASIS
    for byte in data:
        h ^= byte
        h = (h * FNV64_PRIME) & _MASK64
    return h


def tokenize(text: str) -> list[str]:
    """Lowercase, split on any non-alphabetic character, drop empty tokens."""
    tokens = []
    word = []
    for ch in text.lower():
        if "a" <= ch <= "z":
            word.append(ch)
        elif word:
            tokens.append("".join(word))
            word = []
    if word:
        tokens.append("".join(word))
    return tokens


def word_bucket(word: str, B: int) -> int:
    """Consistent word -> bucket mapping: FNV-1a-64 of the UTF-8 bytes mod B."""
    return fnv1a_64(word.encode("utf-8")) % B


def ingest_corpus(path, B: int) -> tuple[Dataset, Histogram]:
    """Read a text corpus; one item per word occurrence, in file order.

    Returns the bucketed dataset together with its exact histogram.
    """
    if B < 1:
        raise ValueError(f"B must be >= 1, got {B}")
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise OSError(f"cannot read corpus at {path}: {exc}") from exc
    tokens = tokenize(text)
    items = np.fromiter(
        (word_bucket(w, B) for w in tokens), dtype=np.int64, count=len(tokens)
    )
    dataset = Dataset(items=items, B=B)
    return dataset, true_histogram(dataset)


def true_histogram(dataset: Dataset) -> Histogram:
    """Exact, unthresholded counts of the dataset; totals to n."""
    counts = dict(count_items(dataset.items))
    return Histogram(counts=counts, B=dataset.B, thresholded=False)
