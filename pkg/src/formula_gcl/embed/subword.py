"""Character n-grams hashed into a fixed number of buckets."""

from __future__ import annotations

from functools import lru_cache

FNV_OFFSET = 0x811C9DC5
FNV_PRIME = 0x01000193


def fnv1a(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & 0xFFFFFFFF
    return h


def char_ngrams(token: str, n_min: int, n_max: int) -> list[str]:
    """N-grams of ``<token>``; the full bracketed word itself is excluded."""
    word = f"<{token}>"
    grams = []
    for n in range(n_min, n_max + 1):
        for i in range(len(word) - n + 1):
            gram = word[i : i + n]
            if gram != word:
                grams.append(gram)
    return grams


@lru_cache(maxsize=65536)
def ngram_buckets(token: str, n_min: int, n_max: int, buckets: int) -> tuple[int, ...]:
    return tuple(fnv1a(g.encode("utf-8")) % buckets for g in char_ngrams(token, n_min, n_max))
