from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyVocabulary


@dataclass
class Vocabulary:
    tokens: list[str]
    counts: list[int]

    def __post_init__(self):
        self.index = {t: i for i, t in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    @property
    def total(self) -> int:
        return sum(self.counts)


def build_vocab(walks, min_count: int = 1) -> Vocabulary:
    """Ids by descending count, ties broken lexicographically."""
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    counter = Counter(tok for walk in walks for tok in walk)
    kept = sorted(((t, c) for t, c in counter.items() if c >= min_count), key=lambda tc: (-tc[1], tc[0]))
    if not kept:
        raise EmptyVocabulary(f"no token occurs at least {min_count} times")
    return Vocabulary([t for t, _ in kept], [c for _, c in kept])


def unigram_distribution(vocab: Vocabulary, power: float = 0.75) -> np.ndarray:
    weights = np.asarray(vocab.counts, dtype=np.float64) ** power
    return weights / weights.sum()
