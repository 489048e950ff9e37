"""Objective-value evaluators for external trainers.

Two desk-scale losses over per-step vocabulary distributions: a distance-
weighted loss (expected euclidean distance, in embedding space, between the
predicted distribution and the reference word at each step) and standard
token-level cross-entropy. No gradients; these exist to validate that a
trainer's objective implementation produces the numbers it should.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import DimensionMismatch, LengthMismatch, UnknownReferenceWord

_EPSILON = 1e-12
_PROB_SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class EmbeddingTable:
    """Vocabulary with one fixed-dimension vector per word."""

    vocab: tuple[str, ...]
    vectors: tuple[tuple[float, ...], ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.vocab) != len(self.vectors):
            raise ValueError("vocab and vectors differ in length")
        if not self.vocab:
            raise ValueError("empty vocabulary")
        if len(set(self.vocab)) != len(self.vocab):
            raise ValueError("vocabulary entries must be unique")
        dim = len(self.vectors[0])
        if dim < 1:
            raise ValueError("vector dimension must be >= 1")
        for v in self.vectors:
            if len(v) != dim:
                raise DimensionMismatch("all vectors must share one dimension")
        object.__setattr__(self, "_index", {w: i for i, w in enumerate(self.vocab)})

    @property
    def dimension(self) -> int:
        return len(self.vectors[0])

    def index_of(self, word: str) -> int:
        try:
            return self._index[word]
        except KeyError:
            raise UnknownReferenceWord(f"{word!r} not in vocabulary") from None

    def vector(self, word: str) -> tuple[float, ...]:
        return self.vectors[self.index_of(word)]

    @classmethod
    def from_text(cls, path: str | Path) -> "EmbeddingTable":
        """Load "word v1 v2 ... vd" lines; blank lines are skipped."""
        vocab: list[str] = []
        vectors: list[tuple[float, ...]] = []
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                parts = line.split()
                if not parts:
                    continue
                if len(parts) < 2:
                    raise ValueError(f"{path}:{lineno}: need a word and at least one value")
                vocab.append(parts[0])
                vectors.append(tuple(float(x) for x in parts[1:]))
        return cls(vocab=tuple(vocab), vectors=tuple(vectors))


@dataclass(frozen=True)
class PredictedDistribution:
    """One decoding step's probabilities over the vocabulary."""

    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        if any(p < 0.0 for p in self.probs):
            raise ValueError("probabilities must be non-negative")
        total = sum(self.probs)
        if abs(total - 1.0) > _PROB_SUM_TOLERANCE:
            raise ValueError(f"probabilities sum to {total!r}, not 1")

    def __len__(self) -> int:
        return len(self.probs)


def euclidean_distance(u: Sequence[float], v: Sequence[float]) -> float:
    if len(u) != len(v):
        raise DimensionMismatch(f"dimensions {len(u)} and {len(v)} differ")
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(u, v)))


def _check_steps(
    dists: Sequence[PredictedDistribution],
    reference: Sequence[str],
    table: EmbeddingTable,
) -> None:
    if len(dists) != len(reference):
        raise LengthMismatch(
            f"{len(dists)} distributions for {len(reference)} reference words"
        )
    k = len(table.vocab)
    for i, d in enumerate(dists):
        if len(d) != k:
            raise LengthMismatch(f"step {i}: distribution over {len(d)} words, vocabulary has {k}")


def embedding_distance_loss(
    dists: Sequence[PredictedDistribution],
    reference: Sequence[str],
    table: EmbeddingTable,
) -> float:
    """Sum over steps of the probability-weighted distance to the reference word.

    loss = sum_i sum_k probs_i[k] * distance(vector_k, vector(reference_i)).
    Zero exactly when every step is a point mass on its reference word (given
    pairwise-distinct embedding vectors); additive over concatenated steps.
    """
    _check_steps(dists, reference, table)
    distance_rows: dict[str, list[float]] = {}
    loss = 0.0
    for dist, word in zip(dists, reference):
        row = distance_rows.get(word)
        if row is None:
            anchor = table.vector(word)
            row = [euclidean_distance(vec, anchor) for vec in table.vectors]
            distance_rows[word] = row
        loss += sum(p * d for p, d in zip(dist.probs, row))
    return loss


def cross_entropy_loss(
    dists: Sequence[PredictedDistribution],
    reference: Sequence[str],
    table: EmbeddingTable,
    per_step_mean: bool = False,
) -> float:
    """Negative log-likelihood of the reference words, probabilities clamped at 1e-12."""
    _check_steps(dists, reference, table)
    total = 0.0
    for dist, word in zip(dists, reference):
        p = dist.probs[table.index_of(word)]
        total -= math.log(max(p, _EPSILON))
    if per_step_mean and reference:
        return total / len(reference)
    return total
