"""ROUGE-N, ROUGE-L and ROUGE-Lsum with corpus-level aggregation.

Scores live in [0, 1]; display layers multiply by 100. Precision divides by
candidate length and recall by reference length (the conventional assignment;
swapping the two denominators leaves F1 unchanged, so the headline metric is
insensitive to that choice).

The LCS kernel is a word-packed row DP (bit-parallel): one machine word per
row chunk, O(|a|*|b|/w) time and O(min(|a|,|b|)) memory with the bit row laid
over the shorter sequence. The test suite checks it exhaustively against a
naive recursive oracle.

Scoring text pairs ignores tokens that contain no alphanumeric character, for
parity with the standard ROUGE tokenization (which drops punctuation).
"""
from __future__ import annotations

import csv
import json
import multiprocessing
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyScoreList, InvalidN
from .textnorm import (
    DEFAULT_ABBREVIATIONS,
    NormalizationConfig,
    normalize,
    split_sentences,
    word_tokens,
)

METRICS = ("rouge1", "rouge2", "rougeL", "rougeLsum")
COMPONENTS = ("precision", "recall", "f1")


@dataclass(frozen=True)
class RougeScore:
    """Precision/recall/F1 triple for one candidate/reference pair."""

    precision: float
    recall: float
    f1: float

    @classmethod
    def from_precision_recall(cls, precision: float, recall: float) -> "RougeScore":
        denom = precision + recall
        f1 = 2.0 * precision * recall / denom if denom > 0 else 0.0
        return cls(precision, recall, f1)

    @classmethod
    def zero(cls) -> "RougeScore":
        return cls(0.0, 0.0, 0.0)

    def to_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


def lcs_length(a: Sequence, b: Sequence) -> int:
    """Length of the longest common subsequence of two token sequences.

    Bit rows span the shorter sequence, so memory is O(min(|a|, |b|)).
    """
    if len(a) < len(b):
        a, b = b, a
    n = len(b)
    if n == 0 or len(a) == 0:
        return 0
    masks: dict = {}
    bit = 1
    for tok in b:
        masks[tok] = masks.get(tok, 0) | bit
        bit <<= 1
    full = (1 << n) - 1
    row = full
    get = masks.get
    for tok in a:
        m = get(tok)
        if m is not None:
            u = row & m
            row = ((row + u) | (row - u)) & full
    return n - row.bit_count()


def _position_masks(seq: Sequence) -> dict:
    """Per-token bitmask of the positions it occupies in seq."""
    masks: dict = {}
    bit = 1
    for tok in seq:
        masks[tok] = masks.get(tok, 0) | bit
        bit <<= 1
    return masks


def _lcs_indices(ref: Sequence, cand: Sequence, masks: dict | None = None) -> list[int]:
    """Reference indices of one canonical LCS of (cand, ref).

    Bit rows are laid over the reference; the backtrack walks dp(i, j) =
    LCS(cand[:i], ref[:j]), recovered from the rows by popcount: dp(i, j) is
    the number of zero bits of row i below bit j. On a token match the
    reference index is taken; ties between the two shrink moves prefer the
    candidate side, matching the textbook table backtrack. Callers scoring
    one reference against many candidates pass precomputed position masks.
    """
    m, n = len(ref), len(cand)
    if not m or not n:
        return []
    if masks is None:
        masks = _position_masks(ref)
    full = (1 << m) - 1
    rows = [full]
    row = full
    get = masks.get
    for tok in cand:
        mk = get(tok)
        if mk:
            u = row & mk
            row = ((row + u) | (row - u)) & full
        rows.append(row)
    out: list[int] = []
    i, j = n, m
    while i and j:
        if cand[i - 1] == ref[j - 1]:
            out.append(j - 1)
            i -= 1
            j -= 1
        else:
            mask = (1 << j) - 1
            up = j - (rows[i - 1] & mask).bit_count()
            left = (j - 1) - (rows[i] & (mask >> 1)).bit_count()
            if up >= left:
                i -= 1
            else:
                j -= 1
    out.reverse()
    return out


def _clipped_overlap(cand_grams: Counter, ref_grams: Counter) -> int:
    overlap = 0
    for gram, c in cand_grams.items():
        r = ref_grams.get(gram)
        if r:
            overlap += c if c < r else r
    return overlap


def rouge_n(candidate: Sequence, reference: Sequence, n: int) -> RougeScore:
    """N-gram overlap score with clipped (multiset) counting.

    Either side shorter than n tokens scores zero.
    """
    if not isinstance(n, int) or n < 1:
        raise InvalidN(f"n must be a positive integer, got {n!r}")
    nc, nr = len(candidate), len(reference)
    if nc < n or nr < n:
        return RougeScore.zero()
    cand_grams = Counter(tuple(candidate[i:i + n]) for i in range(nc - n + 1))
    ref_grams = Counter(tuple(reference[i:i + n]) for i in range(nr - n + 1))
    overlap = _clipped_overlap(cand_grams, ref_grams)
    return RougeScore.from_precision_recall(overlap / (nc - n + 1), overlap / (nr - n + 1))


def rouge_l(candidate: Sequence, reference: Sequence) -> RougeScore:
    """Longest-common-subsequence score over whole token sequences."""
    nc, nr = len(candidate), len(reference)
    if nc == 0 or nr == 0:
        return RougeScore.zero()
    lcs = lcs_length(candidate, reference)
    return RougeScore.from_precision_recall(lcs / nc, lcs / nr)


def metric_tokens(text: str) -> list[str]:
    """Tokens used for scoring: detached punctuation-only tokens are dropped."""
    # str.isalnum() short-circuits the common pure-word case; the generator
    # handles mixed tokens like "r/o" or "3.5".
    return [
        t for t in word_tokens(text)
        if t.isalnum() or any(ch.isalnum() for ch in t)
    ]


def _metric_sentence_tokens(text: str, abbreviations: frozenset[str]) -> list[list[str]]:
    sents = []
    for s in split_sentences(text, abbreviations):
        toks = metric_tokens(s)
        if toks:
            sents.append(toks)
    return sents


def _lsum_scores(cand_sents: list[list], ref_sents: list[list]) -> RougeScore:
    """Union-LCS sentence-level score with clipped token crediting.

    For each reference sentence the union of canonical LCS positions against
    every candidate sentence is taken; each hit consumes one count of its
    token on both sides, so no token is credited more than it occurs.
    """
    m = sum(len(s) for s in ref_sents)
    n = sum(len(s) for s in cand_sents)
    if not m or not n:
        return RougeScore.zero()
    ref_counts = Counter()
    cand_counts = Counter()
    for s in ref_sents:
        ref_counts.update(s)
    for s in cand_sents:
        cand_counts.update(s)
    hits = 0
    for ref in ref_sents:
        masks = _position_masks(ref)
        union: set[int] = set()
        for cand in cand_sents:
            union.update(_lcs_indices(ref, cand, masks))
        for idx in sorted(union):
            tok = ref[idx]
            if ref_counts[tok] > 0 and cand_counts[tok] > 0:
                hits += 1
                ref_counts[tok] -= 1
                cand_counts[tok] -= 1
    return RougeScore.from_precision_recall(hits / n, hits / m)


def rouge_lsum(
    candidate: str,
    reference: str,
    abbreviations: frozenset[str] = DEFAULT_ABBREVIATIONS,
) -> RougeScore:
    """Sentence-level ROUGE-L over two texts.

    Both texts are sentence-split and tokenized here; on single-sentence
    inputs the result equals rouge_l on the same token lists.
    """
    return _lsum_scores(
        _metric_sentence_tokens(candidate, abbreviations),
        _metric_sentence_tokens(reference, abbreviations),
    )


# --- aggregation --------------------------------------------------------------

@dataclass(frozen=True)
class AggregateScore:
    """Arithmetic mean per component, with optional bootstrap interval bounds."""

    mean: RougeScore
    intervals: dict[str, tuple[float, float]] | None = None

    def to_dict(self) -> dict:
        d: dict = dict(self.mean.to_dict())
        if self.intervals is not None:
            d["ci"] = {k: list(v) for k, v in self.intervals.items()}
        return d


def aggregate(
    scores: Sequence[RougeScore],
    *,
    bootstrap: bool = False,
    resamples: int = 1000,
    seed: int = 0,
    confidence: float = 0.95,
) -> AggregateScore:
    """Mean of each component; optional seeded bootstrap percentile interval."""
    if not scores:
        raise EmptyScoreList("cannot aggregate zero scores")
    n = len(scores)
    mean = RougeScore(
        precision=sum(s.precision for s in scores) / n,
        recall=sum(s.recall for s in scores) / n,
        f1=sum(s.f1 for s in scores) / n,
    )
    if not bootstrap:
        return AggregateScore(mean)
    data = np.array([[s.precision, s.recall, s.f1] for s in scores], dtype=float)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, n, size=(resamples, n))
    means = data[idx].mean(axis=1)
    alpha = (1.0 - confidence) / 2.0
    lo = np.percentile(means, 100.0 * alpha, axis=0)
    hi = np.percentile(means, 100.0 * (1.0 - alpha), axis=0)
    intervals = {
        comp: (float(lo[k]), float(hi[k])) for k, comp in enumerate(COMPONENTS)
    }
    return AggregateScore(mean, intervals)


# --- corpus scoring ------------------------------------------------------------

@dataclass(frozen=True)
class PairScores:
    pair_id: str
    rouge1: RougeScore
    rouge2: RougeScore
    rougeL: RougeScore
    rougeLsum: RougeScore

    def get(self, metric: str) -> RougeScore:
        return getattr(self, metric)


@dataclass(frozen=True)
class RougeReport:
    """Per-pair scores plus the corpus-level aggregate of every metric."""

    per_pair: tuple[PairScores, ...]
    aggregate: dict[str, AggregateScore]

    def to_dict(self) -> dict:
        return {
            "pairs": [
                {
                    "pair_id": p.pair_id,
                    **{m: p.get(m).to_dict() for m in METRICS},
                }
                for p in self.per_pair
            ],
            "aggregate": {m: self.aggregate[m].to_dict() for m in METRICS},
        }


def _score_record(record: tuple) -> PairScores:
    pair_id, candidate, reference, cfg, abbreviations = record
    cand_sents = _metric_sentence_tokens(normalize(candidate, cfg), abbreviations)
    ref_sents = _metric_sentence_tokens(normalize(reference, cfg), abbreviations)
    # Token interning: every metric below only compares tokens for equality,
    # so bijective relabeling to small ints cannot change any score.
    intern: dict[str, int] = {}
    setd = intern.setdefault
    cs = [[setd(t, len(intern)) for t in s] for s in cand_sents]
    rs = [[setd(t, len(intern)) for t in s] for s in ref_sents]
    cand_flat = [t for s in cs for t in s]
    ref_flat = [t for s in rs for t in s]
    return PairScores(
        pair_id=pair_id,
        rouge1=rouge_n(cand_flat, ref_flat, 1),
        rouge2=rouge_n(cand_flat, ref_flat, 2),
        rougeL=rouge_l(cand_flat, ref_flat),
        rougeLsum=_lsum_scores(cs, rs),
    )


def score_pairs(
    pairs: Iterable[tuple[str, str, str]],
    norm_cfg: NormalizationConfig = NormalizationConfig(),
    *,
    workers: int = 1,
    bootstrap: bool = False,
    resamples: int = 1000,
    seed: int = 0,
    confidence: float = 0.95,
    abbreviations: frozenset[str] = DEFAULT_ABBREVIATIONS,
) -> RougeReport:
    """Score (pair_id, candidate, reference) records and aggregate.

    Pairs are scored independently (worker processes when workers > 1) and
    collected in input order, so results are identical at any worker count.
    """
    records = [(pid, cand, ref, norm_cfg, abbreviations) for pid, cand, ref in pairs]
    if not records:
        raise EmptyScoreList("no pairs to score")
    if workers <= 1:
        per_pair = [_score_record(r) for r in records]
    else:
        chunk = max(1, len(records) // (workers * 4))
        with multiprocessing.Pool(workers) as pool:
            per_pair = pool.map(_score_record, records, chunksize=chunk)
    agg = {
        m: aggregate(
            [p.get(m) for p in per_pair],
            bootstrap=bootstrap,
            resamples=resamples,
            seed=seed,
            confidence=confidence,
        )
        for m in METRICS
    }
    return RougeReport(per_pair=tuple(per_pair), aggregate=agg)


def read_pairs_jsonl(path: str | Path) -> list[tuple[str, str, str]]:
    """Read {"pair_id", "candidate", "reference"} records."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rec = json.loads(line)
                out.append((str(rec["pair_id"]), rec["candidate"], rec["reference"]))
    return out


def write_pair_csv(report: RougeReport, path: str | Path) -> None:
    """Per-pair rows: one column per metric component."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        header = ["pair_id"]
        for m in METRICS:
            header.extend(f"{m}_{c}" for c in COMPONENTS)
        writer.writerow(header)
        for p in report.per_pair:
            row: list = [p.pair_id]
            for m in METRICS:
                s = p.get(m)
                row.extend([f"{s.precision:.6f}", f"{s.recall:.6f}", f"{s.f1:.6f}"])
            writer.writerow(row)


def format_display_table(report: RougeReport) -> str:
    """Aggregate table on the conventional 0-100 display scale."""
    lines = [f"{'metric':<10} {'precision':>10} {'recall':>10} {'f1':>10}"]
    for m in METRICS:
        s = report.aggregate[m].mean
        lines.append(
            f"{m:<10} {100 * s.precision:>10.2f} {100 * s.recall:>10.2f} {100 * s.f1:>10.2f}"
        )
    return "\n".join(lines)
