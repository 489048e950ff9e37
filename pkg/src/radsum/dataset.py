"""Corpus filtering, train/test splitting, batch collation and token statistics."""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .augment import ExamplePair
from .errors import CorpusTooSmall, EmptyBatch, InvalidRatio
from .reports import IMPRESSION, RadiologyReport, SectionName
from .textnorm import NormalizationConfig, normalize, tokenize

START_MARKER = "<s>"
END_MARKER = "</s>"
PAD_MARKER = "<pad>"


@dataclass(frozen=True)
class SplitResult:
    """Deterministic train/test partition of a corpus by report id."""

    train_ids: tuple[str, ...]
    test_ids: tuple[str, ...]
    seed: int
    ratio: float

    def to_dict(self) -> dict:
        return {
            "train": list(self.train_ids),
            "test": list(self.test_ids),
            "seed": self.seed,
            "ratio": self.ratio,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "SplitResult":
        return cls(
            train_ids=tuple(d["train"]),
            test_ids=tuple(d["test"]),
            seed=d["seed"],
            ratio=d["ratio"],
        )


def filter_complete(
    corpus: Sequence[RadiologyReport],
    required_fields: Sequence[SectionName] = (),
) -> tuple[list[RadiologyReport], dict[SectionName, int]]:
    """Keep reports that carry IMPRESSION and every required field, non-empty.

    Returns the kept reports plus a drop report: each dropped report is
    counted once, under its first missing required field (IMPRESSION is
    checked last), so the counts sum to exactly the number dropped.
    """
    kept: list[RadiologyReport] = []
    drops: dict[SectionName, int] = {}
    check_order = list(required_fields) + [IMPRESSION]
    for report in corpus:
        missing = next((f for f in check_order if not report.has_section(f)), None)
        if missing is None:
            kept.append(report)
        else:
            drops[missing] = drops.get(missing, 0) + 1
    return kept, drops


def split(corpus: Sequence, ratio: float, seed: int) -> SplitResult:
    """Shuffle ids with a seeded generator; first round(ratio * N) go to train.

    The split is at report level. Rounding is half-up. Accepts reports or
    plain id strings.
    """
    if not 0.0 < ratio < 1.0:
        raise InvalidRatio(f"ratio must be in (0, 1), got {ratio}")
    ids = [item.report_id if isinstance(item, RadiologyReport) else str(item) for item in corpus]
    n = len(ids)
    if n < 2:
        raise CorpusTooSmall(f"need at least 2 reports, got {n}")
    rng = random.Random(seed)
    rng.shuffle(ids)
    n_train = int(ratio * n + 0.5)
    return SplitResult(
        train_ids=tuple(ids[:n_train]),
        test_ids=tuple(ids[n_train:]),
        seed=seed,
        ratio=ratio,
    )


@dataclass(frozen=True)
class CollatedBatch:
    """Token-string batch for an external sequence-to-sequence trainer.

    All rows of a matrix share one length, masks are 0 exactly where the pad
    marker sits, and decoder_input[i][t + 1] == decoder_target[i][t] wherever
    both positions are real (the teacher-forcing shift).
    """

    pair_ids: tuple[str, ...]
    input_token_matrix: tuple[tuple[str, ...], ...]
    input_mask: tuple[tuple[int, ...], ...]
    decoder_input: tuple[tuple[str, ...], ...]
    decoder_target: tuple[tuple[str, ...], ...]
    target_mask: tuple[tuple[int, ...], ...]
    n_truncated_inputs: int
    n_truncated_targets: int

    def to_dict(self) -> dict:
        return {
            "pair_ids": list(self.pair_ids),
            "input_tokens": [list(r) for r in self.input_token_matrix],
            "input_mask": [list(r) for r in self.input_mask],
            "decoder_input": [list(r) for r in self.decoder_input],
            "decoder_target": [list(r) for r in self.decoder_target],
            "target_mask": [list(r) for r in self.target_mask],
            "n_truncated_inputs": self.n_truncated_inputs,
            "n_truncated_targets": self.n_truncated_targets,
        }


def _pad(rows: list[list[str]], pad: str) -> tuple[tuple, tuple]:
    width = max(len(r) for r in rows)
    padded = []
    masks = []
    for r in rows:
        fill = width - len(r)
        padded.append(tuple(r) + (pad,) * fill)
        masks.append((1,) * len(r) + (0,) * fill)
    return tuple(padded), tuple(masks)


def collate(
    pairs: Sequence[ExamplePair],
    max_input_len: int,
    max_target_len: int,
    norm_cfg: NormalizationConfig = NormalizationConfig(),
    start_marker: str = START_MARKER,
    end_marker: str = END_MARKER,
    pad_marker: str = PAD_MARKER,
) -> CollatedBatch:
    """Tokenize, truncate to the caps, pad to the batch max and shift targets.

    Caps apply to the raw token lists; decoder rows carry one extra marker
    position. Truncations are counted in the batch metadata.
    """
    if not pairs:
        raise EmptyBatch("no pairs to collate")
    if max_input_len < 2 or max_target_len < 2:
        raise ValueError("length caps must be >= 2")
    inputs: list[list[str]] = []
    dec_in: list[list[str]] = []
    dec_tgt: list[list[str]] = []
    n_trunc_in = 0
    n_trunc_tgt = 0
    for pair in pairs:
        in_tokens = list(tokenize(normalize(pair.input_text, norm_cfg)))
        if len(in_tokens) > max_input_len:
            in_tokens = in_tokens[:max_input_len]
            n_trunc_in += 1
        tgt_tokens = list(tokenize(normalize(pair.target_text, norm_cfg)))
        if len(tgt_tokens) > max_target_len:
            tgt_tokens = tgt_tokens[:max_target_len]
            n_trunc_tgt += 1
        inputs.append(in_tokens)
        dec_in.append([start_marker] + tgt_tokens)
        dec_tgt.append(tgt_tokens + [end_marker])
    input_matrix, input_mask = _pad(inputs, pad_marker)
    dec_in_matrix, _ = _pad(dec_in, pad_marker)
    dec_tgt_matrix, target_mask = _pad(dec_tgt, pad_marker)
    return CollatedBatch(
        pair_ids=tuple(p.pair_id for p in pairs),
        input_token_matrix=input_matrix,
        input_mask=input_mask,
        decoder_input=dec_in_matrix,
        decoder_target=dec_tgt_matrix,
        target_mask=target_mask,
        n_truncated_inputs=n_trunc_in,
        n_truncated_targets=n_trunc_tgt,
    )


@dataclass(frozen=True)
class FieldStats:
    """Token-count distribution for one field (or the combined selection)."""

    n: int
    minimum: int
    mean: float
    median: float
    p95: float
    maximum: int

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "min": self.minimum,
            "mean": self.mean,
            "median": self.median,
            "p95": self.p95,
            "max": self.maximum,
        }


def _distribution(counts: Sequence[int]) -> FieldStats:
    arr = np.asarray(counts, dtype=float)
    return FieldStats(
        n=len(counts),
        minimum=int(arr.min()),
        mean=float(arr.mean()),
        median=float(np.median(arr)),
        p95=float(np.percentile(arr, 95)),
        maximum=int(arr.max()),
    )


@dataclass(frozen=True)
class CorpusStats:
    per_field: dict[SectionName, FieldStats]
    combined: FieldStats | None
    combined_counts: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "per_field": {name.text: st.to_dict() for name, st in self.per_field.items()},
            "combined": self.combined.to_dict() if self.combined else None,
        }


def corpus_stats(
    corpus: Sequence[RadiologyReport],
    fields: Sequence[SectionName],
    norm_cfg: NormalizationConfig = NormalizationConfig(),
) -> CorpusStats:
    """Word-token count distributions per field plus the per-report sum.

    Per-field stats cover the reports that carry the field; the combined
    distribution sums the selected fields for every report (absent fields
    contribute zero). Counts are word tokens, not model subword tokens, so
    they understate subword-based context budgets.
    """
    per_field_counts: dict[SectionName, list[int]] = {f: [] for f in fields}
    combined: list[int] = []
    for report in corpus:
        total = 0
        for f in fields:
            if report.has_section(f):
                count = len(tokenize(normalize(report.sections[f], norm_cfg)))
                per_field_counts[f].append(count)
                total += count
        combined.append(total)
    return CorpusStats(
        per_field={f: _distribution(c) for f, c in per_field_counts.items() if c},
        combined=_distribution(combined) if combined else None,
        combined_counts=tuple(combined),
    )


def write_split_manifest(result: SplitResult, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(result.to_dict(), ensure_ascii=False) + "\n")
