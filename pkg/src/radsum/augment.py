"""Field-order permutation schedules and permuted input rendering.

Training inputs are built by concatenating "HEADER: body" blocks for a set of
input sections; augmentation reorders those blocks per epoch (or per example)
from a seeded generator. Reordering never alters content, so the token
multiset of a rendered input is invariant under the permutation choice.
"""
from __future__ import annotations

import hashlib
import json
import logging
import random
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Sequence

from .errors import InvalidEpochRange, MissingField, MissingImpression, RadsumError
from .reports import COMPARISON, FINDINGS, IMPRESSION, INDICATION, TECHNIQUE, RadiologyReport, SectionName

logger = logging.getLogger(__name__)

# HISTORY and EXAMINATION are parsed but intentionally not default inputs.
DEFAULT_INPUT_FIELDS = (FINDINGS, INDICATION, TECHNIQUE, COMPARISON)
DEFAULT_EPOCHS = 6
DEFAULT_SHUFFLE_START = 3
DEFAULT_TEMPLATE = "{header}: {body}"
DEFAULT_SEPARATOR = " "


class ShuffleMode(Enum):
    PER_EPOCH = "per-epoch"
    PER_EXAMPLE = "per-example"


@dataclass(frozen=True)
class ExamplePair:
    """Rendered model input plus the target impression."""

    pair_id: str
    input_text: str
    target_text: str


@dataclass(frozen=True)
class PermutationSchedule:
    """Seeded epoch -> field-ordering assignment.

    Epochs before shuffle_start always map to the identity ordering. In
    PER_EPOCH mode the shuffled epochs are drawn up front and stored in
    assignments; in PER_EXAMPLE mode each record's ordering is derived from
    (seed, epoch, pair_id) so any single record is recomputable on its own.
    """

    fields: tuple[SectionName, ...]
    epochs: int
    shuffle_start: int
    seed: int
    mode: ShuffleMode
    assignments: tuple[tuple[int, ...], ...] = ()

    def permutation_for(self, epoch: int, pair_id: str | None = None) -> tuple[int, ...]:
        if not 0 <= epoch < self.epochs:
            raise InvalidEpochRange(f"epoch {epoch} outside [0, {self.epochs})")
        identity = tuple(range(len(self.fields)))
        if epoch < self.shuffle_start:
            return identity
        if self.mode is ShuffleMode.PER_EPOCH:
            return self.assignments[epoch]
        if pair_id is None:
            raise ValueError("PER_EXAMPLE schedules need a pair_id")
        return _derived_permutation(self.seed, epoch, pair_id, len(self.fields))

    def to_dict(self) -> dict:
        return {
            "fields": [f.text for f in self.fields],
            "epochs": self.epochs,
            "shuffle_start": self.shuffle_start,
            "seed": self.seed,
            "mode": self.mode.value,
            "assignments": [list(p) for p in self.assignments],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PermutationSchedule":
        return cls(
            fields=tuple(SectionName(f) for f in d["fields"]),
            epochs=d["epochs"],
            shuffle_start=d["shuffle_start"],
            seed=d["seed"],
            mode=ShuffleMode(d["mode"]),
            assignments=tuple(tuple(p) for p in d.get("assignments", [])),
        )


def _derived_permutation(seed: int, epoch: int, pair_id: str, n: int) -> tuple[int, ...]:
    digest = hashlib.sha256(f"{seed}|{epoch}|{pair_id}".encode("utf-8")).digest()
    rng = random.Random(int.from_bytes(digest[:8], "little"))
    perm = list(range(n))
    rng.shuffle(perm)
    return tuple(perm)


def make_schedule(
    fields: Sequence[SectionName] = DEFAULT_INPUT_FIELDS,
    epochs: int = DEFAULT_EPOCHS,
    shuffle_start: int = DEFAULT_SHUFFLE_START,
    seed: int = 0,
    mode: ShuffleMode = ShuffleMode.PER_EPOCH,
) -> PermutationSchedule:
    """Build a schedule; identical arguments always yield identical schedules.

    Shuffled epochs draw independent uniform permutations from one seeded
    generator (repeats across epochs are possible by chance).
    """
    if epochs < 1:
        raise ValueError(f"epochs must be >= 1, got {epochs}")
    if not fields:
        raise ValueError("at least one input field is required")
    if not 0 <= shuffle_start <= epochs:
        raise InvalidEpochRange(
            f"shuffle_start {shuffle_start} outside [0, {epochs}]"
        )
    fields = tuple(fields)
    assignments: tuple[tuple[int, ...], ...] = ()
    if mode is ShuffleMode.PER_EPOCH:
        rng = random.Random(seed)
        identity = tuple(range(len(fields)))
        rows = []
        for epoch in range(epochs):
            if epoch < shuffle_start:
                rows.append(identity)
            else:
                perm = list(identity)
                rng.shuffle(perm)
                rows.append(tuple(perm))
        assignments = tuple(rows)
    return PermutationSchedule(
        fields=fields,
        epochs=epochs,
        shuffle_start=shuffle_start,
        seed=seed,
        mode=mode,
        assignments=assignments,
    )


def render_input(
    report: RadiologyReport,
    permutation: Sequence[int],
    input_fields: Sequence[SectionName] = DEFAULT_INPUT_FIELDS,
    template: str = DEFAULT_TEMPLATE,
    separator: str = DEFAULT_SEPARATOR,
    strict: bool = False,
) -> ExamplePair:
    """Render one permuted "HEADER: body" input with the impression as target.

    Fields absent from the report are skipped (strict mode raises
    MissingField instead). The impression is never allowed among the input
    fields, so the target can never leak into input_text.
    """
    if IMPRESSION in input_fields:
        raise ValueError("IMPRESSION cannot be an input field")
    if sorted(permutation) != list(range(len(input_fields))):
        raise ValueError(f"permutation {permutation!r} is not a bijection on the input fields")
    if not report.has_section(IMPRESSION):
        raise MissingImpression(f"report {report.report_id!r} has no impression")
    blocks = []
    for idx in permutation:
        name = input_fields[idx]
        if not report.has_section(name):
            if strict:
                raise MissingField(f"report {report.report_id!r} lacks {name}")
            continue
        blocks.append(template.format(header=name.text, body=report.sections[name]))
    return ExamplePair(
        pair_id=report.report_id,
        input_text=separator.join(blocks),
        target_text=report.sections[IMPRESSION],
    )


def expand_corpus(
    corpus: Sequence[RadiologyReport],
    schedule: PermutationSchedule,
    input_fields: Sequence[SectionName] | None = None,
    template: str = DEFAULT_TEMPLATE,
    separator: str = DEFAULT_SEPARATOR,
    strict: bool = False,
    fail_fast: bool = True,
) -> Iterator[tuple[int, ExamplePair]]:
    """Yield (epoch, pair) for every epoch x report combination, in order.

    Per-record rendering errors either propagate (fail_fast) or skip the
    record with a warning.
    """
    if input_fields is None:
        input_fields = schedule.fields
    corpus = list(corpus)
    for epoch in range(schedule.epochs):
        for report in corpus:
            perm = schedule.permutation_for(epoch, report.report_id)
            try:
                pair = render_input(
                    report, perm, input_fields, template=template,
                    separator=separator, strict=strict,
                )
            except RadsumError as exc:
                if fail_fast:
                    raise
                logger.warning("skipping %s at epoch %d: %s", report.report_id, epoch, exc)
                continue
            yield epoch, pair


def write_pairs_jsonl(
    expanded: Iterable[tuple[int, ExamplePair]], path
) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for epoch, pair in expanded:
            fh.write(
                json.dumps(
                    {
                        "epoch": epoch,
                        "pair_id": pair.pair_id,
                        "input": pair.input_text,
                        "target": pair.target_text,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
            n += 1
    return n
