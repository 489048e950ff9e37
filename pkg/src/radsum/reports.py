"""Radiology-report ingestion: section parsing and disease-label metadata.

A report is parsed into an ordered map of named sections. The header grammar
is a line-initial run of uppercase letters/spaces immediately followed by a
colon (leading blanks tolerated, since the character class itself admits
spaces); the body runs until the next header or end of input. Text before the
first header belongs to no section. Censoring markers (runs of 3+ underscores)
are preserved verbatim in bodies; only textnorm.normalize strips them.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .errors import EmptyInput, InvalidLabelValue, NoSections

logger = logging.getLogger(__name__)

_HEADER_RE = re.compile(r"^[ \t]*(?P<name>[A-Z][A-Z ]*?)[ ]*:", re.MULTILINE)

_KNOWN_SECTION_NAMES = (
    "FINDINGS",
    "IMPRESSION",
    "INDICATION",
    "TECHNIQUE",
    "COMPARISON",
    "HISTORY",
    "EXAMINATION",
)


@dataclass(frozen=True)
class SectionName:
    """A section header label; comparison is case-insensitive.

    Labels outside the known set are carried verbatim (uppercased) so that
    unrecognized headers survive a parse/serialize round trip.
    """

    text: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "text", self.text.strip().upper())

    @property
    def is_known(self) -> bool:
        return self.text in _KNOWN_SECTION_NAMES

    def __str__(self) -> str:
        return self.text


FINDINGS = SectionName("FINDINGS")
IMPRESSION = SectionName("IMPRESSION")
INDICATION = SectionName("INDICATION")
TECHNIQUE = SectionName("TECHNIQUE")
COMPARISON = SectionName("COMPARISON")
HISTORY = SectionName("HISTORY")
EXAMINATION = SectionName("EXAMINATION")

KNOWN_SECTIONS = (FINDINGS, IMPRESSION, INDICATION, TECHNIQUE, COMPARISON, HISTORY, EXAMINATION)


class LabelValue(Enum):
    """Disease-label polarity.

    Numeric interchange follows the source metadata convention used here:
    Indicated=1, Negated=-1, Uncertain=0, Absent=missing. Note this differs
    from the common CheXpert convention where -1 means "uncertain".
    """

    INDICATED = "indicated"
    NEGATED = "negated"
    UNCERTAIN = "uncertain"
    ABSENT = "absent"

    @classmethod
    def from_numeric(cls, value) -> "LabelValue":
        if value is None:
            return cls.ABSENT
        if isinstance(value, str):
            value = value.strip()
            if not value:
                return cls.ABSENT
            try:
                value = float(value)
            except ValueError:
                raise InvalidLabelValue(f"non-numeric label value {value!r}")
        if isinstance(value, float) and math.isnan(value):
            return cls.ABSENT
        if value == 1:
            return cls.INDICATED
        if value == -1:
            return cls.NEGATED
        if value == 0:
            return cls.UNCERTAIN
        raise InvalidLabelValue(f"label value {value!r} outside {{1, -1, 0, missing}}")

    def to_numeric(self):
        return {"indicated": 1, "negated": -1, "uncertain": 0, "absent": None}[self.value]


@dataclass(frozen=True)
class RadiologyReport:
    """One parsed report. Treated as immutable; safe to share across workers."""

    report_id: str
    raw_text: str
    sections: dict[SectionName, str]
    labels: dict[str, LabelValue] = field(default_factory=dict)

    def has_section(self, name: SectionName) -> bool:
        body = self.sections.get(name)
        return bool(body and body.strip())

    def section(self, name: SectionName) -> str | None:
        return self.sections.get(name)


def parse_report(
    report_id: str,
    raw_text: str,
    aliases: Mapping[str, str] | None = None,
) -> RadiologyReport:
    """Parse free text into sections; labels are left empty (see extract_labels).

    aliases maps extra header spellings to canonical names, e.g.
    {"CONCLUSION": "IMPRESSION"}. Headers with empty bodies are dropped; on a
    duplicate header the first body wins and a warning is logged.

    Raises EmptyInput when raw_text trims to nothing and NoSections when no
    header is detected (the caller decides whether to discard such input).
    """
    if not raw_text or not raw_text.strip():
        raise EmptyInput(f"report {report_id!r}: empty text")
    matches = list(_HEADER_RE.finditer(raw_text))
    if not matches:
        raise NoSections(f"report {report_id!r}: no section header found")
    alias_map = {k.strip().upper(): v.strip().upper() for k, v in (aliases or {}).items()}
    sections: dict[SectionName, str] = {}
    for i, m in enumerate(matches):
        raw_name = m.group("name")
        name = SectionName(alias_map.get(raw_name.strip(), raw_name))
        end = matches[i + 1].start() if i + 1 < len(matches) else len(raw_text)
        body = raw_text[m.end():end].strip()
        if not body:
            continue
        if name in sections:
            logger.warning("report %s: duplicate section %s, keeping first", report_id, name)
            continue
        sections[name] = body
    if not sections:
        raise NoSections(f"report {report_id!r}: headers present but all bodies empty")
    return RadiologyReport(report_id=report_id, raw_text=raw_text, sections=sections)


def extract_labels(
    report: RadiologyReport, metadata_row: Mapping[str, object]
) -> RadiologyReport:
    """Return a copy of the report with disease labels from a metadata row.

    Values must be 1, -1, 0 or missing (None/NaN/empty string); missing
    entries are omitted from the label map. Anything else raises
    InvalidLabelValue.
    """
    labels: dict[str, LabelValue] = {}
    for disease, value in metadata_row.items():
        label = LabelValue.from_numeric(value)
        if label is not LabelValue.ABSENT:
            labels[disease] = label
    return replace(report, labels=labels)


def is_no_findings(report: RadiologyReport, indicator_key: str = "No Finding") -> bool:
    """True when the report is normal: explicit indicator, or all labels negated.

    The indicator key (default "No Finding", configurable) wins when present
    and Indicated. Otherwise every remaining present label must be Negated;
    an empty label map is not treated as evidence of normality.
    """
    if indicator_key in report.labels:
        if report.labels[indicator_key] is LabelValue.INDICATED:
            return True
    rest = {
        k: v
        for k, v in report.labels.items()
        if k != indicator_key and v is not LabelValue.ABSENT
    }
    return bool(rest) and all(v is LabelValue.NEGATED for v in rest.values())


# --- serialization -----------------------------------------------------------

def report_to_dict(report: RadiologyReport) -> dict:
    return {
        "report_id": report.report_id,
        "raw_text": report.raw_text,
        "sections": {name.text: body for name, body in report.sections.items()},
        "labels": {k: v.to_numeric() for k, v in report.labels.items()},
    }


def report_from_dict(d: Mapping) -> RadiologyReport:
    return RadiologyReport(
        report_id=d["report_id"],
        raw_text=d.get("raw_text", ""),
        sections={SectionName(k): v for k, v in d.get("sections", {}).items()},
        labels={
            k: LabelValue.from_numeric(v)
            for k, v in d.get("labels", {}).items()
            if LabelValue.from_numeric(v) is not LabelValue.ABSENT
        },
    )


def write_reports_jsonl(reports: Iterable[RadiologyReport], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for report in reports:
            fh.write(json.dumps(report_to_dict(report), ensure_ascii=False) + "\n")
            n += 1
    return n


def read_reports_jsonl(path: str | Path) -> list[RadiologyReport]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(report_from_dict(json.loads(line)))
    return out


def iter_raw_jsonl(path: str | Path) -> Iterator[tuple[str, str]]:
    """Yield (report_id, text) records from a raw-input JSON Lines file."""
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rec = json.loads(line)
                yield str(rec["report_id"]), rec["text"]


def iter_raw_dir(path: str | Path, pattern: str = "*.txt") -> Iterator[tuple[str, str]]:
    """Yield (report_id, text) from a directory of one-report-per-file texts.

    Files are visited in sorted name order; the id is the file stem.
    """
    for p in sorted(Path(path).glob(pattern)):
        yield p.stem, p.read_text(encoding="utf-8")


def read_labels_csv(path: str | Path) -> dict[str, dict[str, object]]:
    """Read disease metadata keyed by report_id; empty cells stay missing.

    The CSV must have a report_id column; every other column is a disease
    name with values in {1, -1, 0, empty}.
    """
    rows: dict[str, dict[str, object]] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "report_id" not in reader.fieldnames:
            raise InvalidLabelValue(f"{path}: missing report_id column")
        for row in reader:
            rid = row.pop("report_id")
            rows[rid] = {k: (v if v is not None and v.strip() else None) for k, v in row.items()}
    return rows
