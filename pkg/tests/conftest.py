"""Shared fixtures: an exemplar report, corpus builders and a synthetic generator."""
from __future__ import annotations

import random

import pytest

from radsum.reports import LabelValue, RadiologyReport, SectionName, parse_report

# A complete five-section report in the standard line-based layout, censoring
# markers included.
EXAMPLE_REPORT_TEXT = """\
COMPARISON: Chest radiograph ____
FINDINGS: Scoliosis of the thoracic spine and consequent asymmetry in the rib spaces. The compression fracture in the thoracic vertebral body is stable. Normal size of the cardiac silhouette. Normal hilar and mediastinal structures, no pulmonary edema. No pleural effusions. No pneumonia.
IMPRESSION: Chronic scoliosis and stable compression fracture of a thoracic vertebra. Otherwise normal chest radiograph. No evidence pneumonia.
INDICATION: ____ year old man with two weeks of productive cough, diffuse expiratory low pitched lung sounds on exam. // r/o pneumonia,
TECHNIQUE: Chest PA and lateral
"""

EXAMPLE_FINDINGS_WITH_CARDIOMEGALY = (
    "There is mild cardiomegaly. Pulmonary markings are likely accentuated by "
    "lower lung volumes. There is no consolidation or pleural effusion. "
    "No pneumothorax. There are bilateral healed rib fractures and left "
    "clavicular healed rib fracture."
)

SECTION_POOL = (
    "FINDINGS",
    "IMPRESSION",
    "INDICATION",
    "TECHNIQUE",
    "COMPARISON",
    "HISTORY",
    "EXAMINATION",
)

SENTENCE_POOL = (
    "The lungs are clear bilaterally.",
    "No focal consolidation or pleural effusion.",
    "Mild cardiomegaly is unchanged.",
    "There is no pneumothorax.",
    "Chest PA and lateral views were obtained.",
    "Low lung volumes accentuate the bronchovascular markings.",
    "Stable compression fracture of a thoracic vertebra.",
    "No evidence of pneumonia.",
    "Productive cough for two weeks.",
    "Degenerative changes of the thoracic spine.",
)


def make_report(report_id: str, sections: dict, labels: dict | None = None) -> RadiologyReport:
    section_map = {
        (name if isinstance(name, SectionName) else SectionName(name)): body
        for name, body in sections.items()
    }
    label_map = {
        disease: (value if isinstance(value, LabelValue) else LabelValue.from_numeric(value))
        for disease, value in (labels or {}).items()
    }
    raw = "\n".join(f"{name.text}: {body}" for name, body in section_map.items())
    return RadiologyReport(report_id=report_id, raw_text=raw, sections=section_map, labels=label_map)


def synth_report_text(rng: random.Random) -> tuple[str, dict[str, str]]:
    """A synthetic report in the standard layout plus its expected section map.

    Random section subsets, occasional censoring markers and multi-line
    bodies whose continuation lines start lowercase (so they can never look
    like headers).
    """
    names = list(SECTION_POOL)
    rng.shuffle(names)
    names = names[: rng.randint(1, len(names))]
    sections: dict[str, str] = {}
    lines = []
    for name in names:
        parts = rng.sample(SENTENCE_POOL, rng.randint(1, 3))
        if rng.random() < 0.3:
            parts.insert(rng.randrange(len(parts) + 1), "Chest radiograph " + "_" * rng.randint(3, 6))
        body = " ".join(parts)
        if rng.random() < 0.2:
            body += "\nfindings were discussed at 2:30 pm."
        sections[name] = body
        lines.append(f"{name}: {body}")
    return "\n".join(lines), sections


@pytest.fixture
def example_report() -> RadiologyReport:
    return parse_report("r-fig", EXAMPLE_REPORT_TEXT)


@pytest.fixture
def report_factory():
    return make_report
