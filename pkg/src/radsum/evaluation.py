"""Baseline summarizers and disease-stratified score analysis.

The canonical baseline answers every report with one fixed phrase; the
extractive baseline copies leading sentences of the findings. Stratification
groups per-pair scores by (disease, polarity) plus a synthetic no-findings
stratum, which is how class-dependent performance gets exposed.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DegenerateVariance, MissingFindings
from .reports import FINDINGS, LabelValue, RadiologyReport, is_no_findings
from .rouge import RougeScore
from .textnorm import DEFAULT_ABBREVIATIONS, split_sentences

CANONICAL_PHRASE = "There is no cardiopulmonary process"
NO_FINDINGS_STRATUM = "No Findings"


def canonical_baseline(report: RadiologyReport, phrase: str = CANONICAL_PHRASE) -> str:
    """Constant-output summarizer; the report content is ignored."""
    return phrase


def extractive_baseline(
    report: RadiologyReport,
    k: int = 1,
    abbreviations: frozenset[str] = DEFAULT_ABBREVIATIONS,
) -> str:
    """First k sentences of FINDINGS, joined with single spaces."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not report.has_section(FINDINGS):
        raise MissingFindings(f"report {report.report_id!r} has no findings")
    sentences = split_sentences(report.sections[FINDINGS], abbreviations)
    return " ".join(sentences[:k])


@dataclass(frozen=True)
class StratumReport:
    """Mean scores of the pairs carrying one (disease, polarity) label."""

    disease: str
    polarity: LabelValue
    n_examples: int
    mean_scores: dict[str, RougeScore]

    def to_dict(self) -> dict:
        return {
            "disease": self.disease,
            "polarity": self.polarity.value,
            "n_examples": self.n_examples,
            "mean_scores": {m: s.to_dict() for m, s in self.mean_scores.items()},
        }


def _mean_scores(score_dicts: Sequence[dict[str, RougeScore]]) -> dict[str, RougeScore]:
    metrics = list(score_dicts[0].keys())
    n = len(score_dicts)
    out = {}
    for m in metrics:
        out[m] = RougeScore(
            precision=sum(d[m].precision for d in score_dicts) / n,
            recall=sum(d[m].recall for d in score_dicts) / n,
            f1=sum(d[m].f1 for d in score_dicts) / n,
        )
    return out


def stratify(
    scored: Iterable[tuple[RadiologyReport, dict[str, RougeScore]]],
    polarity: LabelValue | None = LabelValue.INDICATED,
    include_no_findings: bool = True,
    no_findings_key: str = "No Finding",
) -> list[StratumReport]:
    """Group per-pair scores by disease label, sorted by stratum size.

    The default keeps Indicated labels plus a synthetic no-findings stratum;
    pass polarity=None to stratify over every (disease, polarity) present,
    which covers all labeled pairs. A report carrying several qualifying
    labels appears in each of those strata.
    """
    groups: dict[tuple[str, LabelValue], list[dict[str, RougeScore]]] = {}
    for report, scores in scored:
        for disease, value in report.labels.items():
            if value is LabelValue.ABSENT:
                continue
            if polarity is not None and value is not polarity:
                continue
            if include_no_findings and disease == no_findings_key:
                continue
            groups.setdefault((disease, value), []).append(scores)
        if include_no_findings and is_no_findings(report, no_findings_key):
            groups.setdefault(
                (NO_FINDINGS_STRATUM, LabelValue.INDICATED), []
            ).append(scores)
    strata = [
        StratumReport(
            disease=disease,
            polarity=pol,
            n_examples=len(items),
            mean_scores=_mean_scores(items),
        )
        for (disease, pol), items in groups.items()
    ]
    strata.sort(key=lambda s: (s.n_examples, s.disease, s.polarity.value))
    return strata


def count_score_correlation(
    strata: Sequence[StratumReport],
    metric: str = "rougeLsum",
    component: str = "f1",
) -> float:
    """Pearson correlation between stratum sizes and mean scores."""
    if len(strata) < 2:
        raise DegenerateVariance("need at least two strata")
    xs = [float(s.n_examples) for s in strata]
    ys = [getattr(s.mean_scores[metric], component) for s in strata]
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    vx = sum((x - mx) ** 2 for x in xs)
    vy = sum((y - my) ** 2 for y in ys)
    if vx == 0.0 or vy == 0.0:
        raise DegenerateVariance("zero variance in counts or scores")
    cov = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    r = cov / math.sqrt(vx * vy)
    return max(-1.0, min(1.0, r))


def write_strata_csv(
    strata: Sequence[StratumReport], path, metric: str = "rougeLsum"
) -> None:
    """One row per stratum for external plotting."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["disease", "polarity", "n", "mean_p", "mean_r", "mean_f1"])
        for s in strata:
            score = s.mean_scores[metric]
            writer.writerow(
                [
                    s.disease,
                    s.polarity.value,
                    s.n_examples,
                    f"{score.precision:.6f}",
                    f"{score.recall:.6f}",
                    f"{score.f1:.6f}",
                ]
            )
