"""radsum: corpus processing and evaluation for radiology-report summarization.

Parses free-text reports into sections, prepares and augments training pairs
by deterministic field-order permutation, and evaluates candidate impressions
with ROUGE metrics, constant/extractive baselines, a distance-weighted loss
evaluator and disease-stratified analysis.
"""

__version__ = "0.1.0"

from .augment import (
    ExamplePair,
    PermutationSchedule,
    ShuffleMode,
    expand_corpus,
    make_schedule,
    render_input,
)
from .dataset import CollatedBatch, SplitResult, collate, corpus_stats, filter_complete, split
from .evaluation import (
    CANONICAL_PHRASE,
    StratumReport,
    canonical_baseline,
    count_score_correlation,
    extractive_baseline,
    stratify,
)
from .loss import (
    EmbeddingTable,
    PredictedDistribution,
    cross_entropy_loss,
    embedding_distance_loss,
    euclidean_distance,
)
from .reports import (
    LabelValue,
    RadiologyReport,
    SectionName,
    extract_labels,
    is_no_findings,
    parse_report,
)
from .rouge import (
    AggregateScore,
    PairScores,
    RougeReport,
    RougeScore,
    aggregate,
    lcs_length,
    rouge_l,
    rouge_lsum,
    rouge_n,
    score_pairs,
)
from .textnorm import NormalizationConfig, TokenSequence, normalize, split_sentences, tokenize

__all__ = [
    "__version__",
    "AggregateScore",
    "CANONICAL_PHRASE",
    "CollatedBatch",
    "EmbeddingTable",
    "ExamplePair",
    "LabelValue",
    "NormalizationConfig",
    "PairScores",
    "PermutationSchedule",
    "PredictedDistribution",
    "RadiologyReport",
    "RougeReport",
    "RougeScore",
    "SectionName",
    "ShuffleMode",
    "SplitResult",
    "StratumReport",
    "TokenSequence",
    "aggregate",
    "canonical_baseline",
    "collate",
    "corpus_stats",
    "count_score_correlation",
    "cross_entropy_loss",
    "embedding_distance_loss",
    "euclidean_distance",
    "expand_corpus",
    "extract_labels",
    "extractive_baseline",
    "filter_complete",
    "is_no_findings",
    "lcs_length",
    "make_schedule",
    "normalize",
    "parse_report",
    "render_input",
    "rouge_l",
    "rouge_lsum",
    "rouge_n",
    "score_pairs",
    "split",
    "split_sentences",
    "stratify",
    "tokenize",
]
