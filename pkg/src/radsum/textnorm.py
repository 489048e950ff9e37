"""Rule-based text normalization, word tokenization and sentence splitting.

Everything here is pure and deterministic; the metrics, statistics, collation
and baseline code all share these functions so that token counts and scores
are comparable across the toolkit. There is deliberately no stemming and no
learned tokenizer: scores must be reproducible from the rules alone.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

_CENSOR_RE = re.compile(r"_{3,}")
_WS_RE = re.compile(r"\s+")
_CHUNK_RE = re.compile(r"\S+")
_TERMINATOR_RE = re.compile(r"[.!?]+(?=\s|$)")

# Lowercase, no trailing period. "A." style single initials are NOT listed so
# that terse enumerations ("A. B. C.") still split.
DEFAULT_ABBREVIATIONS = frozenset(
    {"dr", "mr", "mrs", "ms", "st", "vs", "etc", "e.g", "i.e", "approx"}
)


@dataclass(frozen=True)
class NormalizationConfig:
    """Flags for normalize(); censoring markers are runs of 3+ underscores."""

    lowercase: bool = True
    strip_censoring: bool = True
    collapse_whitespace: bool = True


@dataclass(frozen=True)
class TokenSequence:
    """Tokens plus their (start, end) character offsets into the source text.

    Offsets are strictly increasing and non-overlapping; every token is the
    exact source substring at its offsets. Iterating or indexing the sequence
    yields the token strings.
    """

    tokens: tuple[str, ...]
    offsets: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if len(self.tokens) != len(self.offsets):
            raise ValueError("tokens and offsets differ in length")
        prev_end = -1
        for tok, (start, end) in zip(self.tokens, self.offsets):
            if not tok:
                raise ValueError("empty token")
            if start < prev_end or end - start != len(tok):
                raise ValueError("offsets must be increasing and non-overlapping")
            prev_end = end

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]


def normalize(text: str, cfg: NormalizationConfig = NormalizationConfig()) -> str:
    """Apply lowercasing, censoring-marker removal and whitespace collapsing.

    The three steps run in that order, each gated by its config flag.
    Idempotent for any fixed config.
    """
    if cfg.lowercase:
        text = text.lower()
    if cfg.strip_censoring:
        text = _CENSOR_RE.sub(" ", text)
    if cfg.collapse_whitespace:
        text = _WS_RE.sub(" ", text).strip()
    return text


def _is_punct(ch: str) -> bool:
    return not ch.isalnum()


def _scan_tokens(text: str, offsets: list[tuple[int, int]] | None) -> list[str]:
    # Shared splitting loop; the metrics hot path passes offsets=None to skip
    # the bookkeeping it never reads.
    tokens: list[str] = []
    for m in _CHUNK_RE.finditer(text):
        chunk = m.group()
        base = m.start()
        i, j = 0, len(chunk)
        lead: list[int] = []
        while i < j and _is_punct(chunk[i]):
            lead.append(i)
            i += 1
        trail: list[int] = []
        while j > i and _is_punct(chunk[j - 1]):
            j -= 1
            trail.append(j)
        for p in lead:
            tokens.append(chunk[p])
            if offsets is not None:
                offsets.append((base + p, base + p + 1))
        if i < j:
            tokens.append(chunk[i:j])
            if offsets is not None:
                offsets.append((base + i, base + j))
        for p in reversed(trail):
            tokens.append(chunk[p])
            if offsets is not None:
                offsets.append((base + p, base + p + 1))
    return tokens


def word_tokens(text: str) -> list[str]:
    """Token strings only, skipping offset bookkeeping; equals tokenize().tokens."""
    return _scan_tokens(text, None)


def tokenize(text: str) -> TokenSequence:
    """Split on whitespace, then detach leading/trailing punctuation.

    Each detached punctuation character becomes its own token; interior
    punctuation ("r/o", "x-ray", "3.5") stays inside the word. Expects
    already-normalized text.
    """
    offsets: list[tuple[int, int]] = []
    tokens = _scan_tokens(text, offsets)
    return TokenSequence(tuple(tokens), tuple(offsets))


def _word_before(text: str, pos: int) -> str:
    start = pos
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    return text[start:pos]


def sentence_spans(
    text: str, abbreviations: frozenset[str] = DEFAULT_ABBREVIATIONS
) -> list[tuple[int, int]]:
    """Partition text into sentence spans; every character lands in exactly one.

    A sentence ends after a run of . ! ? followed by whitespace or end of
    input, unless the preceding word is a listed abbreviation. Inter-sentence
    whitespace belongs to the following span.
    """
    if not text:
        return []
    spans: list[tuple[int, int]] = []
    start = 0
    for m in _TERMINATOR_RE.finditer(text):
        word = _word_before(text, m.start()).lstrip("(\"'[")
        if word.lower() in abbreviations:
            continue
        spans.append((start, m.end()))
        start = m.end()
    if start < len(text):
        spans.append((start, len(text)))
    return spans


def split_sentences(
    text: str, abbreviations: frozenset[str] = DEFAULT_ABBREVIATIONS
) -> list[str]:
    """Sentence strings (stripped); whitespace-only trailing spans are dropped."""
    out = []
    for s, e in sentence_spans(text, abbreviations):
        sent = text[s:e].strip()
        if sent:
            out.append(sent)
    return out
