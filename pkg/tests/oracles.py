"""Independent oracle implementations used only by the tests.

Everything here is deliberately naive and shares no code with the production
metrics: a memoized recursive LCS, a brute-force subsequence enumerator, a
full-table LCS index backtrack, and a from-definition ROUGE-L scorer with the
standard reference tokenization ([a-z0-9]+, punctuation dropped).
"""
from __future__ import annotations

import re
from functools import lru_cache
from itertools import combinations

_REFERENCE_TOKEN_RE = re.compile(r"[a-z0-9]+")


def lcs_length_oracle(a, b) -> int:
    """Naive memoized recursive LCS length."""
    a = tuple(a)
    b = tuple(b)

    @lru_cache(maxsize=None)
    def rec(i: int, j: int) -> int:
        if i == 0 or j == 0:
            return 0
        if a[i - 1] == b[j - 1]:
            return rec(i - 1, j - 1) + 1
        x = rec(i - 1, j)
        y = rec(i, j - 1)
        return x if x >= y else y

    result = rec(len(a), len(b))
    rec.cache_clear()
    return result


def lcs_length_bruteforce(a, b) -> int:
    """Enumerate every subsequence of the shorter side; only safe for tiny inputs."""
    a = tuple(a)
    b = tuple(b)
    if len(a) > len(b):
        a, b = b, a
    best = 0
    for size in range(len(a), 0, -1):
        for picks in combinations(range(len(a)), size):
            sub = [a[i] for i in picks]
            it = iter(b)
            if all(tok in it for tok in sub):
                return size
    return best


def lcs_indices_oracle(ref, cand) -> list[int]:
    """Reference indices of the canonical LCS via the full DP table.

    Convention: dp rows walk the candidate, columns the reference; on a token
    match the reference index is taken; ties between shrink moves prefer the
    candidate side.
    """
    m, n = len(ref), len(cand)
    if not m or not n:
        return []
    table = [[0] * (m + 1)]
    for i in range(1, n + 1):
        prev = table[i - 1]
        cur = [0] * (m + 1)
        ci = cand[i - 1]
        for j in range(1, m + 1):
            if ci == ref[j - 1]:
                cur[j] = prev[j - 1] + 1
            else:
                up = prev[j]
                left = cur[j - 1]
                cur[j] = up if up >= left else left
        table.append(cur)
    out: list[int] = []
    i, j = n, m
    while i and j:
        if cand[i - 1] == ref[j - 1]:
            out.append(j - 1)
            i -= 1
            j -= 1
        elif table[i - 1][j] >= table[i][j - 1]:
            i -= 1
        else:
            j -= 1
    out.reverse()
    return out


def reference_tokenize(text: str) -> list[str]:
    """The standard reference ROUGE tokenization: lowercase alnum runs."""
    return _REFERENCE_TOKEN_RE.findall(text.lower())


def reference_rouge_l_f1(candidate: str, reference: str) -> float:
    """From-definition ROUGE-L F1 on reference-tokenized text."""
    cand = reference_tokenize(candidate)
    ref = reference_tokenize(reference)
    if not cand or not ref:
        return 0.0
    lcs = lcs_length_oracle(cand, ref)
    p = lcs / len(cand)
    r = lcs / len(ref)
    return 2 * p * r / (p + r) if p + r > 0 else 0.0
