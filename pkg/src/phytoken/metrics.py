"""Sequence- and distribution-level evaluation measures.

All functions are pure and deterministic: corpus-level BLEU-4 with brevity
penalty, ROUGE-L (LCS F-score averaged over pairs), teacher-forcing accuracy
and weighted F1 over token classes, and the 1-D Wasserstein distance between
empirical sample sets.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

PAD_ID = 225
NUM_CLASSES = 227

Pairs = Sequence[tuple[Sequence[int], Sequence[int]]]


def _check_pairs(pairs: Pairs) -> None:
    if not pairs:
        raise ValueError("corpus must contain at least one pair")
    for gen, ref in pairs:
        if len(gen) == 0 or len(ref) == 0:
            raise ValueError("sequences must be non-empty")


def _ngram_counts(seq: Sequence[int], n: int) -> Counter:
    return Counter(tuple(seq[i : i + n]) for i in range(len(seq) - n + 1))


@dataclass(frozen=True)
class BleuResult:
    score: float  # percent, 0-100
    precisions: tuple[float, float, float, float]
    brevity_penalty: float


def bleu4(pairs: Pairs) -> BleuResult:
    """Corpus-level BLEU-4: pooled clipped n-gram precisions for n = 1..4,
    geometric mean, times the brevity penalty min(1, exp(1 - ref/gen))."""
    _check_pairs(pairs)
    matched = [0] * 4
    total = [0] * 4
    gen_len = 0
    ref_len = 0
    for gen, ref in pairs:
        gen_len += len(gen)
        ref_len += len(ref)
        for n in range(1, 5):
            gen_counts = _ngram_counts(gen, n)
            if not gen_counts:
                continue
            ref_counts = _ngram_counts(ref, n)
            total[n - 1] += sum(gen_counts.values())
            matched[n - 1] += sum(min(c, ref_counts[g]) for g, c in gen_counts.items())
    precisions = tuple(m / t if t else 0.0 for m, t in zip(matched, total))
    bp = min(1.0, math.exp(1.0 - ref_len / gen_len))
    if any(p == 0.0 for p in precisions):
        score = 0.0
    else:
        score = bp * math.exp(sum(math.log(p) for p in precisions) / 4.0) * 100.0
    return BleuResult(score=score, precisions=precisions, brevity_penalty=bp)


def lcs_length(a: Sequence[int], b: Sequence[int]) -> int:
    """Longest common subsequence length, iterative DP with a rolling row."""
    if len(a) < len(b):
        a, b = b, a
    previous = [0] * (len(b) + 1)
    for x in a:
        current = [0]
        prev_diag = 0
        for j, y in enumerate(b, start=1):
            best = prev_diag + 1 if x == y else max(previous[j], current[j - 1])
            prev_diag = previous[j]
            current.append(best)
        previous = current
    return previous[-1]


def _f_lcs(lcs: int, gen_len: int, ref_len: int, swapped_formula: bool) -> float:
    if lcs == 0:
        return 0.0
    if swapped_formula:
        # variant with recall/precision denominators swapped and an
        # R + beta * P denominator rather than R + beta^2 * P
        r = lcs / gen_len
        p = lcs / ref_len
        beta = p / r
        return (1.0 + beta**2) * r * p / (r + beta * p)
    r = lcs / ref_len
    p = lcs / gen_len
    beta = p / r
    return (1.0 + beta**2) * r * p / (r + beta**2 * p)


def rouge_l(pairs: Pairs, swapped_formula: bool = False) -> float:
    """Mean LCS F-score over pairs, in [0, 1]."""
    _check_pairs(pairs)
    total = 0.0
    for gen, ref in pairs:
        total += _f_lcs(lcs_length(gen, ref), len(gen), len(ref), swapped_formula)
    return total / len(pairs)


def teacher_forcing_scores(predicted: Sequence[int], true: Sequence[int], pad_id: int = PAD_ID) -> dict:
    """Position-wise accuracy and support-weighted one-vs-rest F1.

    Positions whose true token is the pad are excluded; classes with zero
    support do not contribute to the weighted F1.
    """
    if len(predicted) != len(true):
        raise ValueError(f"length mismatch: {len(predicted)} vs {len(true)}")
    pairs = [(p, t) for p, t in zip(predicted, true) if t != pad_id]
    if not pairs:
        raise ValueError("no non-pad positions to score")
    for p, t in pairs:
        if not 0 <= p < NUM_CLASSES or not 0 <= t < NUM_CLASSES:
            raise ValueError("token ids must be in [0, 226]")
    correct = sum(1 for p, t in pairs if p == t)
    accuracy = correct / len(pairs)

    tp: Counter = Counter()
    fp: Counter = Counter()
    support: Counter = Counter()
    for p, t in pairs:
        support[t] += 1
        if p == t:
            tp[t] += 1
        else:
            fp[p] += 1
    weighted = 0.0
    for k, n_k in support.items():
        tp_k = tp[k]
        fn_k = n_k - tp_k
        fp_k = fp[k]
        denom = 2 * tp_k + fp_k + fn_k
        f1_k = 2 * tp_k / denom if denom else 0.0
        weighted += n_k * f1_k
    return {"accuracy": accuracy, "weighted_f1": weighted / len(pairs)}


def wasserstein_1d(a: Sequence[float], b: Sequence[float]) -> float:
    """W1 between empirical distributions: integral of |CDF_a - CDF_b|."""
    if len(a) == 0 or len(b) == 0:
        raise ValueError("sample sets must be non-empty")
    xs = sorted(a)
    ys = sorted(b)
    if len(xs) == len(ys):
        # equal sizes: mean absolute difference of order statistics
        return math.fsum(abs(x - y) for x, y in zip(xs, ys)) / len(xs)
    n, m = len(xs), len(ys)
    i = j = 0
    cdf_a = cdf_b = 0.0
    prev = min(xs[0], ys[0])
    terms = []
    while i < n or j < m:
        if j >= m or (i < n and xs[i] <= ys[j]):
            x = xs[i]
        else:
            x = ys[j]
        terms.append(abs(cdf_a - cdf_b) * (x - prev))
        prev = x
        while i < n and xs[i] == x:
            i += 1
        while j < m and ys[j] == x:
            j += 1
        cdf_a = i / n
        cdf_b = j / m
    return math.fsum(terms)


def normalized_wd(a: Sequence[float], b: Sequence[float], range_width: float) -> float:
    """W1 scaled by the reference distribution's range; comparable across
    parameters, flagged against a 0.05 threshold in reports."""
    if range_width <= 0:
        raise ValueError(f"range width must be > 0, got {range_width}")
    return wasserstein_1d(a, b) / range_width
