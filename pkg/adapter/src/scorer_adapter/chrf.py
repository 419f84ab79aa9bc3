"""Self-contained sentence chrF.

Character n-gram F-score with beta 2 over orders 1..6, whitespace
removed before counting, averaging only the orders that occur on both
sides.  Returns values on the 0..100 scale; the stub endpoint divides
by 100 so scores sit in the unit interval like a learned metric's.
"""

import re

_SPACE = re.compile(r"\s+")


def _ngram_counts(text: str, order: int) -> dict:
    counts: dict = {}
    for i in range(len(text) - order + 1):
        gram = text[i: i + order]
        counts[gram] = counts.get(gram, 0) + 1
    return counts


def sentence_chrf(hypothesis: str, reference: str, max_order: int = 6, beta: float = 2.0) -> float:
    hyp = _SPACE.sub("", hypothesis)
    ref = _SPACE.sub("", reference)
    precisions: list[float] = []
    recalls: list[float] = []
    for order in range(1, max_order + 1):
        hyp_total = len(hyp) - order + 1
        ref_total = len(ref) - order + 1
        if hyp_total < 1 or ref_total < 1:
            continue
        ref_counts = _ngram_counts(ref, order)
        overlap = 0
        for gram, count in _ngram_counts(hyp, order).items():
            in_ref = ref_counts.get(gram, 0)
            overlap += count if count < in_ref else in_ref
        precisions.append(overlap / hyp_total)
        recalls.append(overlap / ref_total)
    if not precisions:
        return 0.0
    precision = sum(precisions) / len(precisions)
    recall = sum(recalls) / len(recalls)
    if precision + recall == 0.0:
        return 0.0
    weight = beta * beta
    return 100.0 * (1.0 + weight) * (precision * recall) / (weight * precision + recall)
