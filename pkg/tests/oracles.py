"""Slow, direct-from-definition reference implementations.

Tests compare the package against these on random inputs.  Everything
here favours obviousness over speed and shares no code with the
package: list.count instead of Counter, full-matrix dynamic programs,
exhaustive pairwise loops.
"""

import math
import re


def _squash_whitespace(text):
    return re.sub(r"\s+", "", text)


def chrf_reference(hypothesis, reference, char_order=6, beta=2.0):
    hyp = _squash_whitespace(hypothesis)
    ref = _squash_whitespace(reference)
    precisions = []
    recalls = []
    for n in range(1, char_order + 1):
        hyp_grams = [hyp[i: i + n] for i in range(len(hyp) - n + 1)]
        ref_grams = [ref[i: i + n] for i in range(len(ref) - n + 1)]
        if not hyp_grams or not ref_grams:
            continue
        matched = 0
        for gram in set(hyp_grams):
            matched += min(hyp_grams.count(gram), ref_grams.count(gram))
        precisions.append(matched / len(hyp_grams))
        recalls.append(matched / len(ref_grams))
    if not precisions:
        return 0.0
    avg_p = sum(precisions) / len(precisions)
    avg_r = sum(recalls) / len(recalls)
    if avg_p + avg_r == 0:
        return 0.0
    b2 = beta ** 2
    return 100 * (1 + b2) * (avg_p * avg_r) / ((b2 * avg_p) + avg_r)


def chrf_corpus_reference(hypotheses, references, char_order=6, beta=2.0):
    precisions = []
    recalls = []
    for n in range(1, char_order + 1):
        hyp_total = 0
        ref_total = 0
        matched = 0
        for hypothesis, reference in zip(hypotheses, references):
            hyp = _squash_whitespace(hypothesis)
            ref = _squash_whitespace(reference)
            hyp_grams = [hyp[i: i + n] for i in range(len(hyp) - n + 1)]
            ref_grams = [ref[i: i + n] for i in range(len(ref) - n + 1)]
            hyp_total += len(hyp_grams)
            ref_total += len(ref_grams)
            for gram in set(hyp_grams):
                matched += min(hyp_grams.count(gram), ref_grams.count(gram))
        if hyp_total > 0 and ref_total > 0:
            precisions.append(matched / hyp_total)
            recalls.append(matched / ref_total)
    if not precisions:
        return 0.0
    avg_p = sum(precisions) / len(precisions)
    avg_r = sum(recalls) / len(recalls)
    if avg_p + avg_r == 0:
        return 0.0
    b2 = beta ** 2
    return 100 * (1 + b2) * (avg_p * avg_r) / ((b2 * avg_p) + avg_r)


def tokenize_13a_reference(line):
    norm = line
    norm = norm.replace("<skipped>", "")
    norm = norm.replace("-\n", "")
    norm = norm.replace("\n", " ")
    norm = norm.replace("&quot;", '"')
    norm = norm.replace("&amp;", "&")
    norm = norm.replace("&lt;", "<")
    norm = norm.replace("&gt;", ">")
    norm = " {} ".format(norm)
    norm = re.sub(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])", " \\1 ", norm)
    norm = re.sub(r"([^0-9])([\.,])", "\\1 \\2 ", norm)
    norm = re.sub(r"([\.,])([^0-9])", " \\1 \\2", norm)
    norm = re.sub(r"([0-9])(\-)", "\\1 \\2 ", norm)
    norm = re.sub(r"\s+", " ", norm)
    return norm.strip().split()


def _bleu_counts(hyp_tokens, ref_tokens, max_order=4):
    correct = [0] * max_order
    total = [0] * max_order
    for n in range(1, max_order + 1):
        hyp_grams = [
            " ".join(hyp_tokens[i: i + n]) for i in range(len(hyp_tokens) - n + 1)
        ]
        ref_grams = [
            " ".join(ref_tokens[i: i + n]) for i in range(len(ref_tokens) - n + 1)
        ]
        total[n - 1] += len(hyp_grams)
        for gram in set(hyp_grams):
            correct[n - 1] += min(hyp_grams.count(gram), ref_grams.count(gram))
    return correct, total


def _bleu_from_counts(correct, total, hyp_len, ref_len, effective_order, max_order=4):
    if sum(correct) == 0:
        return 0.0
    precisions = [0.0] * max_order
    smooth = 1.0
    eff = 0 if effective_order else max_order
    for n in range(1, max_order + 1):
        if total[n - 1] == 0:
            break
        if effective_order:
            eff = n
        if correct[n - 1] == 0:
            smooth *= 2
            precisions[n - 1] = 100.0 / (smooth * total[n - 1])
        else:
            precisions[n - 1] = 100.0 * correct[n - 1] / total[n - 1]
    if eff == 0 or any(p == 0.0 for p in precisions[:eff]):
        return 0.0
    if hyp_len == 0:
        bp = 0.0
    elif hyp_len < ref_len:
        bp = math.exp(1 - ref_len / hyp_len)
    else:
        bp = 1.0
    return bp * math.exp(sum(math.log(p) for p in precisions[:eff]) / eff)


def bleu_sentence_reference(hypothesis, reference, max_order=4):
    hyp_tokens = tokenize_13a_reference(hypothesis)
    ref_tokens = tokenize_13a_reference(reference)
    correct, total = _bleu_counts(hyp_tokens, ref_tokens, max_order)
    return _bleu_from_counts(
        correct, total, len(hyp_tokens), len(ref_tokens), True, max_order
    )


def bleu_corpus_reference(hypotheses, references, max_order=4):
    correct = [0] * max_order
    total = [0] * max_order
    hyp_len = 0
    ref_len = 0
    for hypothesis, reference in zip(hypotheses, references):
        hyp_tokens = tokenize_13a_reference(hypothesis)
        ref_tokens = tokenize_13a_reference(reference)
        pair_correct, pair_total = _bleu_counts(hyp_tokens, ref_tokens, max_order)
        for i in range(max_order):
            correct[i] += pair_correct[i]
            total[i] += pair_total[i]
        hyp_len += len(hyp_tokens)
        ref_len += len(ref_tokens)
    return _bleu_from_counts(correct, total, hyp_len, ref_len, False, max_order)


def levenshtein_reference(a, b):
    rows = len(a) + 1
    cols = len(b) + 1
    table = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        table[i][0] = i
    for j in range(cols):
        table[0][j] = j
    for i in range(1, rows):
        for j in range(1, cols):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            table[i][j] = min(
                table[i - 1][j] + 1,
                table[i][j - 1] + 1,
                table[i - 1][j - 1] + cost,
            )
    return table[-1][-1]


def expected_utilities_reference(candidates, utility_pair, include_self=True):
    """Exhaustive mean pairwise utility, no caching, no mirroring."""
    n = len(candidates)
    expected = []
    for i in range(n):
        values = []
        for j in range(n):
            if not include_self and j == i:
                continue
            values.append(utility_pair(candidates[i], candidates[j]))
        if not values:
            values = [utility_pair(candidates[i], candidates[i])]
        expected.append(sum(values) / len(values))
    return expected


def mbr_select_reference(candidates, utility_pair, include_self=True):
    expected = expected_utilities_reference(candidates, utility_pair, include_self)
    best = 0
    for i in range(1, len(expected)):
        if expected[i] > expected[best]:
            best = i
    return best, expected
