"""Lexical similarity metrics: chrF, BLEU, and character edit distance.

chrF follows the character n-gram F-score family: precision and recall
are averaged over the n-gram orders that occur on both sides, then
combined into F-beta.  Scores are on the 0..100 scale.  BLEU uses the
13a tokenizer, exponential smoothing for zero-match orders, and the
standard brevity penalty; the corpus score aggregates clipped counts
over all segments before taking precisions.
"""

import math
import re
from collections import Counter
from dataclasses import dataclass

from .errors import AlignmentError, ConfigError, ValidationError

DEFAULT_CHAR_ORDER = 6
DEFAULT_BETA = 2.0
DEFAULT_MAX_ORDER = 4

_WHITESPACE = re.compile(r"\s+")


def strip_whitespace(text: str) -> str:
    """Remove all whitespace; chrF compares bare character sequences."""
    return _WHITESPACE.sub("", text)


@dataclass(frozen=True)
class NGramProfile:
    """Multiset of the n-grams of one order drawn from a sequence."""

    order: int
    counts: dict

    @property
    def total(self) -> int:
        return sum(self.counts.values())


def char_ngram_profile(text: str, order: int) -> NGramProfile:
    if order < 1:
        raise ValidationError(f"n-gram order must be positive, got {order}")
    counts = Counter(text[i: i + order] for i in range(len(text) - order + 1))
    return NGramProfile(order=order, counts=dict(counts))


def token_ngram_profile(tokens: list[str], order: int) -> NGramProfile:
    if order < 1:
        raise ValidationError(f"n-gram order must be positive, got {order}")
    counts = Counter(
        tuple(tokens[i: i + order]) for i in range(len(tokens) - order + 1)
    )
    return NGramProfile(order=order, counts=dict(counts))


def _clipped_matches(hyp_counts: dict, ref_counts: dict) -> int:
    # Iterate the smaller side; matches are per-n-gram minima.
    if len(hyp_counts) > len(ref_counts):
        hyp_counts, ref_counts = ref_counts, hyp_counts
    get = ref_counts.get
    matched = 0
    for gram, count in hyp_counts.items():
        other = get(gram, 0)
        if other:
            matched += count if count < other else other
    return matched


# ---------------------------------------------------------------------------
# chrF


def chrf_profiles(text: str, char_order: int = DEFAULT_CHAR_ORDER) -> list[NGramProfile]:
    """Profiles of the whitespace-stripped text for orders 1..char_order."""
    stripped = strip_whitespace(text)
    return [char_ngram_profile(stripped, n) for n in range(1, char_order + 1)]


def chrf_from_profiles(
    hyp_profiles: list[NGramProfile],
    ref_profiles: list[NGramProfile],
    beta: float = DEFAULT_BETA,
    effective_order: bool = True,
) -> float:
    """Score a pair of precomputed profile stacks.

    With effective_order, orders missing from either side are excluded
    from the averages; otherwise every order contributes, counting
    missing orders as zero precision and recall.
    """
    sum_precision = 0.0
    sum_recall = 0.0
    effective = 0
    for hyp_profile, ref_profile in zip(hyp_profiles, ref_profiles):
        hyp_total = hyp_profile.total
        ref_total = ref_profile.total
        if effective_order and (hyp_total == 0 or ref_total == 0):
            continue
        matched = _clipped_matches(hyp_profile.counts, ref_profile.counts)
        sum_precision += matched / hyp_total if hyp_total else 0.0
        sum_recall += matched / ref_total if ref_total else 0.0
        effective += 1
    divisor = effective if effective_order else len(hyp_profiles)
    if divisor == 0:
        return 0.0
    avg_precision = sum_precision / divisor
    avg_recall = sum_recall / divisor
    if avg_precision + avg_recall == 0:
        return 0.0
    beta_sq = beta ** 2
    fscore = (
        (1 + beta_sq)
        * (avg_precision * avg_recall)
        / ((beta_sq * avg_precision) + avg_recall)
    )
    return 100 * fscore


def chrf_sentence(
    hypothesis: str,
    reference: str,
    char_order: int = DEFAULT_CHAR_ORDER,
    beta: float = DEFAULT_BETA,
    effective_order: bool = True,
) -> float:
    return chrf_from_profiles(
        chrf_profiles(hypothesis, char_order),
        chrf_profiles(reference, char_order),
        beta=beta,
        effective_order=effective_order,
    )


def chrf_corpus(
    hypotheses: list[str],
    references: list[str],
    char_order: int = DEFAULT_CHAR_ORDER,
    beta: float = DEFAULT_BETA,
) -> float:
    """Micro-averaged chrF: n-gram statistics are pooled over segments."""
    if len(hypotheses) != len(references):
        raise AlignmentError(
            f"{len(hypotheses)} hypotheses for {len(references)} references"
        )
    hyp_totals = [0] * char_order
    ref_totals = [0] * char_order
    matches = [0] * char_order
    for hyp, ref in zip(hypotheses, references):
        hyp_profiles = chrf_profiles(hyp, char_order)
        ref_profiles = chrf_profiles(ref, char_order)
        for i in range(char_order):
            hyp_totals[i] += hyp_profiles[i].total
            ref_totals[i] += ref_profiles[i].total
            matches[i] += _clipped_matches(
                hyp_profiles[i].counts, ref_profiles[i].counts
            )
    sum_precision = 0.0
    sum_recall = 0.0
    effective = 0
    for i in range(char_order):
        if hyp_totals[i] == 0 or ref_totals[i] == 0:
            continue
        sum_precision += matches[i] / hyp_totals[i]
        sum_recall += matches[i] / ref_totals[i]
        effective += 1
    if effective == 0:
        return 0.0
    avg_precision = sum_precision / effective
    avg_recall = sum_recall / effective
    if avg_precision + avg_recall == 0:
        return 0.0
    beta_sq = beta ** 2
    fscore = (
        (1 + beta_sq)
        * (avg_precision * avg_recall)
        / ((beta_sq * avg_precision) + avg_recall)
    )
    return 100 * fscore


# ---------------------------------------------------------------------------
# BLEU

_13A_PUNCT = re.compile(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])")
_13A_PERIOD_BEFORE = re.compile(r"([^0-9])([\.,])")
_13A_PERIOD_AFTER = re.compile(r"([\.,])([^0-9])")
_13A_DASH = re.compile(r"([0-9])(\-)")


def tokenize_13a(text: str) -> list[str]:
    """The mteval-v13a tokenization: unescape, then isolate punctuation
    except for periods and commas inside numbers and dashes after digits."""
    norm = text
    norm = norm.replace("<skipped>", "")
    norm = norm.replace("-\n", "")
    norm = norm.replace("\n", " ")
    norm = norm.replace("&quot;", '"')
    norm = norm.replace("&amp;", "&")
    norm = norm.replace("&lt;", "<")
    norm = norm.replace("&gt;", ">")
    norm = f" {norm} "
    norm = _13A_PUNCT.sub(r" \1 ", norm)
    norm = _13A_PERIOD_BEFORE.sub(r"\1 \2 ", norm)
    norm = _13A_PERIOD_AFTER.sub(r" \1 \2", norm)
    norm = _13A_DASH.sub(r"\1 \2 ", norm)
    return norm.split()


@dataclass(frozen=True)
class BleuStats:
    """Sufficient statistics of one segment, or a sum over segments.

    correct and total are clipped match counts and hypothesis n-gram
    counts per order; corpus scores and resampling both work on sums
    of these rows rather than on per-segment scores.
    """

    correct: tuple[int, ...]
    total: tuple[int, ...]
    hyp_len: int
    ref_len: int

    def __add__(self, other: "BleuStats") -> "BleuStats":
        return BleuStats(
            correct=tuple(a + b for a, b in zip(self.correct, other.correct)),
            total=tuple(a + b for a, b in zip(self.total, other.total)),
            hyp_len=self.hyp_len + other.hyp_len,
            ref_len=self.ref_len + other.ref_len,
        )

    def as_row(self) -> list[int]:
        return [*self.correct, *self.total, self.hyp_len, self.ref_len]

    @classmethod
    def from_row(cls, row, max_order: int = DEFAULT_MAX_ORDER) -> "BleuStats":
        return cls(
            correct=tuple(int(v) for v in row[:max_order]),
            total=tuple(int(v) for v in row[max_order: 2 * max_order]),
            hyp_len=int(row[2 * max_order]),
            ref_len=int(row[2 * max_order + 1]),
        )


def bleu_pair_stats(
    hypothesis: str, reference: str, max_order: int = DEFAULT_MAX_ORDER
) -> BleuStats:
    hyp_tokens = tokenize_13a(hypothesis)
    ref_tokens = tokenize_13a(reference)
    return bleu_token_stats(hyp_tokens, ref_tokens, max_order)


def bleu_token_stats(
    hyp_tokens: list[str], ref_tokens: list[str], max_order: int = DEFAULT_MAX_ORDER
) -> BleuStats:
    correct = []
    total = []
    for n in range(1, max_order + 1):
        hyp_profile = token_ngram_profile(hyp_tokens, n)
        ref_profile = token_ngram_profile(ref_tokens, n)
        correct.append(_clipped_matches(hyp_profile.counts, ref_profile.counts))
        total.append(hyp_profile.total)
    return BleuStats(
        correct=tuple(correct),
        total=tuple(total),
        hyp_len=len(hyp_tokens),
        ref_len=len(ref_tokens),
    )


def bleu_score_from_stats(
    stats: BleuStats,
    max_order: int = DEFAULT_MAX_ORDER,
    effective_order: bool = False,
) -> float:
    """Turn summed statistics into a BLEU score.

    Zero-match orders are exponentially smoothed.  A hypothesis with no
    match at any order scores 0 outright instead of collecting a purely
    smoothed score.
    """
    if sum(stats.correct) == 0:
        return 0.0
    precisions = [0.0] * max_order
    smooth_val = 1.0
    eff_order = 0 if effective_order else max_order
    for n in range(1, max_order + 1):
        if stats.total[n - 1] == 0:
            break
        if effective_order:
            eff_order = n
        if stats.correct[n - 1] == 0:
            smooth_val *= 2
            precisions[n - 1] = 100.0 / (smooth_val * stats.total[n - 1])
        else:
            precisions[n - 1] = 100.0 * stats.correct[n - 1] / stats.total[n - 1]
    if eff_order == 0:
        return 0.0
    window = precisions[:eff_order]
    if any(p == 0.0 for p in window):
        return 0.0
    if stats.hyp_len < stats.ref_len:
        brevity = (
            math.exp(1 - stats.ref_len / stats.hyp_len) if stats.hyp_len > 0 else 0.0
        )
    else:
        brevity = 1.0
    return brevity * math.exp(sum(math.log(p) for p in window) / eff_order)


def bleu_sentence(
    hypothesis: str, reference: str, max_order: int = DEFAULT_MAX_ORDER
) -> float:
    """Sentence BLEU; the order cap adapts to short hypotheses so that a
    two-token segment is not judged on absent trigrams."""
    stats = bleu_pair_stats(hypothesis, reference, max_order)
    return bleu_score_from_stats(stats, max_order, effective_order=True)


def bleu_corpus(
    hypotheses: list[str], references: list[str], max_order: int = DEFAULT_MAX_ORDER
) -> float:
    if len(hypotheses) != len(references):
        raise AlignmentError(
            f"{len(hypotheses)} hypotheses for {len(references)} references"
        )
    summed = BleuStats(
        correct=(0,) * max_order, total=(0,) * max_order, hyp_len=0, ref_len=0
    )
    for hyp, ref in zip(hypotheses, references):
        summed = summed + bleu_pair_stats(hyp, ref, max_order)
    return bleu_score_from_stats(summed, max_order, effective_order=False)


# ---------------------------------------------------------------------------
# Edit distance


def levenshtein(a: str, b: str) -> int:
    """Unit-cost character edit distance, two-row dynamic program."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, char_a in enumerate(a, start=1):
        current = [i]
        append = current.append
        for j, char_b in enumerate(b, start=1):
            substitution = previous[j - 1] + (char_a != char_b)
            deletion = previous[j] + 1
            insertion = current[j - 1] + 1
            best = substitution
            if deletion < best:
                best = deletion
            if insertion < best:
                best = insertion
            append(best)
        previous = current
    return previous[-1]


# ---------------------------------------------------------------------------
# Named metrics with versioned signatures


@dataclass(frozen=True)
class MetricScore:
    """A corpus-level value plus the per-segment scores behind it."""

    corpus_value: float
    sentence_values: list[float] | None
    signature: str


def chrf_signature(
    char_order: int = DEFAULT_CHAR_ORDER,
    beta: float = DEFAULT_BETA,
    effective_order: bool = True,
) -> str:
    eff = "yes" if effective_order else "no"
    return f"chrF{beta:g}|nc:{char_order}|nw:0|space:no|eff:{eff}"


CHRF_SIGNATURE = chrf_signature()
BLEU_SIGNATURE = "BLEU|tok:13a|smooth:exp"


def score_chrf(hypotheses: list[str], references: list[str]) -> MetricScore:
    return MetricScore(
        corpus_value=chrf_corpus(hypotheses, references),
        sentence_values=[
            chrf_sentence(h, r) for h, r in zip(hypotheses, references)
        ],
        signature=CHRF_SIGNATURE,
    )


def score_bleu(hypotheses: list[str], references: list[str]) -> MetricScore:
    if len(hypotheses) != len(references):
        raise AlignmentError(
            f"{len(hypotheses)} hypotheses for {len(references)} references"
        )
    return MetricScore(
        corpus_value=bleu_corpus(hypotheses, references),
        sentence_values=[
            bleu_sentence(h, r) for h, r in zip(hypotheses, references)
        ],
        signature=BLEU_SIGNATURE,
    )


IN_PROCESS_METRICS = {
    "chrf": score_chrf,
    "bleu": score_bleu,
}

# conventional capitalization for table headers; registry keys stay lowercase
DISPLAY_NAMES = {
    "chrf": "chrF",
    "bleu": "BLEU",
}


def score_metric(name: str, hypotheses: list[str], references: list[str]) -> MetricScore:
    try:
        scorer = IN_PROCESS_METRICS[name]
    except KeyError:
        known = ", ".join(sorted(IN_PROCESS_METRICS))
        raise ConfigError(f"unknown metric {name!r}; in-process metrics: {known}")
    if len(hypotheses) != len(references):
        raise AlignmentError(
            f"{len(hypotheses)} hypotheses for {len(references)} references"
        )
    return scorer(hypotheses, references)
