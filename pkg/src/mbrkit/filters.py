"""Heuristic bitext cleaning: duplicate removal plus nine pair rules.

Rules are evaluated exhaustively so a report can say everything that is
wrong with a pair, not just the first failure.  All thresholds are
inclusive on the accepting side: a 500-character segment passes a
500-character cap.
"""

import unicodedata
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .corpus import Corpus, SegmentPair, load_score_sidecar
from .errors import ConfigError, ValidationError
from .metrics import levenshtein

RULE_AVG_WORD_LEN = "max_avg_word_len"
RULE_MAX_CHARS = "max_chars"
RULE_DIGIT_RATIO = "max_digit_ratio"
RULE_MAX_WORD_LEN = "max_longest_word"
RULE_MAX_WORDS = "max_words"
RULE_EDIT_DISTANCE = "min_edit_distance"
RULE_MIN_CHARS = "min_chars"
RULE_LANG_PROB = "min_lang_prob"
RULE_BICLEANER = "min_bicleaner"

RULE_ORDER = (
    RULE_AVG_WORD_LEN,
    RULE_MAX_CHARS,
    RULE_DIGIT_RATIO,
    RULE_MAX_WORD_LEN,
    RULE_MAX_WORDS,
    RULE_EDIT_DISTANCE,
    RULE_MIN_CHARS,
    RULE_LANG_PROB,
    RULE_BICLEANER,
)

MISSING_SCORE = "missing-score"


@dataclass(frozen=True)
class FilterConfig:
    max_avg_word_len: float = 15.0
    max_chars: int = 500
    max_digit_ratio: float = 0.15
    max_longest_word: int = 28
    max_words: int = 100
    min_edit_distance: int = 2
    min_chars: int = 5
    min_lang_prob: float = 0.10
    # None leaves the cleanliness-score rule off entirely.
    min_bicleaner: float | None = None


@dataclass
class FilterDecision:
    accepted: bool
    rejected_by: list[str]
    reasons: dict[str, str] = field(default_factory=dict)


def _digit_ratio(text: str) -> float:
    visible = 0
    digits = 0
    for char in text:
        if char.isspace():
            continue
        visible += 1
        if unicodedata.category(char) == "Nd":
            digits += 1
    return digits / visible if visible else 0.0


def _side_violations(text: str, config: FilterConfig) -> set[str]:
    failed = set()
    words = text.split()
    if words:
        avg_len = sum(len(w) for w in words) / len(words)
        if avg_len > config.max_avg_word_len:
            failed.add(RULE_AVG_WORD_LEN)
        if max(len(w) for w in words) > config.max_longest_word:
            failed.add(RULE_MAX_WORD_LEN)
    if len(text) > config.max_chars:
        failed.add(RULE_MAX_CHARS)
    if _digit_ratio(text) > config.max_digit_ratio:
        failed.add(RULE_DIGIT_RATIO)
    if len(words) > config.max_words:
        failed.add(RULE_MAX_WORDS)
    if len(text) < config.min_chars:
        failed.add(RULE_MIN_CHARS)
    return failed


def filter_pair(
    pair: SegmentPair,
    config: FilterConfig = FilterConfig(),
    scores: dict[str, float] | None = None,
) -> FilterDecision:
    """Judge one pair against every enabled rule.

    scores carries the pair's sidecar values; None means no sidecar was
    provided at all, which leaves the language-probability rule off.
    With a sidecar present, a pair lacking a needed value is rejected
    and the reason marked as missing rather than out of range.
    """
    if pair.target is None:
        raise ValidationError(
            f"segment {pair.id} has no target; filtering needs bitext"
        )
    failed = _side_violations(pair.source, config)
    failed |= _side_violations(pair.target, config)
    reasons: dict[str, str] = {}
    if levenshtein(pair.source, pair.target) < config.min_edit_distance:
        failed.add(RULE_EDIT_DISTANCE)
    if scores is not None:
        for key in ("lang_prob_src", "lang_prob_tgt"):
            value = scores.get(key)
            if value is None:
                failed.add(RULE_LANG_PROB)
                reasons[RULE_LANG_PROB] = MISSING_SCORE
            elif value < config.min_lang_prob:
                failed.add(RULE_LANG_PROB)
    if config.min_bicleaner is not None:
        value = (scores or {}).get("bicleaner")
        if value is None:
            failed.add(RULE_BICLEANER)
            reasons[RULE_BICLEANER] = MISSING_SCORE
        elif value < config.min_bicleaner:
            failed.add(RULE_BICLEANER)
    ordered = [rule for rule in RULE_ORDER if rule in failed]
    return FilterDecision(accepted=not ordered, rejected_by=ordered, reasons=reasons)


@dataclass
class FilterReport:
    total: int
    accepted: int
    dedup_removed: int
    per_rule_rejections: dict[str, int]

    @property
    def rejected(self) -> int:
        return self.total - self.accepted - self.dedup_removed

    def as_dict(self) -> dict:
        return {
            "total": self.total,
            "accepted": self.accepted,
            "rejected": self.rejected,
            "dedup_removed": self.dedup_removed,
            "per_rule_rejections": dict(self.per_rule_rejections),
        }


def _carry(pair: SegmentPair, new_id: int) -> SegmentPair:
    meta = dict(pair.meta)
    meta.setdefault("orig_id", str(pair.id))
    return SegmentPair(id=new_id, source=pair.source, target=pair.target, meta=meta)


def dedupe(corpus: Corpus) -> tuple[Corpus, int]:
    """Drop exact (source, target) duplicates, keeping first occurrences.

    Survivors are renumbered; their original ids move into meta.
    """
    seen: set[tuple[str, str | None]] = set()
    kept = []
    for pair in corpus:
        key = (pair.source, pair.target)
        if key in seen:
            continue
        seen.add(key)
        kept.append(_carry(pair, len(kept)))
    return Corpus(kept), len(corpus) - len(kept)


def run_filter_pipeline(
    corpus: Corpus,
    config: FilterConfig = FilterConfig(),
    sidecar_path: str | None = None,
    threads: int = 1,
) -> tuple[Corpus, FilterReport]:
    """Dedupe, then filter; returns survivors and the full accounting.

    Sidecar scores are keyed by the ids of the input corpus.  The report
    satisfies accepted + rejected + dedup_removed = total.
    """
    if threads < 1:
        raise ValidationError(f"threads must be positive, got {threads}")
    sidecar = None
    if sidecar_path is not None:
        sidecar = load_score_sidecar(sidecar_path)
    if config.min_bicleaner is not None and sidecar is None:
        raise ConfigError(
            "a cleanliness-score threshold is set but no score sidecar was given"
        )
    total = len(corpus)
    deduped, dedup_removed = dedupe(corpus)

    def scores_for(pair: SegmentPair) -> dict[str, float] | None:
        if sidecar is None:
            return None
        return sidecar.get(int(pair.meta["orig_id"]), {})

    def judge(pair: SegmentPair) -> FilterDecision:
        return filter_pair(pair, config, scores_for(pair))

    if threads == 1:
        decisions = [judge(pair) for pair in deduped]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            decisions = list(pool.map(judge, deduped))

    per_rule = {rule: 0 for rule in RULE_ORDER}
    survivors = []
    for pair, decision in zip(deduped, decisions):
        if decision.accepted:
            survivors.append(_carry(pair, len(survivors)))
        else:
            for rule in decision.rejected_by:
                per_rule[rule] += 1
    report = FilterReport(
        total=total,
        accepted=len(survivors),
        dedup_removed=dedup_removed,
        per_rule_rejections=per_rule,
    )
    return Corpus(survivors), report
