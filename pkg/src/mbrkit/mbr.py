"""Minimum Bayes Risk selection over candidate sets.

Every candidate is scored against every candidate in its set acting as
a pseudo-reference; the candidate with the highest mean utility wins.
Utilities are plugged in as objects so lexical metrics, edit distance,
and external scorer processes all go through the same engine.
"""

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import metrics
from .corpus import CandidateSet, Corpus
from .errors import AlignmentError, ConfigError, ValidationError

DEFAULT_SWEEP_COUNTS = (10, 25, 50, 100, 200, 300, 400, 500)


class Utility:
    """A pairwise scoring strategy; higher is better."""

    name = "utility"
    symmetric = False
    needs_source = False

    def pair(self, hypothesis: str, pseudo_ref: str, source: str | None = None) -> float:
        raise NotImplementedError

    def matrix_values(
        self, candidates: list[str], source: str | None = None
    ) -> list[list[float]]:
        return [
            [self.pair(hyp, ref, source) for ref in candidates] for hyp in candidates
        ]


class ChrfUtility(Utility):
    name = "chrf"

    def __init__(self, char_order: int = metrics.DEFAULT_CHAR_ORDER,
                 beta: float = metrics.DEFAULT_BETA):
        self.char_order = char_order
        self.beta = beta

    def pair(self, hypothesis, pseudo_ref, source=None):
        return metrics.chrf_sentence(
            hypothesis, pseudo_ref, self.char_order, self.beta
        )

    def matrix_values(self, candidates, source=None):
        # Profile extraction dominates; do it once per distinct text.
        profiles = {}
        for text in candidates:
            if text not in profiles:
                profiles[text] = metrics.chrf_profiles(text, self.char_order)
        scored: dict[tuple[str, str], float] = {}
        values = []
        for hyp in candidates:
            hyp_profiles = profiles[hyp]
            row = []
            for ref in candidates:
                key = (hyp, ref)
                value = scored.get(key)
                if value is None:
                    value = metrics.chrf_from_profiles(
                        hyp_profiles, profiles[ref], self.beta
                    )
                    scored[key] = value
                row.append(value)
            values.append(row)
        return values


class BleuUtility(Utility):
    name = "bleu"

    def __init__(self, max_order: int = metrics.DEFAULT_MAX_ORDER):
        self.max_order = max_order

    def pair(self, hypothesis, pseudo_ref, source=None):
        return metrics.bleu_sentence(hypothesis, pseudo_ref, self.max_order)

    def matrix_values(self, candidates, source=None):
        tokens = {}
        for text in candidates:
            if text not in tokens:
                tokens[text] = metrics.tokenize_13a(text)
        scored: dict[tuple[str, str], float] = {}
        values = []
        for hyp in candidates:
            row = []
            for ref in candidates:
                key = (hyp, ref)
                value = scored.get(key)
                if value is None:
                    stats = metrics.bleu_token_stats(
                        tokens[hyp], tokens[ref], self.max_order
                    )
                    value = metrics.bleu_score_from_stats(
                        stats, self.max_order, effective_order=True
                    )
                    scored[key] = value
                row.append(value)
            values.append(row)
        return values


class NegEditUtility(Utility):
    """Negated character edit distance; 0 means identical strings."""

    name = "neg-edit"
    symmetric = True

    def pair(self, hypothesis, pseudo_ref, source=None):
        return -float(metrics.levenshtein(hypothesis, pseudo_ref))

    def matrix_values(self, candidates, source=None):
        # Symmetric: compute the upper triangle and mirror it.
        n = len(candidates)
        values = [[0.0] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                value = self.pair(candidates[i], candidates[j])
                values[i][j] = value
                values[j][i] = value
        return values


class ExternalUtility(Utility):
    """Pairwise scoring through a scorer endpoint subprocess."""

    def __init__(self, client):
        self.client = client
        caps = client.capabilities
        self.name = f"external:{caps.name}"
        self.needs_source = caps.needs_src

    def pair(self, hypothesis, pseudo_ref, source=None):
        return self._score_pairs([(hypothesis, pseudo_ref)], source)[0]

    def _score_pairs(self, pairs, source):
        from .scorer import ScoreRequest

        requests = [
            ScoreRequest(id=i, mt=hyp, ref=ref, src=source)
            for i, (hyp, ref) in enumerate(pairs)
        ]
        responses = self.client.score_batch(requests)
        return [response.score for response in responses]

    def matrix_values(self, candidates, source=None):
        n = len(candidates)
        pairs = [(hyp, ref) for hyp in candidates for ref in candidates]
        flat = self._score_pairs(pairs, source)
        return [flat[i * n: (i + 1) * n] for i in range(n)]


def make_utility(kind: str, client=None, char_order: int = metrics.DEFAULT_CHAR_ORDER,
                 beta: float = metrics.DEFAULT_BETA) -> Utility:
    if kind == "chrf":
        return ChrfUtility(char_order=char_order, beta=beta)
    if kind == "bleu":
        return BleuUtility()
    if kind == "neg-edit":
        return NegEditUtility()
    if kind == "external":
        if client is None:
            raise ConfigError("external utility requires a scorer endpoint")
        return ExternalUtility(client)
    raise ConfigError(
        f"unknown utility {kind!r}; choose chrf, bleu, neg-edit, or external"
    )


@dataclass
class UtilityMatrix:
    """Pairwise utilities: values[i][j] scores candidate i against
    candidate j as the pseudo-reference."""

    utility_name: str
    n: int
    values: list[list[float]]
    symmetric: bool = False

    def __post_init__(self):
        if self.n < 1 or len(self.values) != self.n:
            raise ValidationError(
                f"utility matrix must be {self.n}x{self.n}, got {len(self.values)} rows"
            )
        for i, row in enumerate(self.values):
            if len(row) != self.n:
                raise ValidationError(
                    f"utility matrix row {i} has {len(row)} entries, expected {self.n}"
                )
            for j, value in enumerate(row):
                if not math.isfinite(value):
                    raise ValidationError(
                        f"utility {self.utility_name} returned a non-finite "
                        f"score for pair ({i}, {j})"
                    )
        if self.symmetric:
            for i in range(self.n):
                for j in range(i + 1, self.n):
                    if abs(self.values[i][j] - self.values[j][i]) > 1e-9:
                        raise ValidationError(
                            f"utility {self.utility_name} is declared symmetric "
                            f"but differs at ({i}, {j})"
                        )


def utility_matrix(
    candidates: list[str], utility: Utility, source: str | None = None
) -> UtilityMatrix:
    if not candidates:
        raise ValidationError("cannot build a utility matrix over zero candidates")
    if utility.needs_source and source is None:
        raise ConfigError(f"utility {utility.name} requires the source segment")
    values = utility.matrix_values(candidates, source)
    return UtilityMatrix(
        utility_name=utility.name,
        n=len(candidates),
        values=values,
        symmetric=utility.symmetric,
    )


def expected_utilities(matrix: UtilityMatrix, include_self: bool = True) -> list[float]:
    """Mean utility of each candidate across pseudo-references.

    Without the self term a singleton set falls back to the candidate's
    self-utility so the result stays defined.
    """
    n = matrix.n
    expected = []
    for i, row in enumerate(matrix.values):
        if include_self:
            expected.append(sum(row) / n)
        elif n == 1:
            expected.append(row[0])
        else:
            total = 0.0
            for j, value in enumerate(row):
                if j != i:
                    total += value
            expected.append(total / (n - 1))
    return expected


@dataclass
class MbrResult:
    segment_id: int
    selected_index: int
    selected_text: str
    expected_utilities: list[float]
    utility_name: str


def mbr_select(
    candidates: list[str],
    utility: Utility,
    source: str | None = None,
    include_self: bool = True,
    segment_id: int = 0,
) -> MbrResult:
    """Pick the candidate with the highest expected utility.

    Ties go to the lowest rank index, which preserves the generator's
    own preference among equally supported candidates.
    """
    matrix = utility_matrix(candidates, utility, source)
    expected = expected_utilities(matrix, include_self)
    best = 0
    for i in range(1, len(expected)):
        if expected[i] > expected[best]:
            best = i
    return MbrResult(
        segment_id=segment_id,
        selected_index=best,
        selected_text=candidates[best],
        expected_utilities=expected,
        utility_name=utility.name,
    )


def _decode_one(
    cand_set: CandidateSet,
    utility: Utility,
    corpus: Corpus | None,
    include_self: bool,
    top_k: int | None,
) -> MbrResult:
    candidates = cand_set.candidates
    if top_k is not None:
        candidates = candidates[:top_k]
    source = None
    if utility.needs_source:
        if cand_set.segment_id >= len(corpus):
            raise AlignmentError(
                f"candidate set for segment {cand_set.segment_id} has no "
                f"corpus segment (corpus holds {len(corpus)})"
            )
        source = corpus[cand_set.segment_id].source
    return mbr_select(
        candidates,
        utility,
        source=source,
        include_self=include_self,
        segment_id=cand_set.segment_id,
    )


def mbr_decode_corpus(
    sets: list[CandidateSet],
    utility: Utility,
    corpus: Corpus | None = None,
    include_self: bool = True,
    top_k: int | None = None,
    threads: int = 1,
) -> list[MbrResult]:
    """Run MBR selection over every candidate set, in order.

    top_k restricts each set to its first k candidates (rank order is
    the generator's ranking).  Thread count never changes the output,
    only the wall time.
    """
    if top_k is not None and top_k < 1:
        raise ValidationError(f"top_k must be positive, got {top_k}")
    if threads < 1:
        raise ValidationError(f"threads must be positive, got {threads}")
    if utility.needs_source and corpus is None:
        raise ConfigError(
            f"utility {utility.name} requires source segments; supply a corpus"
        )
    if threads == 1 or len(sets) <= 1:
        return [
            _decode_one(cand_set, utility, corpus, include_self, top_k)
            for cand_set in sets
        ]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(
            pool.map(
                lambda cand_set: _decode_one(
                    cand_set, utility, corpus, include_self, top_k
                ),
                sets,
            )
        )


@dataclass
class SweepRow:
    """Corpus quality when decoding is limited to the first k candidates."""

    k: int
    effective_k: int
    scores: dict[str, float]
    mean_expected_utility: float
    wall_time_ms: float


def sweep_candidate_counts(
    sets: list[CandidateSet],
    references: list[str],
    utility: Utility,
    counts=DEFAULT_SWEEP_COUNTS,
    corpus: Corpus | None = None,
    include_self: bool = True,
    threads: int = 1,
) -> list[SweepRow]:
    """Score rank-0 output (the k=0 row) and MBR output at each k.

    Every row evaluates all in-process metrics against the supplied
    references.  k counts larger than the biggest set saturate; the
    effective_k column records the truth.
    """
    if references is None:
        raise ConfigError("sweep requires reference translations")
    if len(references) != len(sets):
        raise AlignmentError(
            f"{len(sets)} candidate sets for {len(references)} references"
        )
    if not sets:
        raise ValidationError("sweep requires at least one candidate set")
    cleaned = list(counts)
    for position, k in enumerate(cleaned):
        if k < 1:
            raise ValidationError(
                f"sweep counts must be positive, got {k}; "
                f"the k=0 baseline row is always included"
            )
        if position > 0 and k <= cleaned[position - 1]:
            raise ValidationError(
                f"sweep counts must be strictly increasing, "
                f"got {k} after {cleaned[position - 1]}"
            )
    largest = max(len(cand_set) for cand_set in sets)

    rows = []
    started = time.perf_counter()
    baseline = [cand_set.candidates[0] for cand_set in sets]
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    rows.append(
        SweepRow(
            k=0,
            effective_k=0,
            scores={
                name: metrics.IN_PROCESS_METRICS[name](baseline, references).corpus_value
                for name in metrics.IN_PROCESS_METRICS
            },
            mean_expected_utility=math.nan,
            wall_time_ms=elapsed_ms,
        )
    )
    for k in cleaned:
        started = time.perf_counter()
        results = mbr_decode_corpus(
            sets,
            utility,
            corpus=corpus,
            include_self=include_self,
            top_k=k,
            threads=threads,
        )
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        selected = [result.selected_text for result in results]
        mean_expected = sum(
            result.expected_utilities[result.selected_index] for result in results
        ) / len(results)
        rows.append(
            SweepRow(
                k=k,
                effective_k=min(k, largest),
                scores={
                    name: metrics.IN_PROCESS_METRICS[name](
                        selected, references
                    ).corpus_value
                    for name in metrics.IN_PROCESS_METRICS
                },
                mean_expected_utility=mean_expected,
                wall_time_ms=elapsed_ms,
            )
        )
    return rows
