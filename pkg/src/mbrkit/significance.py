"""System evaluation and paired bootstrap resampling.

Two systems are compared on the same test set by resampling segments
with replacement and asking how often the contrast system fails to beat
the baseline.  BLEU is recomputed from summed per-segment statistics in
every resample because corpus BLEU does not decompose into a mean of
sentence scores; chrF resamples work on per-segment scores directly.
"""

from dataclasses import dataclass, field

import numpy as np

from . import metrics
from .errors import AlignmentError, ConfigError, ValidationError

DEFAULT_TRIALS = 1000
DEFAULT_ALPHA = 0.05
DEFAULT_SEED = 1
BOOTSTRAP_GENERATOR = "numpy:PCG64"

# trials per index block; bounds memory without changing drawn numbers
_TRIAL_BLOCK = 100


@dataclass
class SystemEvaluation:
    system_name: str
    segment_count: int
    per_metric: dict[str, metrics.MetricScore]
    sentence_stats: dict[str, list] = field(default_factory=dict)


def evaluate_system(
    hypotheses: list[str],
    references: list[str],
    metric_names=("chrf", "bleu"),
    system_name: str = "system",
    sources: list[str] | None = None,
    scorer=None,
) -> SystemEvaluation:
    """Score one output against references under each named metric.

    Names outside the in-process registry are routed to the external
    scorer endpoint; its sentence scores are averaged for the corpus
    value and its announced name/version becomes the signature.
    """
    if len(hypotheses) != len(references):
        raise AlignmentError(
            f"{len(hypotheses)} hypotheses for {len(references)} references"
        )
    per_metric: dict[str, metrics.MetricScore] = {}
    stats: dict[str, list] = {}
    for name in metric_names:
        if name in metrics.IN_PROCESS_METRICS:
            per_metric[name] = metrics.IN_PROCESS_METRICS[name](hypotheses, references)
            if name == "bleu":
                stats[name] = [
                    metrics.bleu_pair_stats(h, r)
                    for h, r in zip(hypotheses, references)
                ]
        else:
            if scorer is None:
                raise ConfigError(
                    f"metric {name!r} is not in-process and no scorer "
                    f"endpoint was provided"
                )
            caps = scorer.capabilities
            if caps.needs_src and sources is None:
                raise ConfigError(
                    f"scorer {caps.name} needs source segments for metric {name!r}"
                )
            from .scorer import ScoreRequest

            requests = [
                ScoreRequest(
                    id=i,
                    mt=hypothesis,
                    ref=references[i],
                    src=sources[i] if sources is not None else None,
                )
                for i, hypothesis in enumerate(hypotheses)
            ]
            responses = scorer.score_batch(requests)
            values = [response.score for response in responses]
            corpus_value = sum(values) / len(values) if values else 0.0
            per_metric[name] = metrics.MetricScore(
                corpus_value=corpus_value,
                sentence_values=values,
                signature=f"{caps.name}/{caps.version}",
            )
    return SystemEvaluation(
        system_name=system_name,
        segment_count=len(hypotheses),
        per_metric=per_metric,
        sentence_stats=stats,
    )


@dataclass
class SignificanceResult:
    metric_name: str
    delta: float
    p_value: float
    trials: int
    significant: bool
    alpha: float
    seed: int
    generator: str = BOOTSTRAP_GENERATOR


def _check_bootstrap_args(n: int, trials: int, alpha: float):
    if n < 1:
        raise ValidationError("cannot resample an empty score vector")
    if trials < 1:
        raise ValidationError(f"trials must be positive, got {trials}")
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")


def _index_blocks(rng: np.random.Generator, n: int, trials: int):
    remaining = trials
    while remaining > 0:
        block = min(remaining, _TRIAL_BLOCK)
        yield rng.integers(0, n, size=(block, n))
        remaining -= block


def paired_bootstrap(
    scores_a,
    scores_b,
    trials: int = DEFAULT_TRIALS,
    alpha: float = DEFAULT_ALPHA,
    seed: int = DEFAULT_SEED,
    metric_name: str = "score",
) -> SignificanceResult:
    """One-sided paired bootstrap on per-segment scores.

    The p-value is add-one smoothed: (1 + #{resampled delta <= 0}) over
    (trials + 1), so identical systems report exactly 1.0 and a sweep
    of all-better resamples reports 1/(trials+1), never 0.
    """
    a = np.asarray(scores_a, dtype=np.float64)
    b = np.asarray(scores_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise AlignmentError(
            f"score vectors disagree: {a.shape} versus {b.shape}"
        )
    _check_bootstrap_args(len(a), trials, alpha)
    rng = np.random.default_rng(seed)
    not_better = 0
    for indices in _index_blocks(rng, len(a), trials):
        deltas = b[indices].mean(axis=1) - a[indices].mean(axis=1)
        not_better += int(np.count_nonzero(deltas <= 0.0))
    p_value = (1 + not_better) / (trials + 1)
    delta = float(b.mean() - a.mean())
    return SignificanceResult(
        metric_name=metric_name,
        delta=delta,
        p_value=p_value,
        trials=trials,
        significant=p_value < alpha,
        alpha=alpha,
        seed=seed,
    )


def paired_bootstrap_bleu(
    stats_a,
    stats_b,
    trials: int = DEFAULT_TRIALS,
    alpha: float = DEFAULT_ALPHA,
    seed: int = DEFAULT_SEED,
    metric_name: str = "bleu",
) -> SignificanceResult:
    """Paired bootstrap where every resample recomputes corpus BLEU
    from summed sufficient statistics."""
    if len(stats_a) != len(stats_b):
        raise AlignmentError(
            f"statistic vectors disagree: {len(stats_a)} versus {len(stats_b)}"
        )
    _check_bootstrap_args(len(stats_a), trials, alpha)
    rows_a = np.asarray([s.as_row() for s in stats_a], dtype=np.int64)
    rows_b = np.asarray([s.as_row() for s in stats_b], dtype=np.int64)

    def corpus_score(rows: np.ndarray) -> float:
        summed = metrics.BleuStats.from_row(rows.sum(axis=0))
        return metrics.bleu_score_from_stats(summed, effective_order=False)

    rng = np.random.default_rng(seed)
    not_better = 0
    for indices in _index_blocks(rng, len(stats_a), trials):
        for trial_indices in indices:
            delta = corpus_score(rows_b[trial_indices]) - corpus_score(
                rows_a[trial_indices]
            )
            if delta <= 0.0:
                not_better += 1
    p_value = (1 + not_better) / (trials + 1)
    delta = corpus_score(rows_b) - corpus_score(rows_a)
    return SignificanceResult(
        metric_name=metric_name,
        delta=float(delta),
        p_value=p_value,
        trials=trials,
        significant=p_value < alpha,
        alpha=alpha,
        seed=seed,
    )


def compare_systems(
    eval_a: SystemEvaluation,
    eval_b: SystemEvaluation,
    trials: int = DEFAULT_TRIALS,
    alpha: float = DEFAULT_ALPHA,
    seed: int = DEFAULT_SEED,
) -> list[SignificanceResult]:
    """Significance of B over baseline A on every shared metric.

    Each metric uses a generator freshly seeded with the same seed, so
    all metrics see the same resampled segment indices.
    """
    if eval_a.segment_count != eval_b.segment_count:
        raise ConfigError(
            f"systems cover different segment counts: "
            f"{eval_a.segment_count} versus {eval_b.segment_count}"
        )
    metrics_a = set(eval_a.per_metric)
    metrics_b = set(eval_b.per_metric)
    if metrics_a != metrics_b:
        odd = sorted(metrics_a.symmetric_difference(metrics_b))
        raise ConfigError(f"systems were scored under different metrics: {odd}")
    results = []
    for name in eval_a.per_metric:
        if name in eval_a.sentence_stats and name in eval_b.sentence_stats:
            result = paired_bootstrap_bleu(
                eval_a.sentence_stats[name],
                eval_b.sentence_stats[name],
                trials=trials,
                alpha=alpha,
                seed=seed,
                metric_name=name,
            )
        else:
            result = paired_bootstrap(
                eval_a.per_metric[name].sentence_values,
                eval_b.per_metric[name].sentence_values,
                trials=trials,
                alpha=alpha,
                seed=seed,
                metric_name=name,
            )
        # report the corpus-level difference, which for BLEU the
        # bootstrap already computed from summed statistics
        corpus_delta = (
            eval_b.per_metric[name].corpus_value
            - eval_a.per_metric[name].corpus_value
        )
        result.delta = float(corpus_delta)
        results.append(result)
    return results
