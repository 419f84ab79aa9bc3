"""Plain-text and JSONL rendering for evaluations, comparisons,
filter accounting, sweeps, and training loops."""

import json
import math

from .filters import FilterReport
from .mbr import SweepRow
from .metrics import DISPLAY_NAMES
from .significance import SignificanceResult, SystemEvaluation


def _table(rows: list[list[str]]) -> str:
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = []
    for row in rows:
        cells = [cell.ljust(widths[i]) for i, cell in enumerate(row)]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines)


def render_eval_table(evaluations: list[SystemEvaluation]) -> str:
    """Systems as rows, metrics as columns, signatures underneath."""
    metric_names = list(evaluations[0].per_metric)
    labels = [DISPLAY_NAMES.get(name, name) for name in metric_names]
    header = ["system", "segments", *labels]
    rows = [header]
    for evaluation in evaluations:
        row = [evaluation.system_name, str(evaluation.segment_count)]
        for name in metric_names:
            row.append(f"{evaluation.per_metric[name].corpus_value:.3f}")
        rows.append(row)
    lines = [_table(rows), ""]
    for name in metric_names:
        lines.append(f"{name} signature: {evaluations[0].per_metric[name].signature}")
    return "\n".join(lines)


def render_comparison(
    baseline: SystemEvaluation,
    contrast: SystemEvaluation,
    results: list[SignificanceResult],
) -> str:
    """Both systems plus per-metric deltas; asterisks mark significance."""
    by_name = {result.metric_name: result for result in results}
    metric_names = list(baseline.per_metric)
    labels = [DISPLAY_NAMES.get(name, name) for name in metric_names]
    header = ["system", "segments", *labels]
    rows = [header]
    rows.append(
        [
            baseline.system_name,
            str(baseline.segment_count),
            *(f"{baseline.per_metric[n].corpus_value:.3f}" for n in metric_names),
        ]
    )
    contrast_row = [contrast.system_name, str(contrast.segment_count)]
    for name in metric_names:
        mark = "*" if by_name[name].significant else ""
        contrast_row.append(f"{contrast.per_metric[name].corpus_value:.3f}{mark}")
    rows.append(contrast_row)
    lines = [_table(rows), ""]
    for name in metric_names:
        result = by_name[name]
        mark = " *" if result.significant else ""
        lines.append(
            f"{name}: delta {result.delta:+.3f}  p {result.p_value:.4f}{mark}"
        )
    first = results[0]
    lines.append("")
    lines.append(
        f"paired bootstrap: {first.trials} trials, alpha {first.alpha:g}, "
        f"seed {first.seed}, {first.generator}; "
        f"* marks p < alpha versus {baseline.system_name}"
    )
    for name in metric_names:
        lines.append(f"{name} signature: {baseline.per_metric[name].signature}")
    return "\n".join(lines)


def comparison_records(
    baseline: SystemEvaluation,
    contrast: SystemEvaluation,
    results: list[SignificanceResult],
) -> list[dict]:
    records = []
    for result in results:
        records.append(
            {
                "metric": result.metric_name,
                "baseline": baseline.system_name,
                "contrast": contrast.system_name,
                "baseline_value": baseline.per_metric[result.metric_name].corpus_value,
                "contrast_value": contrast.per_metric[result.metric_name].corpus_value,
                "delta": result.delta,
                "p_value": result.p_value,
                "significant": result.significant,
                "trials": result.trials,
                "alpha": result.alpha,
                "seed": result.seed,
                "generator": result.generator,
                "signature": baseline.per_metric[result.metric_name].signature,
            }
        )
    return records


def evaluation_records(evaluation: SystemEvaluation) -> list[dict]:
    return [
        {
            "system": evaluation.system_name,
            "metric": name,
            "value": score.corpus_value,
            "segments": evaluation.segment_count,
            "signature": score.signature,
        }
        for name, score in evaluation.per_metric.items()
    ]


def write_jsonl(records: list[dict], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False))
            handle.write("\n")


def render_filter_report(report: FilterReport) -> str:
    lines = [
        f"pairs in:        {report.total}",
        f"duplicates out:  {report.dedup_removed}",
        f"rejected:        {report.rejected}",
        f"accepted:        {report.accepted}",
        "per-rule rejections:",
    ]
    for rule, count in report.per_rule_rejections.items():
        lines.append(f"  {rule}: {count}")
    return "\n".join(lines)


def render_sweep_table(rows: list[SweepRow]) -> str:
    """TSV with one row per candidate count; k=0 is the rank-0 baseline."""
    metric_names = list(rows[0].scores)
    labels = [DISPLAY_NAMES.get(name, name) for name in metric_names]
    header = ["k", "effective_k", *labels, "mean_expected_utility", "wall_time_ms"]
    lines = ["\t".join(header)]
    for row in rows:
        cells = [str(row.k), str(row.effective_k)]
        cells.extend(f"{row.scores[name]:.4f}" for name in metric_names)
        if math.isnan(row.mean_expected_utility):
            cells.append("nan")
        else:
            cells.append(f"{row.mean_expected_utility:.6f}")
        cells.append(f"{row.wall_time_ms:.1f}")
        lines.append("\t".join(cells))
    return "\n".join(lines)


def render_loop_report(history: dict[str, list[float]], final_model: str | None,
                       stop_reason: str | None, segments: int | None = None,
                       metric_names: list[str] | None = None) -> str:
    # resumed states load their history with sorted keys, so a caller
    # wanting stable columns across fresh and resumed runs must pass
    # the order explicitly
    if metric_names is None:
        metric_names = list(history)
    iterations = len(next(iter(history.values()))) if history else 0
    header = ["iteration", *metric_names]
    rows = [header]
    for i in range(iterations):
        label = "baseline" if i == 0 else str(i)
        rows.append([label, *(f"{history[name][i]:.3f}" for name in metric_names)])
    lines = [_table(rows)]
    if segments is not None:
        lines.append("")
        lines.append(f"training segments: {segments}")
    if stop_reason:
        lines.append("")
        lines.append(f"stopped: {stop_reason}")
    if final_model:
        lines.append(f"final model: {final_model}")
    return "\n".join(lines)
