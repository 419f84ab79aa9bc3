"""Command line entry points.

Exit codes: 0 on success, 1 for bad inputs or configuration, 2 when an
external process or the operating system fails.
"""

import argparse
import json
import os
import sys

from . import __version__, filters, mbr, metrics, pipeline, report, scorer, significance
from .corpus import (
    load_candidate_sets,
    load_parallel_corpus,
    write_parallel_corpus,
)
from .errors import ConfigError, MbrkitError, ValidationError


class _Parser(argparse.ArgumentParser):
    # argparse wants to exit(2) on usage errors; route them through the
    # toolkit's error taxonomy instead (bad flags are the user's input)
    def error(self, message):
        raise ValidationError(message)


def _write_or_print(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
            handle.write("\n")
    else:
        print(text)


def _read_lines(path: str) -> list[str]:
    from .corpus import _read_lines as read

    return read(path)


def _make_scorer_client(args) -> scorer.ScorerClient:
    command = getattr(args, "scorer_cmd", None) or os.environ.get(
        scorer.SCORER_CMD_ENV
    )
    if not command:
        raise ConfigError(
            f"an external scorer needs a command; pass --scorer-cmd or "
            f"set {scorer.SCORER_CMD_ENV}"
        )
    return scorer.ScorerClient(command, timeout=args.scorer_timeout)


def cmd_filter(args) -> int:
    corpus = load_parallel_corpus(args.source, args.target)
    config = filters.FilterConfig(
        max_avg_word_len=args.max_avg_word_len,
        max_chars=args.max_chars,
        max_digit_ratio=args.max_digit_ratio,
        max_longest_word=args.max_longest_word,
        max_words=args.max_words,
        min_edit_distance=args.min_edit_distance,
        min_chars=args.min_chars,
        min_lang_prob=args.min_lang_prob,
        min_bicleaner=args.bicleaner,
    )
    survivors, filter_report = filters.run_filter_pipeline(
        corpus, config, sidecar_path=args.sidecar, threads=args.threads
    )
    write_parallel_corpus(survivors, args.out_source, args.out_target)
    print(report.render_filter_report(filter_report))
    if args.report:
        with open(args.report, "w", encoding="utf-8", newline="\n") as handle:
            json.dump(filter_report.as_dict(), handle, indent=1)
            handle.write("\n")
    return 0


def _utility_from_args(args, client_holder: list) -> mbr.Utility:
    if args.utility == "external":
        client = _make_scorer_client(args)
        client_holder.append(client)
        return mbr.ExternalUtility(client)
    return mbr.make_utility(args.utility)


def cmd_mbr(args) -> int:
    sets = load_candidate_sets(args.candidates)
    corpus = load_parallel_corpus(args.source) if args.source else None
    clients: list = []
    try:
        utility = _utility_from_args(args, clients)
        results = mbr.mbr_decode_corpus(
            sets,
            utility,
            corpus=corpus,
            include_self=not args.no_include_self,
            top_k=args.top_k,
            threads=args.threads,
        )
    finally:
        for client in clients:
            client.close()
    with open(args.out, "w", encoding="utf-8", newline="\n") as handle:
        for result in results:
            handle.write(result.selected_text)
            handle.write("\n")
    if args.details:
        records = [
            {
                "segment_id": result.segment_id,
                "selected_index": result.selected_index,
                "expected_utility": result.expected_utilities[result.selected_index],
                "utility": result.utility_name,
            }
            for result in results
        ]
        report.write_jsonl(records, args.details)
    return 0


def cmd_sweep(args) -> int:
    sets = load_candidate_sets(args.candidates)
    references = _read_lines(args.reference)
    corpus = load_parallel_corpus(args.source) if args.source else None
    counts = mbr.DEFAULT_SWEEP_COUNTS
    if args.counts:
        try:
            counts = tuple(int(part) for part in args.counts.split(","))
        except ValueError:
            raise ValidationError(f"cannot parse counts {args.counts!r}")
    clients: list = []
    try:
        utility = _utility_from_args(args, clients)
        rows = mbr.sweep_candidate_counts(
            sets,
            references,
            utility,
            counts=counts,
            corpus=corpus,
            include_self=not args.no_include_self,
            threads=args.threads,
        )
    finally:
        for client in clients:
            client.close()
    _write_or_print(report.render_sweep_table(rows), args.out)
    return 0


def _parse_metric_names(raw: str) -> tuple[str, ...]:
    names = tuple(name.strip() for name in raw.split(",") if name.strip())
    if not names:
        raise ValidationError(f"no metric names in {raw!r}")
    return names


def cmd_eval(args) -> int:
    hypotheses = _read_lines(args.hyp)
    references = _read_lines(args.ref)
    names = _parse_metric_names(args.metrics)
    client = None
    try:
        if any(name not in metrics.IN_PROCESS_METRICS for name in names):
            client = _make_scorer_client(args)
        evaluation = significance.evaluate_system(
            hypotheses,
            references,
            metric_names=names,
            system_name=args.system_name,
            scorer=client,
        )
    finally:
        if client is not None:
            client.close()
    print(report.render_eval_table([evaluation]))
    if args.json_records:
        report.write_jsonl(report.evaluation_records(evaluation), args.json_records)
    return 0


def cmd_compare(args) -> int:
    hyp_a = _read_lines(args.hyp_a)
    hyp_b = _read_lines(args.hyp_b)
    references = _read_lines(args.ref)
    names = _parse_metric_names(args.metrics)
    client = None
    try:
        if any(name not in metrics.IN_PROCESS_METRICS for name in names):
            client = _make_scorer_client(args)
        eval_a = significance.evaluate_system(
            hyp_a, references, metric_names=names,
            system_name=args.name_a, scorer=client,
        )
        eval_b = significance.evaluate_system(
            hyp_b, references, metric_names=names,
            system_name=args.name_b, scorer=client,
        )
    finally:
        if client is not None:
            client.close()
    results = significance.compare_systems(
        eval_a, eval_b, trials=args.trials, alpha=args.alpha, seed=args.seed
    )
    print(report.render_comparison(eval_a, eval_b, results))
    if args.json_records:
        report.write_jsonl(
            report.comparison_records(eval_a, eval_b, results), args.json_records
        )
    return 0


def cmd_loop(args) -> int:
    config = pipeline.load_loop_config(args.config)
    state = pipeline.run_loop(config, args.work_dir)
    segments = len(load_parallel_corpus(config.train_source))
    print(
        report.render_loop_report(
            state.history,
            state.final_model,
            state.stop_reason,
            segments=segments,
            metric_names=list(config.tracked_metrics),
        )
    )
    return 0


def cmd_mock_translate(args) -> int:
    corpus = load_parallel_corpus(args.source, args.target)
    sets = pipeline.mock_translate(corpus, args.n, args.noise_rate, args.seed)
    from .corpus import write_candidate_sets

    write_candidate_sets(sets, args.out)
    return 0


def cmd_stub_scorer(args) -> int:
    return scorer.serve_stub(
        mode=args.mode, constant=args.constant, max_batch=args.max_batch
    )


def _add_scorer_flags(parser):
    parser.add_argument(
        "--scorer-cmd",
        help=f"external scorer command (default: ${scorer.SCORER_CMD_ENV})",
    )
    parser.add_argument(
        "--scorer-timeout", type=float, default=scorer.DEFAULT_TIMEOUT,
        help="seconds to wait for endpoint responses",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mbrkit", description=__doc__)
    parser.add_argument("--version", action="version", version=f"mbrkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("filter", help="clean a parallel corpus")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--out-source", required=True)
    p.add_argument("--out-target", required=True)
    p.add_argument(
        "--sidecar",
        help="per-segment score file (lang_prob_src/lang_prob_tgt/bicleaner)",
    )
    p.add_argument("--report", help="write the accounting as JSON here")
    p.add_argument("--max-avg-word-len", type=float, default=15.0)
    p.add_argument("--max-chars", type=int, default=500)
    p.add_argument("--max-digit-ratio", type=float, default=0.15)
    p.add_argument("--max-longest-word", type=int, default=28)
    p.add_argument("--max-words", type=int, default=100)
    p.add_argument("--min-edit-distance", type=int, default=2)
    p.add_argument("--min-chars", type=int, default=5)
    p.add_argument("--min-lang-prob", type=float, default=0.10)
    p.add_argument(
        "--bicleaner", type=float, nargs="?", const=0.5, default=None,
        help="enable the cleanliness-score rule at this threshold (default 0.5)",
    )
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(handler=cmd_filter)

    p = sub.add_parser("mbr", help="rerank candidate sets")
    p.add_argument("--candidates", required=True)
    p.add_argument("--source", help="source segments, needed by source-aware scorers")
    p.add_argument("--utility", default="chrf",
                   choices=["chrf", "bleu", "neg-edit", "external"])
    p.add_argument("--top-k", type=int, default=None)
    p.add_argument("--no-include-self", action="store_true",
                   help="drop each candidate's self-utility term")
    p.add_argument("--out", required=True)
    p.add_argument("--details", help="write per-segment selection records here")
    p.add_argument("--threads", type=int, default=1)
    _add_scorer_flags(p)
    p.set_defaults(handler=cmd_mbr)

    p = sub.add_parser("sweep", help="quality as a function of candidate count")
    p.add_argument("--candidates", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--source")
    p.add_argument("--utility", default="chrf",
                   choices=["chrf", "bleu", "neg-edit", "external"])
    p.add_argument("--counts", help="comma-separated candidate counts")
    p.add_argument("--no-include-self", action="store_true")
    p.add_argument("--out", help="write the TSV here instead of stdout")
    p.add_argument("--threads", type=int, default=1)
    _add_scorer_flags(p)
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("eval", help="score hypotheses against references")
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--metrics", default="chrf,bleu")
    p.add_argument("--system-name", default="system")
    p.add_argument("--json-records", help="write machine-readable records here")
    _add_scorer_flags(p)
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("compare", help="significance test two systems")
    p.add_argument("--hyp-a", required=True, help="baseline hypotheses")
    p.add_argument("--hyp-b", required=True, help="contrast hypotheses")
    p.add_argument("--ref", required=True)
    p.add_argument("--metrics", default="chrf,bleu")
    p.add_argument("--name-a", default="baseline")
    p.add_argument("--name-b", default="contrast")
    p.add_argument("--trials", type=int, default=significance.DEFAULT_TRIALS)
    p.add_argument("--alpha", type=float, default=significance.DEFAULT_ALPHA)
    p.add_argument("--seed", type=int, default=significance.DEFAULT_SEED)
    p.add_argument("--json-records")
    _add_scorer_flags(p)
    p.set_defaults(handler=cmd_compare)

    p = sub.add_parser("loop", help="run the self-improvement loop")
    p.add_argument("--config", required=True)
    p.add_argument("--work-dir", required=True)
    p.set_defaults(handler=cmd_loop)

    p = sub.add_parser("mock-translate", help="fabricate noisy candidate sets")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--noise-rate", type=float, required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_mock_translate)

    p = sub.add_parser("stub-scorer", help="serve a stub scorer endpoint on stdio")
    p.add_argument("--mode", default="overlap", choices=list(scorer.STUB_MODES))
    p.add_argument("--constant", type=float, default=0.5)
    p.add_argument("--max-batch", type=int, default=scorer.DEFAULT_MAX_BATCH)
    p.set_defaults(handler=cmd_stub_scorer)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args) or 0
    except MbrkitError as exc:
        print(f"mbrkit: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"mbrkit: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
