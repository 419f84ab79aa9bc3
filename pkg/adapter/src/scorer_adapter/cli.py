"""Command line entry: parse flags, build a config, serve stdio.

With --score-file the adapter skips the handshake protocol and scores
a file of request records offline, one response record per line.
"""

import argparse
import json
import sys

from .core import (
    DEFAULT_BATCH_SIZE,
    AdapterConfig,
    AdapterError,
    make_backend,
    parse_line,
    parse_mode,
    score_rows,
    serve,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adapter",
        description="Scoring endpoint speaking line-delimited JSON on stdio.",
    )
    parser.add_argument(
        "--mode",
        required=True,
        help="real-model, stub-overlap, stub-constant, or stub-constant(C)",
    )
    parser.add_argument("--model", help="model identifier for real-model mode")
    parser.add_argument("--batch-size", type=int, default=DEFAULT_BATCH_SIZE)
    parser.add_argument("--device", default="cpu", help="device hint, e.g. cpu or cuda")
    parser.add_argument(
        "--constant", type=float, default=0.5, help="score for stub-constant mode"
    )
    parser.add_argument("--score-file", help="score request records from this file and exit")
    parser.add_argument("--out", help="write offline responses here instead of stdout")
    return parser


def config_from_args(args) -> AdapterConfig:
    mode, inline_constant = parse_mode(args.mode)
    return AdapterConfig(
        mode=mode,
        model_id=args.model,
        batch_size=args.batch_size,
        device=args.device,
        constant=args.constant if inline_constant is None else inline_constant,
    )


def run_offline(config: AdapterConfig, score_path: str, out_path: str | None) -> int:
    try:
        backend = make_backend(config)
    except AdapterError as exc:
        print(f"adapter: {exc}", file=sys.stderr)
        return 1
    try:
        with open(score_path, encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    except OSError as exc:
        print(f"adapter: cannot read {score_path}: {exc}", file=sys.stderr)
        return 2
    entries = []
    for line in lines:
        stripped = line.strip()
        if not stripped:
            continue
        row, error = parse_line(stripped)
        entries.append(("row", row) if row is not None else ("done", error))
    scored = iter(
        score_rows([payload for kind, payload in entries if kind == "row"], config, backend)
    )
    rendered = "".join(
        json.dumps(payload if kind == "done" else next(scored), ensure_ascii=False) + "\n"
        for kind, payload in entries
    )
    if out_path:
        try:
            with open(out_path, "w", encoding="utf-8", newline="\n") as handle:
                handle.write(rendered)
        except OSError as exc:
            print(f"adapter: cannot write {out_path}: {exc}", file=sys.stderr)
            return 2
    else:
        sys.stdout.write(rendered)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except AdapterError as exc:
        print(f"adapter: {exc}", file=sys.stderr)
        return 2
    if args.score_file:
        return run_offline(config, args.score_file, args.out)
    return serve(config)


if __name__ == "__main__":
    sys.exit(main())
