"""Configuration, scoring backends, and the serving loop."""

import json
import math
import os
import select
import sys
from dataclasses import dataclass
from typing import Callable

from .chrf import sentence_chrf

MODES = ("real-model", "stub-overlap", "stub-constant")
DEFAULT_BATCH_SIZE = 32


class AdapterError(Exception):
    """Anything that should stop the adapter with a message, not a trace."""


def parse_mode(text: str) -> tuple[str, float | None]:
    """Split a mode flag into (mode, constant).

    The constant stub takes its value either inline, as in
    "stub-constant(0.7)", or from the separate constant flag.
    """
    if text.startswith("stub-constant(") and text.endswith(")"):
        inner = text[len("stub-constant("):-1]
        try:
            return "stub-constant", float(inner)
        except ValueError:
            raise AdapterError(f"bad constant in mode {text!r}")
    if text not in MODES:
        raise AdapterError(f"unknown mode {text!r}; choose from {', '.join(MODES)}")
    return text, None


@dataclass(frozen=True)
class AdapterConfig:
    mode: str
    model_id: str | None = None
    batch_size: int = DEFAULT_BATCH_SIZE
    device: str = "cpu"
    constant: float = 0.5

    def __post_init__(self):
        if self.mode not in MODES:
            raise AdapterError(f"unknown mode {self.mode!r}; choose from {', '.join(MODES)}")
        if self.batch_size < 1:
            raise AdapterError(f"batch size must be at least 1, got {self.batch_size}")
        if self.mode == "real-model" and not self.model_id:
            raise AdapterError("real-model mode needs a model identifier")
        if not math.isfinite(self.constant):
            raise AdapterError(f"constant must be finite, got {self.constant}")


@dataclass(frozen=True)
class Backend:
    """A batch scorer plus the input layout it requires."""

    name: str
    needs_src: bool
    needs_ref: bool
    run: Callable[[list[dict]], list[float]]


def make_backend(config: AdapterConfig) -> Backend:
    if config.mode == "stub-constant":
        value = config.constant
        return Backend(
            name="stub-constant",
            needs_src=False,
            needs_ref=False,
            run=lambda rows: [value] * len(rows),
        )
    if config.mode == "stub-overlap":
        return Backend(
            name="stub-overlap",
            needs_src=False,
            needs_ref=True,
            run=lambda rows: [sentence_chrf(row["mt"], row["ref"]) / 100.0 for row in rows],
        )
    # real-model: the heavy import happens only on this path
    from . import realmodel

    return realmodel.load_backend(config)


def parse_line(line: str) -> tuple[dict | None, dict | None]:
    """Parse one request line into (row, error_record); exactly one is set."""
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        return None, {"id": -1, "error": f"bad request line: {exc}"}
    if not isinstance(record, dict):
        return None, {"id": -1, "error": "request is not an object"}
    return record, None


def _row_problem(row: dict, backend: Backend) -> str | None:
    row_id = row.get("id")
    if not isinstance(row_id, int) or isinstance(row_id, bool):
        return "missing or non-integer id"
    if not isinstance(row.get("mt"), str):
        return "missing mt text"
    if backend.needs_src and not isinstance(row.get("src"), str):
        return f"{backend.name} needs src"
    if backend.needs_ref and not isinstance(row.get("ref"), str):
        return f"{backend.name} needs ref"
    return None


def score_rows(rows: list[dict], config: AdapterConfig, backend: Backend) -> list[dict]:
    """One response record per row, in input order.

    Rows missing a required field turn into per-row error records; the
    rest are scored in batches no larger than the configured size.
    """
    results: list[dict | None] = [None] * len(rows)
    batch: list[tuple[int, dict]] = []

    def flush():
        if not batch:
            return
        scores = backend.run([row for _, row in batch])
        if len(scores) != len(batch):
            raise AdapterError(
                f"{backend.name} returned {len(scores)} scores for {len(batch)} rows"
            )
        for (position, row), score in zip(batch, scores):
            value = float(score)
            if math.isfinite(value):
                results[position] = {"id": row["id"], "score": value}
            else:
                results[position] = {"id": row["id"], "error": "non-finite score"}
        batch.clear()

    for position, row in enumerate(rows):
        problem = _row_problem(row, backend)
        if problem is not None:
            row_id = row.get("id")
            if not isinstance(row_id, int) or isinstance(row_id, bool):
                row_id = -1
            results[position] = {"id": row_id, "error": problem}
            continue
        batch.append((position, row))
        if len(batch) == config.batch_size:
            flush()
    flush()
    return results


class _LineReader:
    """Request-line reader that can tell when more input is waiting.

    A real pipe is read at the descriptor level so a burst written by
    the client gets scored as one batch.  Stream objects without a
    descriptor (in-memory tests) cannot block, so every remaining line
    counts as waiting.
    """

    def __init__(self, stream):
        self._stream = stream
        self._pending = b""
        self._eof = False
        try:
            self._fd = stream.fileno()
        except (AttributeError, OSError, ValueError):
            self._fd = None

    def next_line(self, wait: bool) -> str | None:
        if self._fd is None:
            line = self._stream.readline()
            return line.rstrip("\n") if line else None
        while True:
            cut = self._pending.find(b"\n")
            if cut >= 0:
                line = self._pending[:cut]
                self._pending = self._pending[cut + 1:]
                return line.decode("utf-8", errors="replace")
            if self._eof:
                if self._pending:
                    line, self._pending = self._pending, b""
                    return line.decode("utf-8", errors="replace")
                return None
            if not wait and not select.select([self._fd], [], [], 0)[0]:
                return None
            chunk = os.read(self._fd, 65536)
            if chunk:
                self._pending += chunk
            else:
                self._eof = True


def hello_record(config: AdapterConfig, backend: Backend) -> dict:
    from . import __version__

    return {
        "hello": {
            "name": backend.name,
            "version": __version__,
            "needs_src": backend.needs_src,
            "needs_ref": backend.needs_ref,
            "max_batch": config.batch_size,
            "out_of_order": False,
        }
    }


def _answer_lines(lines: list[str], config: AdapterConfig, backend: Backend) -> list[dict]:
    entries: list[tuple[str, dict]] = []
    for line in lines:
        stripped = line.strip()
        if not stripped:
            continue
        row, error = parse_line(stripped)
        entries.append(("row", row) if row is not None else ("done", error))
    scored = iter(
        score_rows([payload for kind, payload in entries if kind == "row"], config, backend)
    )
    return [payload if kind == "done" else next(scored) for kind, payload in entries]


def serve(config: AdapterConfig, stdin=None, stdout=None, stderr=None) -> int:
    """Run the endpoint until the request stream closes.

    The backend loads before anything is written: a model that cannot
    load produces a diagnostic on the error stream and a nonzero exit
    with no handshake, so the client fails at startup rather than
    mid-batch.  Malformed request lines get an error response and the
    loop carries on.
    """
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    try:
        backend = make_backend(config)
    except AdapterError as exc:
        print(f"adapter: {exc}", file=stderr)
        return 1
    stdout.write(json.dumps(hello_record(config, backend)) + "\n")
    stdout.flush()
    reader = _LineReader(stdin)
    while True:
        line = reader.next_line(wait=True)
        if line is None:
            return 0
        lines = [line]
        while len(lines) < config.batch_size:
            line = reader.next_line(wait=False)
            if line is None:
                break
            lines.append(line)
        for record in _answer_lines(lines, config, backend):
            stdout.write(json.dumps(record, ensure_ascii=False) + "\n")
        stdout.flush()
