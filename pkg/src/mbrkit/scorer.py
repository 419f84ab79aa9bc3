"""Wire protocol for external scorer processes.

An endpoint is a child process speaking UTF-8 JSON lines on stdio.  It
announces itself with a hello record, then answers each request line
with a response line carrying the same id.  The client owns batching,
timeouts, and diagnosis when the endpoint dies; closing the request
stream tells a well-behaved endpoint to exit 0.
"""

import json
import math
import shlex
import subprocess
import sys
import threading
import time
from collections import deque
from dataclasses import dataclass
from queue import Empty, Queue

from . import metrics
from .errors import (
    ConfigError,
    ProtocolError,
    StartupError,
    TransportError,
    ValidationError,
)

SCORER_CMD_ENV = "MBR_SCORER_CMD"
DEFAULT_TIMEOUT = 120.0
DEFAULT_MAX_BATCH = 64
STUB_MODES = ("constant", "overlap", "length-penalty")


@dataclass(frozen=True)
class ScorerCapabilities:
    name: str
    version: str
    needs_src: bool
    needs_ref: bool
    max_batch: int
    out_of_order: bool = False


@dataclass(frozen=True)
class ScoreRequest:
    id: int
    mt: str
    src: str | None = None
    ref: str | None = None


@dataclass(frozen=True)
class ScoreResponse:
    id: int
    score: float


def _clip(text: str, limit: int = 200) -> str:
    return text if len(text) <= limit else text[: limit - 3] + "..."


def parse_capabilities(line: str) -> ScorerCapabilities:
    try:
        record = json.loads(line)
    except json.JSONDecodeError:
        raise StartupError(f"endpoint greeting is not JSON: {_clip(line)!r}")
    hello = record.get("hello") if isinstance(record, dict) else None
    if not isinstance(hello, dict):
        raise StartupError(f"endpoint greeting has no hello record: {_clip(line)!r}")
    try:
        caps = ScorerCapabilities(
            name=str(hello["name"]),
            version=str(hello["version"]),
            needs_src=bool(hello["needs_src"]),
            needs_ref=bool(hello["needs_ref"]),
            max_batch=int(hello["max_batch"]),
            out_of_order=bool(hello.get("out_of_order", False)),
        )
    except KeyError as exc:
        raise StartupError(f"endpoint greeting is missing {exc.args[0]!r}")
    if caps.max_batch < 1:
        raise StartupError(f"endpoint announced max_batch={caps.max_batch}")
    return caps


def _request_line(request: ScoreRequest, caps: ScorerCapabilities) -> str:
    record: dict = {"id": request.id}
    if caps.needs_src:
        record["src"] = request.src
    record["mt"] = request.mt
    if caps.needs_ref:
        record["ref"] = request.ref
    return json.dumps(record, ensure_ascii=False)


class ScorerClient:
    """Launches and drives one scorer endpoint subprocess."""

    def __init__(self, command, timeout: float = DEFAULT_TIMEOUT):
        if isinstance(command, str):
            argv = shlex.split(command)
        else:
            argv = list(command)
        if not argv:
            raise ConfigError("scorer command is empty")
        self._argv = argv
        self._timeout = timeout
        self._lock = threading.Lock()
        self._closed = False
        self._stderr_tail: deque[str] = deque(maxlen=40)
        self._lines: Queue = Queue()
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                encoding="utf-8",
            )
        except OSError as exc:
            raise StartupError(f"cannot launch scorer {argv[0]!r}: {exc}")
        threading.Thread(target=self._drain_stdout, daemon=True).start()
        threading.Thread(target=self._drain_stderr, daemon=True).start()
        line = self._next_line(time.monotonic() + timeout, "greeting")
        if line is None:
            raise StartupError(
                f"endpoint exited before its greeting{self._diagnostics()}"
            )
        self.capabilities = parse_capabilities(line)

    def _drain_stdout(self):
        for line in self._proc.stdout:
            self._lines.put(line.rstrip("\n"))
        self._lines.put(None)

    def _drain_stderr(self):
        for line in self._proc.stderr:
            self._stderr_tail.append(line.rstrip("\n"))

    def _diagnostics(self) -> str:
        code = self._proc.poll()
        parts = []
        if code is not None:
            parts.append(f"exit code {code}")
        if self._stderr_tail:
            tail = "\n  ".join(self._stderr_tail)
            parts.append(f"stderr tail:\n  {tail}")
        return " (" + "; ".join(parts) + ")" if parts else ""

    def _next_line(self, deadline: float, phase: str) -> str | None:
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise TransportError(
                    f"endpoint did not answer within {self._timeout:g}s "
                    f"while waiting for {phase}{self._diagnostics()}"
                )
            try:
                return self._lines.get(timeout=min(remaining, 0.5))
            except Empty:
                continue

    def score_batch(self, requests) -> list[ScoreResponse]:
        """Score requests in order; splits into endpoint-sized chunks.

        Requests must carry unique ids within the call.  Matching is by
        id, so endpoints with the out_of_order capability may answer a
        chunk in any order.
        """
        requests = list(requests)
        if not requests:
            return []
        seen_ids = set()
        caps = self.capabilities
        for request in requests:
            if request.id in seen_ids:
                raise ValidationError(f"duplicate request id {request.id}")
            seen_ids.add(request.id)
            if caps.needs_src and request.src is None:
                raise ValidationError(
                    f"endpoint {caps.name} needs src but request {request.id} has none"
                )
            if caps.needs_ref and request.ref is None:
                raise ValidationError(
                    f"endpoint {caps.name} needs ref but request {request.id} has none"
                )
        if self._closed:
            raise TransportError("scorer endpoint is already closed")
        responses = []
        with self._lock:
            for start in range(0, len(requests), caps.max_batch):
                chunk = requests[start: start + caps.max_batch]
                responses.extend(self._score_chunk(chunk))
        return responses

    def _score_chunk(self, chunk) -> list[ScoreResponse]:
        caps = self.capabilities
        payload = "".join(
            _request_line(request, caps) + "\n" for request in chunk
        )
        try:
            self._proc.stdin.write(payload)
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError):
            raise TransportError(
                f"endpoint stopped reading with a {len(chunk)}-request "
                f"batch in flight{self._diagnostics()}"
            )
        scores: dict[int, float] = {}
        pending = {request.id for request in chunk}
        deadline = time.monotonic() + self._timeout
        while pending:
            line = self._next_line(deadline, f"{len(pending)} responses")
            if line is None:
                raise TransportError(
                    f"endpoint closed its output with {len(pending)} of "
                    f"{len(chunk)} responses outstanding{self._diagnostics()}"
                )
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                raise ProtocolError(f"endpoint sent a non-JSON line: {_clip(line)!r}")
            if not isinstance(record, dict):
                raise ProtocolError(f"endpoint sent a non-object line: {_clip(line)!r}")
            if "error" in record:
                raise ProtocolError(
                    f"endpoint reported an error: {_clip(str(record['error']))!r}"
                )
            response_id = record.get("id")
            if not isinstance(response_id, int) or response_id not in pending:
                raise ProtocolError(
                    f"endpoint answered unknown or repeated id: {_clip(line)!r}"
                )
            score = record.get("score")
            if not isinstance(score, (int, float)) or isinstance(score, bool):
                raise ProtocolError(f"endpoint sent a non-numeric score: {_clip(line)!r}")
            score = float(score)
            if not math.isfinite(score):
                raise ValidationError(
                    f"endpoint returned a non-finite score for id {response_id}"
                )
            scores[response_id] = score
            pending.remove(response_id)
        return [ScoreResponse(id=request.id, score=scores[request.id]) for request in chunk]

    def close(self) -> int:
        """Signal shutdown by closing the request stream; reap the child."""
        if self._closed:
            return self._proc.returncode if self._proc.returncode is not None else 0
        self._closed = True
        try:
            self._proc.stdin.close()
        except OSError:
            pass
        try:
            self._proc.wait(timeout=10)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait()
        return self._proc.returncode

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


def stub_capabilities(
    mode: str, max_batch: int = DEFAULT_MAX_BATCH, out_of_order: bool = False
) -> ScorerCapabilities:
    if mode not in STUB_MODES:
        raise ConfigError(f"unknown stub mode {mode!r}; choose from {STUB_MODES}")
    return ScorerCapabilities(
        name=f"stub-{mode}",
        version="1",
        needs_src=False,
        needs_ref=mode != "constant",
        max_batch=max_batch,
        out_of_order=out_of_order,
    )


def stub_score(mode: str, request: ScoreRequest, constant: float = 0.5) -> float:
    """The stub's scoring rules; pure so tests can call it directly."""
    if mode == "constant":
        return constant
    if mode == "overlap":
        return metrics.chrf_sentence(request.mt, request.ref) / 100.0
    if mode == "length-penalty":
        if not request.ref:
            return 0.0
        return math.exp(-abs(len(request.mt) - len(request.ref)) / len(request.ref))
    raise ConfigError(f"unknown stub mode {mode!r}")


class InProcessStub:
    """A stub endpoint without the subprocess; same surface as the client."""

    def __init__(self, mode: str = "overlap", constant: float = 0.5,
                 max_batch: int = DEFAULT_MAX_BATCH):
        self.capabilities = stub_capabilities(mode, max_batch)
        self._mode = mode
        self._constant = constant

    def score_batch(self, requests) -> list[ScoreResponse]:
        responses = []
        for request in requests:
            if self.capabilities.needs_ref and request.ref is None:
                raise ValidationError(f"request {request.id} has no ref")
            responses.append(
                ScoreResponse(
                    id=request.id,
                    score=stub_score(self._mode, request, self._constant),
                )
            )
        return responses

    def close(self) -> int:
        return 0


def serve_stub(
    mode: str = "overlap",
    constant: float = 0.5,
    max_batch: int = DEFAULT_MAX_BATCH,
    stdin=None,
    stdout=None,
) -> int:
    """Run the endpoint side of the protocol until the input stream ends.

    Malformed request lines get an error response and the loop carries
    on; only the end of input stops the endpoint.
    """
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    caps = stub_capabilities(mode, max_batch)
    hello = {
        "hello": {
            "name": caps.name,
            "version": caps.version,
            "needs_src": caps.needs_src,
            "needs_ref": caps.needs_ref,
            "max_batch": caps.max_batch,
            "out_of_order": caps.out_of_order,
        }
    }
    stdout.write(json.dumps(hello) + "\n")
    stdout.flush()
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
            request = ScoreRequest(
                id=int(record["id"]),
                mt=record["mt"],
                src=record.get("src"),
                ref=record.get("ref"),
            )
            if not isinstance(request.mt, str):
                raise ValueError("mt must be a string")
            if caps.needs_ref and not isinstance(request.ref, str):
                raise ValueError("ref must be a string")
            response = {"id": request.id, "score": stub_score(mode, request, constant)}
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            response = {"id": -1, "error": f"bad request line: {exc}"}
        stdout.write(json.dumps(response, ensure_ascii=False) + "\n")
        stdout.flush()
    return 0
