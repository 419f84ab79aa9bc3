"""Corpus containers and the line and JSONL formats they travel in.

A parallel corpus is a pair of plain UTF-8 text files, one segment per
line, aligned by line number.  Candidate translations live in a JSONL
sidecar keyed by segment id.  Auxiliary per-segment scores (language id
probabilities, cleanliness scores) use a tab-separated sidecar.
"""

import codecs
import json
import math
import os
from dataclasses import dataclass, field

from .errors import AlignmentError, EncodingError, FormatError, ValidationError

_LINE_BREAKS = ("\n", "\r")


@dataclass
class SegmentPair:
    """One aligned source/target segment.

    meta holds free-form string tags (provenance, original ids).  The
    texts must be single lines; the plain-text formats cannot escape
    embedded line breaks.
    """

    id: int
    source: str
    target: str | None = None
    meta: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.id < 0:
            raise ValidationError(f"segment id must be non-negative, got {self.id}")
        for name, text in (("source", self.source), ("target", self.target)):
            if text is None:
                continue
            if any(ch in text for ch in _LINE_BREAKS):
                raise ValidationError(
                    f"segment {self.id}: {name} text contains a line break"
                )


@dataclass
class CandidateSet:
    """Ranked candidate translations for one segment.

    Rank 0 is the generator's first choice.  gen_scores, when present,
    are the generator's own scores aligned with candidates.
    """

    segment_id: int
    candidates: list[str]
    gen_scores: list[float] | None = None

    def __post_init__(self):
        if self.segment_id < 0:
            raise ValidationError(
                f"candidate set segment id must be non-negative, got {self.segment_id}"
            )
        if not self.candidates:
            raise ValidationError(
                f"candidate set for segment {self.segment_id} is empty"
            )
        if self.gen_scores is not None:
            if len(self.gen_scores) != len(self.candidates):
                raise ValidationError(
                    f"segment {self.segment_id}: {len(self.gen_scores)} scores for "
                    f"{len(self.candidates)} candidates"
                )
            for rank, score in enumerate(self.gen_scores):
                if not math.isfinite(score):
                    raise ValidationError(
                        f"segment {self.segment_id} rank {rank}: non-finite score"
                    )

    def __len__(self):
        return len(self.candidates)


@dataclass
class Corpus:
    """An ordered list of segment pairs with ids 0..n-1."""

    pairs: list[SegmentPair] = field(default_factory=list)

    def __post_init__(self):
        for position, pair in enumerate(self.pairs):
            if pair.id != position:
                raise ValidationError(
                    f"corpus ids must be 0..n-1 in order; position {position} "
                    f"holds id {pair.id}"
                )

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __getitem__(self, segment_id: int) -> SegmentPair:
        return self.pairs[segment_id]

    @property
    def has_targets(self) -> bool:
        return all(p.target is not None for p in self.pairs)


def _read_lines(path: str) -> list[str]:
    """Decode a text file line by line so errors can name the line."""
    with open(path, "rb") as handle:
        blob = handle.read()
    if blob.startswith(codecs.BOM_UTF8):
        blob = blob[len(codecs.BOM_UTF8):]
    if not blob:
        return []
    raw_lines = blob.split(b"\n")
    # A trailing newline produces one phantom empty element, not a segment.
    if raw_lines[-1] == b"":
        raw_lines.pop()
    lines = []
    for number, raw in enumerate(raw_lines, start=1):
        if raw.endswith(b"\r"):
            raw = raw[:-1]
        try:
            lines.append(raw.decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise EncodingError(f"{path}: line {number} is not valid UTF-8") from exc
    return lines


def _write_lines(lines: list[str], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for line in lines:
            handle.write(line)
            handle.write("\n")


def load_parallel_corpus(source_path: str, target_path: str | None = None) -> Corpus:
    """Load aligned line files into a corpus with ids assigned by position."""
    sources = _read_lines(source_path)
    targets = None
    if target_path is not None:
        targets = _read_lines(target_path)
        if len(targets) != len(sources):
            raise AlignmentError(
                f"{source_path} has {len(sources)} lines but {target_path} "
                f"has {len(targets)}"
            )
    pairs = []
    for i, source in enumerate(sources):
        target = targets[i] if targets is not None else None
        pairs.append(SegmentPair(id=i, source=source, target=target))
    return Corpus(pairs)


def write_parallel_corpus(
    corpus: Corpus, source_path: str, target_path: str | None = None
) -> None:
    """Write a corpus back to line files; inverse of load_parallel_corpus."""
    _write_lines([p.source for p in corpus], source_path)
    if target_path is not None:
        missing = [p.id for p in corpus if p.target is None]
        if missing:
            raise ValidationError(
                f"cannot write target file: segments {missing[:5]} have no target"
            )
        _write_lines([p.target for p in corpus], target_path)


def load_candidate_sets(path: str) -> list[CandidateSet]:
    """Load candidate sets from JSONL.

    Records for one segment must be contiguous and their ranks must
    form exactly 0..n-1; segment ids must strictly increase across
    blocks.  Both conditions make truncated or merged files detectable.
    """
    sets: list[CandidateSet] = []
    block: dict[int, tuple[str, float | None]] = {}
    block_id = -1
    seen_ids: set[int] = set()

    def flush():
        if block_id < 0:
            return
        ranks = sorted(block)
        if ranks != list(range(len(block))):
            raise FormatError(
                f"{path}: segment {block_id} ranks are {ranks}, expected "
                f"0..{len(block) - 1}"
            )
        texts = [block[r][0] for r in ranks]
        scores = [block[r][1] for r in ranks]
        with_score = sum(s is not None for s in scores)
        if 0 < with_score < len(scores):
            raise FormatError(
                f"{path}: segment {block_id} has scores on only some ranks"
            )
        sets.append(
            CandidateSet(
                segment_id=block_id,
                candidates=texts,
                gen_scores=list(scores) if with_score else None,
            )
        )

    with open(path, "rb") as handle:
        for number, raw in enumerate(handle, start=1):
            raw = raw.rstrip(b"\r\n")
            if not raw:
                continue
            try:
                record = json.loads(raw.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise FormatError(f"{path}: line {number} is not valid JSON") from exc
            if not isinstance(record, dict):
                raise FormatError(f"{path}: line {number} is not a JSON object")
            try:
                segment_id = record["segment_id"]
                rank = record["rank"]
                text = record["text"]
            except KeyError as exc:
                raise FormatError(
                    f"{path}: line {number} is missing field {exc.args[0]!r}"
                ) from exc
            if not isinstance(segment_id, int) or not isinstance(rank, int):
                raise FormatError(
                    f"{path}: line {number} has non-integer segment_id or rank"
                )
            if not isinstance(text, str):
                raise FormatError(f"{path}: line {number} has non-string text")
            score = record.get("score")
            if score is not None and not isinstance(score, (int, float)):
                raise FormatError(f"{path}: line {number} has non-numeric score")
            if segment_id != block_id:
                if segment_id in seen_ids:
                    raise FormatError(
                        f"{path}: line {number} reopens segment {segment_id}; "
                        f"records for one segment must be contiguous"
                    )
                if segment_id < block_id:
                    raise FormatError(
                        f"{path}: line {number} goes back from segment {block_id} "
                        f"to {segment_id}; segment ids must increase"
                    )
                flush()
                block = {}
                block_id = segment_id
                seen_ids.add(segment_id)
            if rank in block:
                raise FormatError(
                    f"{path}: line {number} repeats rank {rank} of segment "
                    f"{segment_id}"
                )
            block[rank] = (text, float(score) if score is not None else None)
    flush()
    return sets


def write_candidate_sets(sets: list[CandidateSet], path: str) -> None:
    """Write candidate sets as JSONL; inverse of load_candidate_sets."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for cand_set in sets:
            for rank, text in enumerate(cand_set.candidates):
                record: dict = {
                    "segment_id": cand_set.segment_id,
                    "rank": rank,
                    "text": text,
                }
                if cand_set.gen_scores is not None:
                    record["score"] = cand_set.gen_scores[rank]
                handle.write(json.dumps(record, ensure_ascii=False))
                handle.write("\n")


def load_score_sidecar(path: str) -> dict[int, dict[str, float]]:
    """Load per-segment auxiliary scores.

    Format: one `segment_id<TAB>name<TAB>value` triple per line.
    Returns {segment_id: {name: value}}.
    """
    scores: dict[int, dict[str, float]] = {}
    for number, line in enumerate(_read_lines(path), start=1):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise FormatError(
                f"{path}: line {number} has {len(fields)} fields, expected 3"
            )
        try:
            segment_id = int(fields[0])
            value = float(fields[2])
        except ValueError as exc:
            raise FormatError(f"{path}: line {number} does not parse") from exc
        if segment_id < 0:
            raise FormatError(f"{path}: line {number} has negative segment id")
        if not math.isfinite(value):
            raise FormatError(f"{path}: line {number} has non-finite value")
        scores.setdefault(segment_id, {})[fields[1]] = value
    return scores


def ensure_dir(path: str) -> str:
    """Create a directory if needed and return it."""
    os.makedirs(path, exist_ok=True)
    return path
