"""The self-improvement loop: translate, rerank, retrain, repeat.

Model training and candidate generation stay outside this package; the
loop drives them as subprocess hooks with a fixed flag contract.  The
translator hook answers `--model --input --n --out` by writing ranked
candidates as JSONL; the trainer hook answers `--train-src --train-tgt
--init-model --out-dir` by training and writing a checkpoints.tsv of
`checkpoint_ref<TAB>metric<TAB>value` rows for every checkpoint it
evaluated.  Each iteration leaves an immutable directory behind, and
the loop can resume from its persisted state after an interruption.
"""

import json
import os
import random
import shlex
import shutil
import string
import subprocess
from dataclasses import asdict, dataclass, field

from . import metrics
from .corpus import (
    CandidateSet,
    Corpus,
    SegmentPair,
    ensure_dir,
    load_candidate_sets,
    load_parallel_corpus,
    write_parallel_corpus,
)
from .errors import (
    AlignmentError,
    ConfigError,
    FormatError,
    HookError,
    ValidationError,
)
from .mbr import make_utility, mbr_decode_corpus

STATE_FILENAME = "state.json"
CHECKPOINTS_FILENAME = "checkpoints.tsv"


@dataclass
class LoopConfig:
    translator_cmd: str
    trainer_cmd: str
    train_source: str
    baseline_model: str
    validation_source: str | None = None
    validation_target: str | None = None
    candidates_per_segment: int = 50
    top_k: int = 50
    utility: str = "chrf"
    include_self: bool = True
    monitored_metrics: tuple[str, ...] = ("bleu",)
    selection_metric: str = "chrf"
    max_iterations: int = 3
    seed: int = 1
    threads: int = 1
    baseline_metrics: dict[str, float] | None = None

    def __post_init__(self):
        if self.candidates_per_segment < 1:
            raise ConfigError(
                f"candidates_per_segment must be positive, "
                f"got {self.candidates_per_segment}"
            )
        if self.top_k < 1:
            raise ConfigError(f"top_k must be positive, got {self.top_k}")
        if self.max_iterations < 1:
            raise ConfigError(
                f"max_iterations must be positive, got {self.max_iterations}"
            )
        if not self.monitored_metrics:
            raise ConfigError("at least one monitored metric is required")
        # The checkpoint-selection metric is deliberately not watched for
        # regressions; stopping listens to the other metrics only.
        if self.selection_metric in self.monitored_metrics:
            raise ConfigError(
                f"selection metric {self.selection_metric!r} cannot also be "
                f"monitored for stopping"
            )

    @property
    def tracked_metrics(self) -> tuple[str, ...]:
        return (self.selection_metric,) + tuple(self.monitored_metrics)


_PATH_KEYS = ("train_source", "validation_source", "validation_target")
_BOOL_KEYS = ("include_self",)
_INT_KEYS = (
    "candidates_per_segment",
    "top_k",
    "max_iterations",
    "seed",
    "threads",
)


def load_loop_config(path: str) -> LoopConfig:
    """Parse a flat key=value config file.

    Relative paths are taken relative to the config file's directory.
    Baseline scores, when known up front, are given as
    `baseline_metric.<name> = <value>` lines.
    """
    base_dir = os.path.dirname(os.path.abspath(path))
    values: dict = {}
    baseline: dict[str, float] = {}
    try:
        with open(path, encoding="utf-8") as handle:
            lines = handle.readlines()
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: not valid UTF-8") from exc
    for number, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if "=" not in text:
            raise FormatError(f"{path}: line {number} is not a key=value pair")
        key, _, raw = text.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key.startswith("baseline_metric."):
            try:
                baseline[key.split(".", 1)[1]] = float(raw)
            except ValueError:
                raise FormatError(f"{path}: line {number} has a non-numeric value")
            continue
        if key not in LoopConfig.__dataclass_fields__ or key == "baseline_metrics":
            raise ConfigError(f"{path}: line {number} sets unknown key {key!r}")
        if key in _INT_KEYS:
            try:
                values[key] = int(raw)
            except ValueError:
                raise FormatError(f"{path}: line {number} needs an integer")
        elif key in _BOOL_KEYS:
            lowered = raw.lower()
            if lowered not in ("true", "false"):
                raise FormatError(f"{path}: line {number} needs true or false")
            values[key] = lowered == "true"
        elif key == "monitored_metrics":
            values[key] = tuple(
                name.strip() for name in raw.split(",") if name.strip()
            )
        else:
            values[key] = raw
        if key in _PATH_KEYS and not os.path.isabs(values[key]):
            values[key] = os.path.join(base_dir, values[key])
    if baseline:
        values["baseline_metrics"] = baseline
    missing = [
        key
        for key in ("translator_cmd", "trainer_cmd", "train_source", "baseline_model")
        if key not in values
    ]
    if missing:
        raise ConfigError(f"{path}: missing required keys {missing}")
    return LoopConfig(**values)


# ---------------------------------------------------------------------------
# Mock candidate generation

_NOISE_ALPHABET = string.ascii_lowercase + "     "


def _noise_text(text: str, rate: float, rng: random.Random) -> str:
    out = []
    for char in text:
        roll = rng.random()
        if roll >= rate:
            out.append(char)
            continue
        op = rng.random()
        if op < 1 / 3:
            out.append(rng.choice(_NOISE_ALPHABET))
        elif op < 2 / 3:
            continue
        else:
            out.append(char)
            out.append(char)
    return "".join(out)


def mock_translate(
    corpus: Corpus, n: int, noise_rate: float, seed: int = 1
) -> list[CandidateSet]:
    """Fabricate candidate sets by corrupting the reference targets.

    Rank 0 gets the lowest corruption rate and later ranks get
    progressively more, mimicking a generator's falling precision down
    the beam.  Every (seed, segment, rank) triple draws from its own
    generator, so output is order-independent and reproducible.
    """
    if n < 1:
        raise ValidationError(f"candidate count must be positive, got {n}")
    if not 0.0 <= noise_rate <= 1.0:
        raise ValidationError(f"noise rate must lie in [0, 1], got {noise_rate}")
    if not corpus.has_targets:
        raise ValidationError("mock translation needs target segments to corrupt")
    sets = []
    for pair in corpus:
        candidates = []
        for rank in range(n):
            rng = random.Random(f"{seed}:{pair.id}:{rank}")
            if n > 1:
                rate = noise_rate * (0.5 + 0.5 * rank / (n - 1))
            else:
                rate = noise_rate
            candidates.append(_noise_text(pair.target, rate, rng))
        sets.append(CandidateSet(segment_id=pair.id, candidates=candidates))
    return sets


# ---------------------------------------------------------------------------
# Synthetic dataset construction


def build_synthetic_dataset(
    corpus: Corpus,
    sets: list[CandidateSet],
    utility_kind: str = "chrf",
    include_self: bool = True,
    top_k: int | None = None,
    threads: int = 1,
    scorer=None,
) -> Corpus:
    """Replace each target with the MBR selection from its candidates."""
    covered = {cand_set.segment_id for cand_set in sets}
    expected = set(range(len(corpus)))
    missing = sorted(expected - covered)
    if missing:
        raise AlignmentError(
            f"candidate sets missing for segments {missing[:10]}"
            + ("..." if len(missing) > 10 else "")
        )
    unknown = sorted(covered - expected)
    if unknown:
        raise AlignmentError(
            f"candidate sets for unknown segments {unknown[:10]}"
            + ("..." if len(unknown) > 10 else "")
        )
    utility = make_utility(utility_kind, client=scorer)
    ordered = sorted(sets, key=lambda cand_set: cand_set.segment_id)
    results = mbr_decode_corpus(
        ordered,
        utility,
        corpus=corpus,
        include_self=include_self,
        top_k=top_k,
        threads=threads,
    )
    pairs = []
    for result in results:
        original = corpus[result.segment_id]
        pairs.append(
            SegmentPair(
                id=result.segment_id,
                source=original.source,
                target=result.selected_text,
                meta=dict(original.meta),
            )
        )
    return Corpus(pairs)


# ---------------------------------------------------------------------------
# Hook plumbing


def _run_hook(label: str, cmd_template: str, flags: list[str], context: str) -> None:
    argv = shlex.split(cmd_template) + flags
    if not argv:
        raise ConfigError(f"{label} command is empty")
    try:
        completed = subprocess.run(argv, capture_output=True, text=True)
    except OSError as exc:
        raise HookError(f"{label} hook failed to launch ({context}): {exc}")
    if completed.returncode != 0:
        tail = (completed.stderr or completed.stdout or "").strip().splitlines()[-8:]
        detail = "\n  ".join(tail)
        raise HookError(
            f"{label} hook exited {completed.returncode} ({context})"
            + (f":\n  {detail}" if detail else "")
        )


def run_translator(
    cmd_template: str, model_ref: str, input_path: str, n: int, out_path: str,
    context: str,
) -> list[CandidateSet]:
    _run_hook(
        "translator",
        cmd_template,
        ["--model", model_ref, "--input", input_path, "--n", str(n), "--out", out_path],
        context,
    )
    if not os.path.exists(out_path):
        raise HookError(
            f"translator hook wrote no candidate file at {out_path} ({context})"
        )
    try:
        return load_candidate_sets(out_path)
    except FormatError as exc:
        raise FormatError(f"{exc} ({context})") from exc


@dataclass
class CheckpointReport:
    checkpoint_ref: str
    metrics: dict[str, float]


def _parse_checkpoints(path: str, context: str) -> list[CheckpointReport]:
    if not os.path.exists(path):
        raise HookError(f"trainer hook wrote no {CHECKPOINTS_FILENAME} ({context})")
    order: list[str] = []
    grouped: dict[str, dict[str, float]] = {}
    with open(path, encoding="utf-8") as handle:
        for number, line in enumerate(handle, start=1):
            text = line.rstrip("\n")
            if not text.strip():
                continue
            fields = text.split("\t")
            if len(fields) != 3:
                raise HookError(
                    f"{path}: line {number} has {len(fields)} fields, "
                    f"expected checkpoint_ref, metric, value ({context})"
                )
            ref, metric, raw = fields
            try:
                value = float(raw)
            except ValueError:
                raise HookError(
                    f"{path}: line {number} has non-numeric value {raw!r} ({context})"
                )
            if ref not in grouped:
                grouped[ref] = {}
                order.append(ref)
            grouped[ref][metric] = value
    if not order:
        raise HookError(f"{path} lists no checkpoints ({context})")
    return [CheckpointReport(ref, grouped[ref]) for ref in order]


def run_trainer(
    cmd_template: str,
    train_src: str,
    train_tgt: str,
    init_model: str,
    out_dir: str,
    required_metrics,
    selection_metric: str,
    context: str,
) -> CheckpointReport:
    """Invoke the trainer and pick its best checkpoint.

    Every checkpoint must report every tracked metric; the checkpoint
    with the highest selection-metric value wins, first listed on ties.
    """
    _run_hook(
        "trainer",
        cmd_template,
        [
            "--train-src", train_src,
            "--train-tgt", train_tgt,
            "--init-model", init_model,
            "--out-dir", out_dir,
        ],
        context,
    )
    reports = _parse_checkpoints(
        os.path.join(out_dir, CHECKPOINTS_FILENAME), context
    )
    for report in reports:
        missing = [name for name in required_metrics if name not in report.metrics]
        if missing:
            raise HookError(
                f"trainer checkpoint {report.checkpoint_ref} reported no "
                f"value for {missing} ({context})"
            )
    best = reports[0]
    for report in reports[1:]:
        if report.metrics[selection_metric] > best.metrics[selection_metric]:
            best = report
    return best


# ---------------------------------------------------------------------------
# Loop state


@dataclass
class IterationRecord:
    iteration: int
    model_ref: str
    dataset_ref: str | None
    metrics: dict[str, float]


@dataclass
class IterationState:
    """Everything needed to continue the loop after iteration N.

    records[i] describes iteration i; record 0 is the baseline model
    with no synthetic dataset.  history mirrors the records per metric
    so the stopping rule can compare adjacent iterations directly.
    """

    iteration: int
    records: list[IterationRecord]
    history: dict[str, list[float]]
    stopped: bool = False
    stop_reason: str | None = None
    final_model: str | None = None

    def validate(self):
        if len(self.records) != self.iteration + 1:
            raise ValidationError(
                f"state says iteration {self.iteration} but holds "
                f"{len(self.records)} records"
            )
        for name, values in self.history.items():
            if len(values) != self.iteration + 1:
                raise ValidationError(
                    f"history for {name} has {len(values)} entries at "
                    f"iteration {self.iteration}"
                )

    def save(self, path: str) -> None:
        self.validate()
        payload = asdict(self)
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            json.dump(payload, handle, indent=1, sort_keys=True)
            handle.write("\n")

    @classmethod
    def load(cls, path: str) -> "IterationState":
        try:
            with open(path, encoding="utf-8") as handle:
                payload = json.load(handle)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: not valid JSON") from exc
        try:
            state = cls(
                iteration=payload["iteration"],
                records=[IterationRecord(**record) for record in payload["records"]],
                history={
                    name: list(values)
                    for name, values in payload["history"].items()
                },
                stopped=payload.get("stopped", False),
                stop_reason=payload.get("stop_reason"),
                final_model=payload.get("final_model"),
            )
        except (KeyError, TypeError) as exc:
            raise FormatError(f"{path}: malformed loop state: {exc}")
        state.validate()
        return state


@dataclass
class StopDecision:
    stop: bool
    reason: str | None = None
    final_iteration: int | None = None
    final_model: str | None = None


def check_stopping(state: IterationState, config: LoopConfig) -> StopDecision:
    """Stop on the first regression of any monitored metric, keeping the
    previous iteration's model; otherwise stop at the iteration cap."""
    if state.iteration >= 1:
        for name in config.monitored_metrics:
            values = state.history[name]
            if values[-1] < values[-2]:
                keep = state.iteration - 1
                return StopDecision(
                    stop=True,
                    reason=(
                        f"{name} fell from {values[-2]:g} to {values[-1]:g} "
                        f"at iteration {state.iteration}"
                    ),
                    final_iteration=keep,
                    final_model=state.records[keep].model_ref,
                )
    if state.iteration >= config.max_iterations:
        return StopDecision(
            stop=True,
            reason=f"reached max_iterations={config.max_iterations}",
            final_iteration=state.iteration,
            final_model=state.records[-1].model_ref,
        )
    return StopDecision(stop=False)


def _iter_dirname(iteration: int) -> str:
    return f"iter_{iteration:03d}"


def _bootstrap_state(config: LoopConfig, work_dir: str) -> IterationState:
    """Record the baseline model as iteration 0."""
    if config.baseline_metrics is not None:
        missing = [
            name
            for name in config.tracked_metrics
            if name not in config.baseline_metrics
        ]
        if missing:
            raise ConfigError(
                f"baseline metric values missing for {missing}"
            )
        values = {
            name: float(config.baseline_metrics[name])
            for name in config.tracked_metrics
        }
    else:
        if not config.validation_source or not config.validation_target:
            raise ConfigError(
                "no baseline metric values and no validation corpus to "
                "measure them on; provide baseline_metric.<name> entries "
                "or validation_source and validation_target"
            )
        alien = [
            name
            for name in config.tracked_metrics
            if name not in metrics.IN_PROCESS_METRICS
        ]
        if alien:
            raise ConfigError(
                f"cannot self-measure baseline for {alien}; provide "
                f"baseline_metric.<name> entries"
            )
        baseline_dir = ensure_dir(os.path.join(work_dir, "baseline"))
        out_path = os.path.join(baseline_dir, "validation_candidates.jsonl")
        sets = run_translator(
            config.translator_cmd,
            config.baseline_model,
            config.validation_source,
            1,
            out_path,
            context="baseline validation decode",
        )
        validation = load_parallel_corpus(
            config.validation_source, config.validation_target
        )
        if len(sets) != len(validation):
            raise AlignmentError(
                f"baseline decode produced {len(sets)} sets for "
                f"{len(validation)} validation segments"
            )
        hypotheses = [cand_set.candidates[0] for cand_set in sets]
        references = [pair.target for pair in validation]
        values = {
            name: metrics.IN_PROCESS_METRICS[name](hypotheses, references).corpus_value
            for name in config.tracked_metrics
        }
    record = IterationRecord(
        iteration=0,
        model_ref=config.baseline_model,
        dataset_ref=None,
        metrics=values,
    )
    return IterationState(
        iteration=0,
        records=[record],
        history={name: [values[name]] for name in config.tracked_metrics},
    )


def run_iteration(
    state: IterationState, config: LoopConfig, work_dir: str
) -> IterationState:
    """One translate, rerank, retrain cycle; leaves iter_NNN behind."""
    iteration = state.iteration + 1
    iter_dir = os.path.join(work_dir, _iter_dirname(iteration))
    if os.path.exists(iter_dir):
        # stale leftovers of an interrupted attempt; completed
        # iterations are protected by the state file, not by the dir
        shutil.rmtree(iter_dir)
    ensure_dir(iter_dir)
    context = f"iteration {iteration}"
    previous_model = state.records[-1].model_ref

    candidates_path = os.path.join(iter_dir, "candidates.jsonl")
    sets = run_translator(
        config.translator_cmd,
        previous_model,
        config.train_source,
        config.candidates_per_segment,
        candidates_path,
        context,
    )
    train_corpus = load_parallel_corpus(config.train_source)
    synthetic = build_synthetic_dataset(
        train_corpus,
        sets,
        utility_kind=config.utility,
        include_self=config.include_self,
        top_k=config.top_k,
        threads=config.threads,
    )
    synthetic_src = os.path.join(iter_dir, "synthetic.src")
    synthetic_tgt = os.path.join(iter_dir, "synthetic.tgt")
    write_parallel_corpus(synthetic, synthetic_src, synthetic_tgt)

    train_dir = os.path.join(iter_dir, "train")
    best = run_trainer(
        config.trainer_cmd,
        synthetic_src,
        synthetic_tgt,
        previous_model,
        train_dir,
        config.tracked_metrics,
        config.selection_metric,
        context,
    )
    record = IterationRecord(
        iteration=iteration,
        model_ref=best.checkpoint_ref,
        dataset_ref=os.path.relpath(iter_dir, work_dir),
        metrics={name: best.metrics[name] for name in config.tracked_metrics},
    )
    new_state = IterationState(
        iteration=iteration,
        records=state.records + [record],
        history={
            name: state.history[name] + [record.metrics[name]]
            for name in config.tracked_metrics
        },
    )
    new_state.save(os.path.join(iter_dir, STATE_FILENAME))
    return new_state


def run_loop(config: LoopConfig, work_dir: str) -> IterationState:
    """Drive iterations until the stopping rule fires.

    An existing state file in work_dir resumes the loop exactly where
    it left off; completed iteration directories are never recomputed.
    """
    ensure_dir(work_dir)
    state_path = os.path.join(work_dir, STATE_FILENAME)
    if os.path.exists(state_path):
        state = IterationState.load(state_path)
        unknown = [
            name for name in config.tracked_metrics if name not in state.history
        ]
        if unknown:
            raise ConfigError(
                f"resumed state has no history for metrics {unknown}"
            )
    else:
        state = _bootstrap_state(config, work_dir)
        state.save(state_path)
    if state.stopped:
        return state
    while True:
        decision = check_stopping(state, config)
        if decision.stop:
            state.stopped = True
            state.stop_reason = decision.reason
            state.final_model = decision.final_model
            state.save(state_path)
            return state
        state = run_iteration(state, config, work_dir)
        state.save(state_path)
