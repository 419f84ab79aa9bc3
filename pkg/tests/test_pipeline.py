"""The translate-rerank-retrain loop and its hook plumbing."""

import dataclasses
import hashlib
import json
import os
import random
import shlex
import sys

import pytest

from mbrkit import metrics
from mbrkit.corpus import CandidateSet, Corpus, SegmentPair, load_parallel_corpus
from mbrkit.errors import (
    AlignmentError,
    ConfigError,
    FormatError,
    HookError,
    ValidationError,
)
from mbrkit.pipeline import (
    IterationRecord,
    IterationState,
    LoopConfig,
    build_synthetic_dataset,
    check_stopping,
    load_loop_config,
    mock_translate,
    run_loop,
    run_trainer,
    run_translator,
)
from oracles import chrf_reference, mbr_select_reference
from util import corpus_from_pairs, write_lines, write_text

HOOKS = os.path.join(os.path.dirname(__file__), "hooks")
TRANSLATOR = f"{shlex.quote(sys.executable)} {shlex.quote(os.path.join(HOOKS, 'stub_translator.py'))}"
TRAINER = f"{shlex.quote(sys.executable)} {shlex.quote(os.path.join(HOOKS, 'stub_trainer.py'))}"


def trainer_cmd(script_path):
    return f"{TRAINER} --script {shlex.quote(str(script_path))}"


def write_script(tmp_path, payload, name="trainer_script.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def dir_digest(root):
    """Stable content hash of every file under root."""
    digest = hashlib.sha256()
    for dirpath, dirnames, filenames in sorted(os.walk(root)):
        dirnames.sort()
        for name in sorted(filenames):
            path = os.path.join(dirpath, name)
            digest.update(os.path.relpath(path, root).encode())
            with open(path, "rb") as handle:
                digest.update(handle.read())
    return digest.hexdigest()


def base_config(tmp_path, script, **overrides):
    train_src = tmp_path / "train.src"
    if not train_src.exists():
        write_lines(train_src, ["alpha bravo charlie", "delta echo", "foxtrot golf hotel", "india"])
    settings = dict(
        translator_cmd=TRANSLATOR,
        trainer_cmd=trainer_cmd(script),
        train_source=str(train_src),
        baseline_model="base-v1",
        candidates_per_segment=3,
        top_k=3,
        max_iterations=3,
        baseline_metrics={"chrf": 51.0, "bleu": 40.0},
    )
    settings.update(overrides)
    return LoopConfig(**settings)


# ---------------------------------------------------------------------------
# configuration


def test_config_rejects_bad_counts():
    kwargs = dict(
        translator_cmd="t", trainer_cmd="r", train_source="s", baseline_model="m"
    )
    with pytest.raises(ConfigError):
        LoopConfig(candidates_per_segment=0, **kwargs)
    with pytest.raises(ConfigError):
        LoopConfig(top_k=0, **kwargs)
    with pytest.raises(ConfigError):
        LoopConfig(max_iterations=0, **kwargs)


def test_config_separates_selection_from_monitoring():
    kwargs = dict(
        translator_cmd="t", trainer_cmd="r", train_source="s", baseline_model="m"
    )
    with pytest.raises(ConfigError):
        LoopConfig(selection_metric="chrf", monitored_metrics=("chrf", "bleu"), **kwargs)
    with pytest.raises(ConfigError):
        LoopConfig(monitored_metrics=(), **kwargs)
    config = LoopConfig(selection_metric="chrf", monitored_metrics=("bleu",), **kwargs)
    assert config.tracked_metrics == ("chrf", "bleu")


def test_load_config_full_file(tmp_path):
    (tmp_path / "data").mkdir()
    write_lines(tmp_path / "data" / "train.src", ["a"])
    config_text = """
    # self-improvement run
    translator_cmd = python3 translate.py
    trainer_cmd = python3 train.py --budget 2

    train_source = data/train.src
    baseline_model = models/base
    candidates_per_segment = 12
    top_k = 5
    utility = chrf
    include_self = true
    monitored_metrics = bleu, wer
    selection_metric = chrf
    max_iterations = 4
    seed = 9
    threads = 2
    baseline_metric.chrf = 51.5
    baseline_metric.bleu = 40.25
    baseline_metric.wer = 30.0
    """
    path = tmp_path / "loop.cfg"
    write_text(path, config_text.replace("    ", ""))
    config = load_loop_config(str(path))
    assert config.translator_cmd == "python3 translate.py"
    assert config.trainer_cmd == "python3 train.py --budget 2"
    assert config.train_source == str(tmp_path / "data" / "train.src")
    assert config.baseline_model == "models/base"
    assert config.candidates_per_segment == 12
    assert config.top_k == 5
    assert config.monitored_metrics == ("bleu", "wer")
    assert config.max_iterations == 4
    assert config.threads == 2
    assert config.include_self is True
    assert config.baseline_metrics == {"chrf": 51.5, "bleu": 40.25, "wer": 30.0}


def test_load_config_keeps_absolute_paths(tmp_path):
    path = tmp_path / "loop.cfg"
    write_text(
        path,
        "translator_cmd = t\ntrainer_cmd = r\n"
        "train_source = /abs/train.src\nbaseline_model = m\n",
    )
    assert load_loop_config(str(path)).train_source == "/abs/train.src"


@pytest.mark.parametrize(
    "line,error",
    [
        ("just some words", FormatError),
        ("unknown_key = 3", ConfigError),
        ("max_iterations = soon", FormatError),
        ("include_self = yes", FormatError),
        ("baseline_metric.chrf = high", FormatError),
    ],
)
def test_load_config_bad_lines(tmp_path, line, error):
    path = tmp_path / "loop.cfg"
    write_text(
        path,
        "translator_cmd = t\ntrainer_cmd = r\n"
        f"train_source = s\nbaseline_model = m\n{line}\n",
    )
    with pytest.raises(error):
        load_loop_config(str(path))


def test_load_config_missing_required_keys(tmp_path):
    path = tmp_path / "loop.cfg"
    write_text(path, "translator_cmd = t\n")
    with pytest.raises(ConfigError) as err:
        load_loop_config(str(path))
    assert "trainer_cmd" in str(err.value)
    assert "baseline_model" in str(err.value)


# ---------------------------------------------------------------------------
# mock candidate generation


def _target_corpus():
    return corpus_from_pairs(
        [
            ("src one", "the first target sentence"),
            ("src two", "another reference to corrupt"),
            ("src three", "a third line of text here"),
        ]
    )


def test_mock_translate_zero_noise_echoes_targets():
    corpus = _target_corpus()
    sets = mock_translate(corpus, n=4, noise_rate=0.0, seed=5)
    for pair, cand_set in zip(corpus, sets):
        assert cand_set.candidates == [pair.target] * 4


def test_mock_translate_same_seed_identical():
    corpus = _target_corpus()
    first = mock_translate(corpus, n=6, noise_rate=0.3, seed=11)
    second = mock_translate(corpus, n=6, noise_rate=0.3, seed=11)
    assert [s.candidates for s in first] == [s.candidates for s in second]


def test_mock_translate_different_seeds_differ():
    corpus = _target_corpus()
    first = mock_translate(corpus, n=6, noise_rate=0.3, seed=11)
    second = mock_translate(corpus, n=6, noise_rate=0.3, seed=12)
    assert [s.candidates for s in first] != [s.candidates for s in second]


def test_mock_translate_candidate_count():
    sets = mock_translate(_target_corpus(), n=50, noise_rate=0.15, seed=1)
    assert all(len(cand_set.candidates) == 50 for cand_set in sets)


def test_mock_translate_rank_zero_least_noisy():
    # averaged over segments and seeds, rank 0 stays closest to the target
    corpus = _target_corpus()
    first_edits, last_edits = 0, 0
    for seed in range(20):
        sets = mock_translate(corpus, n=8, noise_rate=0.4, seed=seed)
        for pair, cand_set in zip(corpus, sets):
            first_edits += metrics.levenshtein(pair.target, cand_set.candidates[0])
            last_edits += metrics.levenshtein(pair.target, cand_set.candidates[-1])
    assert first_edits < last_edits


def test_mock_translate_argument_checks():
    corpus = _target_corpus()
    with pytest.raises(ValidationError):
        mock_translate(corpus, n=0, noise_rate=0.1)
    with pytest.raises(ValidationError):
        mock_translate(corpus, n=3, noise_rate=1.5)
    sourceless = Corpus([SegmentPair(id=0, source="only source")])
    with pytest.raises(ValidationError):
        mock_translate(sourceless, n=3, noise_rate=0.1)


# ---------------------------------------------------------------------------
# synthetic dataset construction


def test_single_candidate_sets_pass_straight_through():
    corpus = _target_corpus()
    sets = [
        CandidateSet(segment_id=i, candidates=[f"forward translation {i}"])
        for i in range(len(corpus))
    ]
    synthetic = build_synthetic_dataset(corpus, sets)
    assert [pair.target for pair in synthetic] == [
        "forward translation 0",
        "forward translation 1",
        "forward translation 2",
    ]
    assert [pair.source for pair in synthetic] == [pair.source for pair in corpus]


def test_reference_equal_candidate_wins_when_it_dominates():
    clean = "the quick brown fox jumps over the lazy dog"

    def corrupt(seed, rate=0.35):
        rng = random.Random(seed)
        out = []
        for char in clean:
            roll = rng.random()
            if roll < rate / 2:
                continue
            if roll < rate:
                out.append(rng.choice("zxqvw"))
                continue
            out.append(char)
        return "".join(out)

    candidates = [corrupt(s) for s in (101, 202, 303)] + [clean] + [
        corrupt(s) for s in (404, 505)
    ]
    # construction sanity against the brute-force expectation first
    winner, _ = mbr_select_reference(candidates, chrf_reference)
    assert winner == 3
    corpus = Corpus([SegmentPair(id=0, source="src", target=clean)])
    synthetic = build_synthetic_dataset(
        corpus, [CandidateSet(segment_id=0, candidates=candidates)]
    )
    assert synthetic[0].target == clean


def test_empty_corpus_gives_empty_synthetic():
    synthetic = build_synthetic_dataset(Corpus([]), [])
    assert len(synthetic) == 0


def test_coverage_gap_names_missing_segments():
    corpus = _target_corpus()
    sets = [CandidateSet(segment_id=0, candidates=["a"])]
    with pytest.raises(AlignmentError) as err:
        build_synthetic_dataset(corpus, sets)
    assert "[1, 2]" in str(err.value)


def test_unknown_segments_rejected():
    corpus = _target_corpus()
    sets = [
        CandidateSet(segment_id=i, candidates=["a"]) for i in range(3)
    ] + [CandidateSet(segment_id=9, candidates=["a"])]
    with pytest.raises(AlignmentError) as err:
        build_synthetic_dataset(corpus, sets)
    assert "9" in str(err.value)


# ---------------------------------------------------------------------------
# hooks


def test_translator_hook_round_trip(tmp_path):
    source = tmp_path / "input.src"
    write_lines(source, ["one two", "three"])
    out = tmp_path / "cands.jsonl"
    sets = run_translator(
        TRANSLATOR, "model-x", str(source), 3, str(out), context="iteration 1"
    )
    assert len(sets) == 2
    assert sets[0].candidates[0] == "one two"
    assert sets[0].candidates[1] == "one two model-x-1"


def test_translator_garbage_output_carries_iteration_context(tmp_path):
    source = tmp_path / "input.src"
    write_lines(source, ["one two"])
    out = tmp_path / "cands.jsonl"
    with pytest.raises(FormatError) as err:
        run_translator(
            TRANSLATOR + " --garbage", "m", str(source), 3, str(out),
            context="iteration 2",
        )
    assert "iteration 2" in str(err.value)


def test_translator_writing_nothing_is_hook_error(tmp_path):
    source = tmp_path / "input.src"
    write_lines(source, ["one"])
    cmd = f"{shlex.quote(sys.executable)} -c pass"
    with pytest.raises(HookError) as err:
        run_translator(cmd, "m", str(source), 1, str(tmp_path / "x.jsonl"), "iteration 1")
    assert "no candidate file" in str(err.value)


def test_hook_nonzero_exit_captures_stderr(tmp_path):
    source = tmp_path / "input.src"
    write_lines(source, ["one"])
    cmd = (
        f"{shlex.quote(sys.executable)} -c "
        "\"import sys; sys.stderr.write('gpu on fire\\n'); sys.exit(5)\""
    )
    with pytest.raises(HookError) as err:
        run_translator(cmd, "m", str(source), 1, str(tmp_path / "x.jsonl"), "iteration 4")
    message = str(err.value)
    assert "exited 5" in message
    assert "gpu on fire" in message
    assert "iteration 4" in message


def test_hook_missing_binary(tmp_path):
    with pytest.raises(HookError) as err:
        run_translator(
            "/nonexistent/translate", "m", "in", 1, str(tmp_path / "x"), "iteration 1"
        )
    assert "launch" in str(err.value)


def _trainer_checkpoints(tmp_path, script_payload, **kwargs):
    script = write_script(tmp_path, script_payload)
    out_dir = tmp_path / "iter_001" / "train"
    defaults = dict(
        required_metrics=("chrf", "bleu"),
        selection_metric="chrf",
        context="iteration 1",
    )
    defaults.update(kwargs)
    return run_trainer(
        trainer_cmd(script), "src", "tgt", "base", str(out_dir), **defaults
    )


def test_trainer_argmax_selection(tmp_path):
    best = _trainer_checkpoints(
        tmp_path,
        {
            "checkpoints": {
                "1": [
                    ["ckpt-a", {"chrf": 0.85, "bleu": 1.0}],
                    ["ckpt-b", {"chrf": 0.87, "bleu": 0.5}],
                    ["ckpt-c", {"chrf": 0.86, "bleu": 2.0}],
                ]
            }
        },
    )
    assert best.checkpoint_ref == "ckpt-b"
    assert best.metrics == {"chrf": 0.87, "bleu": 0.5}


def test_trainer_tie_keeps_first(tmp_path):
    best = _trainer_checkpoints(
        tmp_path,
        {
            "checkpoints": {
                "1": [
                    ["ckpt-a", {"chrf": 0.9, "bleu": 1.0}],
                    ["ckpt-b", {"chrf": 0.9, "bleu": 2.0}],
                ]
            }
        },
    )
    assert best.checkpoint_ref == "ckpt-a"


def test_trainer_single_checkpoint(tmp_path):
    best = _trainer_checkpoints(
        tmp_path,
        {"checkpoints": {"1": [["only", {"chrf": 0.5, "bleu": 0.5}]]}},
    )
    assert best.checkpoint_ref == "only"


def test_trainer_missing_metric_is_contract_violation(tmp_path):
    with pytest.raises(HookError) as err:
        _trainer_checkpoints(
            tmp_path,
            {"checkpoints": {"1": [["ckpt-a", {"chrf": 0.9}]]}},
        )
    assert "bleu" in str(err.value)


def test_trainer_malformed_rows(tmp_path):
    with pytest.raises(HookError) as err:
        _trainer_checkpoints(tmp_path, {"raw": {"1": "ckpt-a\t0.9\n"}})
    assert "line 1" in str(err.value)


def test_trainer_non_numeric_value(tmp_path):
    with pytest.raises(HookError):
        _trainer_checkpoints(tmp_path, {"raw": {"1": "ckpt-a\tchrf\thigh\n"}})


def test_trainer_empty_checkpoint_list(tmp_path):
    with pytest.raises(HookError) as err:
        _trainer_checkpoints(tmp_path, {"raw": {"1": "\n"}})
    assert "no checkpoints" in str(err.value)


# ---------------------------------------------------------------------------
# stopping rule


def _state_from_history(history):
    length = len(next(iter(history.values())))
    records = [
        IterationRecord(
            iteration=i,
            model_ref=f"model-{i}",
            dataset_ref=None if i == 0 else f"iter_{i:03d}",
            metrics={name: history[name][i] for name in history},
        )
        for i in range(length)
    ]
    return IterationState(iteration=length - 1, records=records, history=history)


def _stop_config(**overrides):
    settings = dict(
        translator_cmd="t",
        trainer_cmd="r",
        train_source="s",
        baseline_model="m",
        selection_metric="comet",
        monitored_metrics=("chrf",),
        max_iterations=10,
    )
    settings.update(overrides)
    return LoopConfig(**settings)


def test_stop_on_single_step_regression():
    state = _state_from_history(
        {
            "chrf": [52.0, 52.7, 52.8, 52.6],
            "comet": [80.0, 81.0, 82.0, 83.0],
        }
    )
    decision = check_stopping(state, _stop_config())
    assert decision.stop
    assert decision.final_iteration == 2
    assert decision.final_model == "model-2"
    assert "chrf" in decision.reason
    assert "52.8" in decision.reason and "52.6" in decision.reason


def test_rising_history_continues():
    state = _state_from_history(
        {"chrf": [52.0, 52.7], "comet": [80.0, 81.0]}
    )
    assert not check_stopping(state, _stop_config()).stop


def test_selection_metric_regression_is_ignored():
    state = _state_from_history(
        {"chrf": [52.0, 52.7], "comet": [80.0, 70.0]}
    )
    assert not check_stopping(state, _stop_config()).stop


def test_plateau_is_not_a_regression():
    state = _state_from_history(
        {"chrf": [52.0, 52.0], "comet": [80.0, 81.0]}
    )
    assert not check_stopping(state, _stop_config()).stop


def test_stop_at_iteration_cap():
    state = _state_from_history(
        {"chrf": [52.0, 52.7, 53.0], "comet": [80.0, 81.0, 82.0]}
    )
    decision = check_stopping(state, _stop_config(max_iterations=2))
    assert decision.stop
    assert "max_iterations" in decision.reason
    assert decision.final_iteration == 2
    assert decision.final_model == "model-2"


def test_any_monitored_metric_can_stop():
    state = _state_from_history(
        {
            "chrf": [52.0, 52.5],
            "wer": [30.0, 29.0],
            "comet": [80.0, 81.0],
        }
    )
    decision = check_stopping(
        state, _stop_config(monitored_metrics=("chrf", "wer"))
    )
    assert decision.stop
    assert "wer" in decision.reason
    assert decision.final_iteration == 0


# ---------------------------------------------------------------------------
# persisted state


def test_state_round_trip(tmp_path):
    state = _state_from_history({"chrf": [52.0, 52.7], "bleu": [40.0, 41.0]})
    path = tmp_path / "state.json"
    state.save(str(path))
    loaded = IterationState.load(str(path))
    assert dataclasses.asdict(loaded) == dataclasses.asdict(state)


def test_state_validation_catches_skew():
    with pytest.raises(ValidationError):
        IterationState(
            iteration=1,
            records=[IterationRecord(0, "m", None, {"chrf": 1.0})],
            history={"chrf": [1.0, 2.0]},
        ).validate()
    with pytest.raises(ValidationError):
        IterationState(
            iteration=0,
            records=[IterationRecord(0, "m", None, {"chrf": 1.0})],
            history={"chrf": [1.0, 2.0]},
        ).validate()


def test_state_load_rejects_garbage(tmp_path):
    path = tmp_path / "state.json"
    write_text(path, "{not json")
    with pytest.raises(FormatError):
        IterationState.load(str(path))
    write_text(path, json.dumps({"iteration": 0}))
    with pytest.raises(FormatError):
        IterationState.load(str(path))


# ---------------------------------------------------------------------------
# the loop end to end


RISING = {
    "checkpoints": {
        "1": [
            ["ckpt-1a", {"chrf": 52.0, "bleu": 40.5}],
            ["ckpt-1b", {"chrf": 52.5, "bleu": 40.4}],
        ],
        "2": [["ckpt-2a", {"chrf": 53.0, "bleu": 41.0}]],
        "3": [["ckpt-3a", {"chrf": 53.2, "bleu": 41.5}]],
    }
}

REGRESSING = {
    "checkpoints": {
        "1": [["r1", {"chrf": 52.0, "bleu": 41.0}]],
        "2": [["r2", {"chrf": 52.6, "bleu": 41.5}]],
        "3": [["r3", {"chrf": 53.0, "bleu": 41.2}]],
    }
}


def test_loop_runs_to_iteration_cap(tmp_path):
    script = write_script(tmp_path, RISING)
    config = base_config(tmp_path, script)
    work = tmp_path / "work"
    state = run_loop(config, str(work))
    assert state.iteration == 3
    assert state.stopped
    assert "max_iterations" in state.stop_reason
    # iteration 1 must have picked the higher-chrf checkpoint even
    # though its monitored bleu was lower
    assert [r.model_ref for r in state.records] == [
        "base-v1", "ckpt-1b", "ckpt-2a", "ckpt-3a",
    ]
    assert state.final_model == "ckpt-3a"
    assert state.history["chrf"] == [51.0, 52.5, 53.0, 53.2]
    assert state.history["bleu"] == [40.0, 40.4, 41.0, 41.5]
    for i in (1, 2, 3):
        iter_dir = work / f"iter_{i:03d}"
        assert (iter_dir / "candidates.jsonl").exists()
        assert (iter_dir / "synthetic.src").exists()
        assert (iter_dir / "synthetic.tgt").exists()
        assert (iter_dir / "train" / "checkpoints.tsv").exists()
        assert (iter_dir / "state.json").exists()


def test_loop_stops_on_monitored_regression(tmp_path):
    script = write_script(tmp_path, REGRESSING)
    config = base_config(tmp_path, script, max_iterations=10)
    state = run_loop(config, str(tmp_path / "work"))
    assert state.stopped
    assert state.iteration == 3
    assert state.final_model == "r2"
    assert "bleu" in state.stop_reason
    assert state.history["bleu"] == [40.0, 41.0, 41.5, 41.2]


def test_loop_max_iterations_one(tmp_path):
    script = write_script(tmp_path, RISING)
    config = base_config(tmp_path, script, max_iterations=1)
    state = run_loop(config, str(tmp_path / "work"))
    assert state.iteration == 1
    assert state.final_model == "ckpt-1b"


def test_finished_loop_is_inert(tmp_path):
    script = write_script(tmp_path, RISING)
    config = base_config(tmp_path, script)
    work = tmp_path / "work"
    first = run_loop(config, str(work))
    before = dir_digest(work)
    second = run_loop(config, str(work))
    assert dataclasses.asdict(second) == dataclasses.asdict(first)
    assert dir_digest(work) == before


def test_loop_resumes_identically_after_crash(tmp_path):
    flag = tmp_path / "crash.flag"
    wobbly = dict(REGRESSING)
    wobbly["fail_once"] = {"iteration": 2, "flag": str(flag)}
    script = write_script(tmp_path, wobbly, name="wobbly.json")
    config = base_config(tmp_path, script, max_iterations=10)
    work = tmp_path / "work"

    with pytest.raises(HookError) as err:
        run_loop(config, str(work))
    assert "iteration 2" in str(err.value)
    assert "simulated crash" in str(err.value)

    interrupted = IterationState.load(str(work / "state.json"))
    assert interrupted.iteration == 1
    first_iter_before = dir_digest(work / "iter_001")

    resumed = run_loop(config, str(work))
    assert dir_digest(work / "iter_001") == first_iter_before

    clean_script = write_script(tmp_path, REGRESSING, name="clean.json")
    clean_config = base_config(tmp_path, clean_script, max_iterations=10)
    fresh = run_loop(clean_config, str(tmp_path / "fresh_work"))
    assert dataclasses.asdict(resumed) == dataclasses.asdict(fresh)


def test_loop_clears_stale_iteration_leftovers(tmp_path):
    script = write_script(tmp_path, RISING)
    config = base_config(tmp_path, script, max_iterations=1)
    work = tmp_path / "work"
    junk = work / "iter_001" / "junk.txt"
    junk.parent.mkdir(parents=True)
    write_text(junk, "leftover from a dead run")
    state = run_loop(config, str(work))
    assert state.iteration == 1
    assert not junk.exists()


def test_loop_with_empty_training_corpus(tmp_path):
    script = write_script(tmp_path, RISING)
    empty_src = tmp_path / "empty.src"
    write_text(empty_src, "")
    config = base_config(
        tmp_path, script, train_source=str(empty_src), max_iterations=1
    )
    work = tmp_path / "work"
    state = run_loop(config, str(work))
    assert state.iteration == 1
    synthetic = load_parallel_corpus(
        str(work / "iter_001" / "synthetic.src"),
        str(work / "iter_001" / "synthetic.tgt"),
    )
    assert len(synthetic) == 0


def test_resume_rejects_unknown_metrics(tmp_path):
    script = write_script(tmp_path, RISING)
    config = base_config(tmp_path, script, max_iterations=1)
    work = tmp_path / "work"
    run_loop(config, str(work))
    switched = base_config(
        tmp_path, script, max_iterations=2, monitored_metrics=("wer",)
    )
    with pytest.raises(ConfigError) as err:
        run_loop(switched, str(work))
    assert "wer" in str(err.value)


def test_baseline_measured_on_validation_corpus(tmp_path):
    script = write_script(tmp_path, RISING)
    val_src = tmp_path / "val.src"
    val_tgt = tmp_path / "val.tgt"
    sources = ["the cat sat on the mat", "a dog barked twice"]
    targets = ["the cat sat on a mat", "a dog barked once"]
    write_lines(val_src, sources)
    write_lines(val_tgt, targets)
    config = base_config(
        tmp_path,
        script,
        baseline_metrics=None,
        validation_source=str(val_src),
        validation_target=str(val_tgt),
        max_iterations=1,
    )
    state = run_loop(config, str(tmp_path / "work"))
    # the stub translator's rank-0 candidate echoes the source line
    assert state.history["chrf"][0] == pytest.approx(
        metrics.chrf_corpus(sources, targets), abs=1e-9
    )
    assert state.history["bleu"][0] == pytest.approx(
        metrics.bleu_corpus(sources, targets), abs=1e-9
    )


def test_baseline_metrics_must_cover_tracked(tmp_path):
    script = write_script(tmp_path, RISING)
    config = base_config(tmp_path, script, baseline_metrics={"chrf": 51.0})
    with pytest.raises(ConfigError) as err:
        run_loop(config, str(tmp_path / "work"))
    assert "bleu" in str(err.value)


def test_baseline_needs_scores_or_validation(tmp_path):
    script = write_script(tmp_path, RISING)
    config = base_config(tmp_path, script, baseline_metrics=None)
    with pytest.raises(ConfigError):
        run_loop(config, str(tmp_path / "work"))
