"""Minimum Bayes Risk reranking and corpus tooling for machine translation.

The package covers the full loop around an external translation model:
cleaning bitext, reranking candidate translations by consensus,
measuring corpora with chrF and BLEU, paired bootstrap significance
testing, and an iterative self-training driver with pluggable
translator, trainer, and scorer processes.
"""

__version__ = "0.1.0"

from .corpus import (
    CandidateSet,
    Corpus,
    SegmentPair,
    load_candidate_sets,
    load_parallel_corpus,
    write_candidate_sets,
    write_parallel_corpus,
)
from .errors import (
    AlignmentError,
    ConfigError,
    EncodingError,
    FormatError,
    HookError,
    MbrkitError,
    ProtocolError,
    StartupError,
    TransportError,
    ValidationError,
)
from .filters import FilterConfig, FilterReport, filter_pair, run_filter_pipeline
from .mbr import (
    MbrResult,
    UtilityMatrix,
    expected_utilities,
    make_utility,
    mbr_decode_corpus,
    mbr_select,
    sweep_candidate_counts,
    utility_matrix,
)
from .metrics import (
    MetricScore,
    bleu_corpus,
    bleu_sentence,
    chrf_corpus,
    chrf_sentence,
    levenshtein,
    tokenize_13a,
)
from .pipeline import (
    IterationState,
    LoopConfig,
    build_synthetic_dataset,
    check_stopping,
    load_loop_config,
    mock_translate,
    run_loop,
)
from .scorer import (
    InProcessStub,
    ScoreRequest,
    ScoreResponse,
    ScorerCapabilities,
    ScorerClient,
    serve_stub,
)
from .significance import (
    SignificanceResult,
    SystemEvaluation,
    compare_systems,
    evaluate_system,
    paired_bootstrap,
)
