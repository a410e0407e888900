"""codegaze: token-level attention tracking and analysis for code-repair studies.

Core pipeline: lex a buggy snippet into tokens, record blur-editor interaction
events, derive per-token developer attention from visibility time, reduce
neural-model attention dumps to the same token space, and compare the two with
rank correlations, divergence, shares, and temporal profiles.
"""

from .analysis import (
    BinStats,
    CorrelationResult,
    DegenerateInput,
    DfuEntry,
    DfuReport,
    EmptyClass,
    TemporalProfile,
    ZeroMass,
    aoi_share,
    buggy_line_share,
    context_share,
    dfu,
    dfu_report,
    jsd,
    length_context_correlation,
    significance_filter,
    simulate_window,
    spearman,
    temporal_profile,
    window_sensitivity,
)
from .corpus import CorpusError, lint_corpus, load_corpus, load_snippet, save_snippet
from .model_attention import (
    DumpError,
    EmptyDump,
    MissingCopyAttention,
    ModelAttentionDump,
    NodeAttention,
    ProjectedStep,
    SpanError,
    aggregate,
    copy_attention,
    load_dump,
    load_dumps,
    project_node_step,
    save_dump,
)
from .sessions import (
    EditOutsideBuggyLine,
    EmptySession,
    EventValidator,
    InteractionEvent,
    MalformedLog,
    SessionRecord,
    TrackedLineState,
    VisibilityTimeline,
    apply_edit,
    build_timeline,
    derive_attention,
    load_session,
    load_sessions,
    replay,
    save_session,
)
from .tokens import (
    AttentionVector,
    LexError,
    OutOfRange,
    Snippet,
    Token,
    TokenClass,
    compute_window,
    tokenize,
    tokenize_line,
)

__version__ = "1.0.0"

__all__ = [
    "AttentionVector",
    "BinStats",
    "CorrelationResult",
    "CorpusError",
    "DegenerateInput",
    "DfuEntry",
    "DfuReport",
    "DumpError",
    "EditOutsideBuggyLine",
    "EmptyClass",
    "EmptyDump",
    "EmptySession",
    "EventValidator",
    "InteractionEvent",
    "LexError",
    "MalformedLog",
    "MissingCopyAttention",
    "ModelAttentionDump",
    "NodeAttention",
    "OutOfRange",
    "ProjectedStep",
    "SessionRecord",
    "Snippet",
    "SpanError",
    "TemporalProfile",
    "Token",
    "TokenClass",
    "TrackedLineState",
    "VisibilityTimeline",
    "ZeroMass",
    "aggregate",
    "aoi_share",
    "apply_edit",
    "buggy_line_share",
    "build_timeline",
    "compute_window",
    "context_share",
    "copy_attention",
    "derive_attention",
    "dfu",
    "dfu_report",
    "jsd",
    "length_context_correlation",
    "lint_corpus",
    "load_corpus",
    "load_dump",
    "load_dumps",
    "load_session",
    "load_sessions",
    "load_snippet",
    "project_node_step",
    "replay",
    "save_dump",
    "save_session",
    "save_snippet",
    "significance_filter",
    "simulate_window",
    "spearman",
    "temporal_profile",
    "tokenize",
    "tokenize_line",
    "window_sensitivity",
]
