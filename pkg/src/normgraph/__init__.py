"""Deterministic temporal knowledge-graph engine for versioned documents."""

from .errors import DataError, NormGraphError, QueryError
from .ingest import (
    add_language,
    apply_event,
    enact,
    ingest_corpus,
    parse_document,
    parse_event_file,
    render_action_text,
    textualize_metadata,
)
from .model import (
    ActionNode,
    ActionType,
    Aspect,
    ComponentType,
    LanguageVersion,
    TemporalVersion,
    TextUnit,
    ThemeNode,
    ValidityInterval,
    WorkId,
    WorkKind,
    WorkNode,
    interval_contains,
    validate_graph,
)
from .planner import Answer, QueryPattern, Strategy, StructuredQuery, run
from .retrieval import (
    HashedTfidfEmbedder,
    RetrievalHit,
    RetrievalMode,
    RetrievalRequest,
    locate_spans,
    scoped_search,
)
from .store import GraphStore, load, save, tokenize
from .temporal import (
    MembershipPolicy,
    SnapshotPolicy,
    TemporalScope,
    ctv_at,
    resolve_instant,
    resolve_scope,
    snapshot_text,
)
from .themes import define_theme, theme_scope

__version__ = "0.1.0"

__all__ = [
    "ActionNode", "ActionType", "Answer", "Aspect", "ComponentType",
    "DataError", "GraphStore", "HashedTfidfEmbedder", "LanguageVersion",
    "MembershipPolicy", "NormGraphError", "QueryError", "QueryPattern",
    "RetrievalHit", "RetrievalMode", "RetrievalRequest", "SnapshotPolicy",
    "Strategy", "StructuredQuery", "TemporalScope", "TemporalVersion",
    "TextUnit", "ThemeNode", "ValidityInterval", "WorkId", "WorkKind",
    "WorkNode", "add_language", "apply_event", "ctv_at", "define_theme",
    "enact", "ingest_corpus", "interval_contains", "load", "locate_spans",
    "parse_document", "parse_event_file", "render_action_text",
    "resolve_instant", "resolve_scope", "run", "save", "scoped_search",
    "snapshot_text", "textualize_metadata", "theme_scope", "tokenize",
    "validate_graph",
]
