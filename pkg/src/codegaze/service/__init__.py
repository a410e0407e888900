"""HTTP study service: task assignment, event ingestion, durable session storage."""

from .app import StudyConfig, create_app
from .assignment import CorpusExhausted, assign_tasks
from .storage import EventStore

__all__ = [
    "CorpusExhausted",
    "EventStore",
    "StudyConfig",
    "assign_tasks",
    "create_app",
]
