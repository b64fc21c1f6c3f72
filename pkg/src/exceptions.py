from __future__ import annotations


class KanrenError(Exception):
    pass


class DuplicateKeyError(KanrenError, KeyError):
    """A substitution may only be extended, never rebound."""


class RelationError(KanrenError, ValueError):
    pass


class DuplicateRelationError(RelationError):
    pass


class UnguardedRecursionError(RelationError):
    pass


class ArityError(RelationError):
    pass


class UnknownRelationError(KanrenError, KeyError):
    pass


class EmptyGoalListError(KanrenError, ValueError):
    pass


class ProtocolError(KanrenError, RuntimeError):
    pass


class QueryCancelled(KanrenError, RuntimeError):
    pass


class QueryTimeout(KanrenError, TimeoutError):
    pass


class ParseError(KanrenError, ValueError):
    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)
