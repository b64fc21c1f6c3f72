"""Single-threaded µKanren evaluator.

A stream is EMPTY, a Cons of a state and a stream, or a Thunk that produces a
stream when forced. Interleaving happens only at thunks (binary trampolining).
"""
from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from typing import Callable, Union

from src.exceptions import QueryCancelled
from src.goals import (
    Call,
    Conj,
    ConjSce,
    Delay,
    Disj,
    DisjConc,
    Equalo,
    Fresh,
    Goal,
    RelationTable,
    disj_plus,
)
from src.terms import State, unify

logger = logging.getLogger(__name__)


class Empty:
    __slots__ = ()
    _instance: Empty | None = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = object.__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "EMPTY"


EMPTY = Empty()


@dataclass(frozen=True, slots=True)
class Cons:
    head: State
    tail: LazyStream


@dataclass(frozen=True, slots=True)
class Thunk:
    force: Callable[[], LazyStream]


LazyStream = Union[Empty, Cons, Thunk]


def _prefix(s: LazyStream) -> tuple[list[State], LazyStream]:
    """Split off the mature heads of ``s`` without recursion."""
    heads = []
    while isinstance(s, Cons):
        heads.append(s.head)
        s = s.tail
    return heads, s


def _prepend(heads: list[State], s: LazyStream) -> LazyStream:
    for head in reversed(heads):
        s = Cons(head, s)
    return s


def mplus(s1: LazyStream, s2: LazyStream) -> LazyStream:
    heads, rest = _prefix(s1)
    if rest is EMPTY:
        tail = s2
    else:
        tail = Thunk(lambda: mplus(s2, rest.force()))
    return _prepend(heads, tail)


def bind(s: LazyStream, g: Callable[[State], LazyStream]) -> LazyStream:
    heads, rest = _prefix(s)
    if rest is EMPTY:
        result: LazyStream = EMPTY
    else:
        result = Thunk(lambda: bind(rest.force(), g))
    for head in reversed(heads):
        result = mplus(g(head), result)
    return result


def take(n: int | None, s: LazyStream, cancel: threading.Event | None = None) -> list[State]:
    """Pull up to ``n`` states (all of them when ``n`` is None).

    With ``n=None`` this diverges on a stream that stays productive forever.
    """
    answers: list[State] = []
    while n is None or len(answers) < n:
        if cancel is not None and cancel.is_set():
            raise QueryCancelled("baseline query cancelled")
        if isinstance(s, Cons):
            answers.append(s.head)
            s = s.tail
        elif isinstance(s, Thunk):
            s = s.force()
        else:
            break
    return answers


def evaluate(expr: Goal, st: State, table: RelationTable) -> LazyStream:
    while True:
        match expr:
            case Equalo(u, v):
                s = unify(u, v, st.subst)
                return EMPTY if s is None else Cons(State(s, st.counter), EMPTY)
            case Disj(g1, g2):
                return mplus(evaluate(g1, st, table), evaluate(g2, st, table))
            case Conj(g1, g2) | ConjSce(g1, g2):
                # short-circuiting needs concurrency; here it is a plain conj
                return bind(evaluate(g1, st, table), lambda s, g=g2: evaluate(g, s, table))
            case DisjConc(goals):
                expr = disj_plus(goals)
            case Fresh(body):
                var, st = st.fresh()
                expr = body(var)
            case Delay(thunk):
                return Thunk(lambda: evaluate(thunk(), st, table))
            case Call(name, args):
                expr = table.resolve(name, args)
            case _:
                raise TypeError(f"not a goal: {expr!r}")


class BaselineEngine:
    """Adapter giving the baseline the same surface as the concurrent runtimes."""

    name = "baseline"

    def __init__(self, table: RelationTable):
        self.table = table
        self._cancel = threading.Event()

    def solve(self, expr: Goal, st: State, n: int | None) -> list[State]:
        logger.debug("baseline query n=%s", n)
        return take(n, evaluate(expr, st, self.table), self._cancel)

    def cancel(self) -> None:
        self._cancel.set()

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
