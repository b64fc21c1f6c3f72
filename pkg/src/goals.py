"""Engine-agnostic goal expressions and relation tables.

Goals are plain data so that the baseline, actor and pool engines can all
interpret the same program.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Iterable, Mapping, Union

from src.exceptions import (
    ArityError,
    DuplicateRelationError,
    EmptyGoalListError,
    UnguardedRecursionError,
    UnknownRelationError,
)
from src.terms import Term, Var, as_term


@dataclass(frozen=True, slots=True)
class Equalo:
    u: Term
    v: Term


@dataclass(frozen=True, slots=True)
class Conj:
    g1: Goal
    g2: Goal


@dataclass(frozen=True, slots=True)
class Disj:
    g1: Goal
    g2: Goal


@dataclass(frozen=True, slots=True)
class DisjConc:
    goals: tuple[Goal, ...]

    def __post_init__(self):
        if not self.goals:
            raise EmptyGoalListError("disj_conc needs at least one goal")


@dataclass(frozen=True, slots=True)
class ConjSce:
    g1: Goal
    g2: Goal


@dataclass(frozen=True, slots=True)
class Fresh:
    body: Callable[[Var], Goal]


@dataclass(frozen=True, slots=True)
class Delay:
    thunk: Callable[[], Goal]


@dataclass(frozen=True, slots=True)
class Call:
    name: str
    args: tuple[Term, ...]


Goal = Union[Equalo, Conj, Disj, DisjConc, ConjSce, Fresh, Delay, Call]


def equalo(u, v) -> Equalo:
    return Equalo(as_term(u), as_term(v))


def conj(*goals: Goal) -> Goal:
    """Right-nested conjunction of one or more goals."""
    if not goals:
        raise EmptyGoalListError("conj needs at least one goal")
    result = goals[-1]
    for g in reversed(goals[:-1]):
        result = Conj(g, result)
    return result


def disj_plus(goals: Iterable[Goal]) -> Goal:
    """Nested binary disjunctions forming a right-branching tree."""
    goals = tuple(goals)
    if not goals:
        raise EmptyGoalListError("disj+ needs at least one goal")
    result = goals[-1]
    for g in reversed(goals[:-1]):
        result = Disj(g, result)
    return result


def disj(*goals: Goal) -> Goal:
    return disj_plus(goals)


def disj_conc(*goals: Goal) -> DisjConc:
    return DisjConc(tuple(goals))


def conj_sce(g1: Goal, g2: Goal) -> ConjSce:
    """Conjunction that fails as soon as ``g2`` alone is known to fail."""
    return ConjSce(g1, g2)


def fresh(n: int, body: Callable[..., Goal]) -> Goal:
    """Introduce ``n`` fresh variables and pass them to ``body``."""
    def bind(collected: tuple[Var, ...]) -> Goal:
        if len(collected) == n:
            return body(*collected)
        return Fresh(lambda v: bind(collected + (v,)))

    return bind(())


def delay(goal_fn: Callable[[], Goal]) -> Delay:
    return Delay(goal_fn)


def call(name: str, *args) -> Call:
    return Call(name, tuple(as_term(a) for a in args))


@dataclass(frozen=True, slots=True)
class Relation:
    name: str
    arity: int
    body: Callable[..., Goal] = field(compare=False)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(name={self.name!r}, arity={self.arity})"


def _self_calls(goal: Goal, name: str) -> Iterable[Call]:
    """Calls to ``name`` reachable without crossing a Delay."""
    stack = [goal]
    while stack:
        g = stack.pop()
        match g:
            case Call(name=n) if n == name:
                yield g
            case Conj(g1, g2) | Disj(g1, g2) | ConjSce(g1, g2):
                stack.extend((g1, g2))
            case DisjConc(goals):
                stack.extend(goals)
            case Fresh(body):
                # only the shape matters here, the variable is never evaluated
                stack.append(body(Var(0)))


class RelationTable(Mapping[str, Relation]):
    """Immutable name -> relation table; ``define`` returns an extended copy."""

    __slots__ = ("_relations",)

    def __init__(self, relations: Mapping[str, Relation] | None = None):
        self._relations = MappingProxyType(dict(relations or {}))

    def __getitem__(self, name: str) -> Relation:
        return self._relations[name]

    def __iter__(self):
        return iter(self._relations)

    def __len__(self) -> int:
        return len(self._relations)

    def define(self, name: str, arity: int, body: Callable[..., Goal]) -> RelationTable:
        if name in self._relations:
            raise DuplicateRelationError(f"relation {name!r} is already defined")
        placeholders = [Var(i) for i in range(arity)]
        if any(True for _ in _self_calls(body(*placeholders), name)):
            raise UnguardedRecursionError(
                f"relation {name!r} calls itself outside of a delay"
            )
        return RelationTable({**self._relations, name: Relation(name, arity, body)})

    def overlay(self, other: RelationTable) -> RelationTable:
        """Entries of ``other`` take precedence over entries of this table."""
        return RelationTable({**self._relations, **other._relations})

    def resolve(self, name: str, args: tuple[Term, ...]) -> Goal:
        try:
            relation = self._relations[name]
        except KeyError:
            raise UnknownRelationError(f"unknown relation {name!r}") from None
        if len(args) != relation.arity:
            raise ArityError(
                f"relation {name!r} takes {relation.arity} arguments, got {len(args)}"
            )
        return relation.body(*args)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({sorted(self._relations)!r})"


def define(table: RelationTable, name: str, arity: int, body: Callable[..., Goal]) -> RelationTable:
    return table.define(name, arity, body)
