from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

from src import avl


class Symbol:
    """Interned symbol atom; equal names give the identical object."""

    __slots__ = ("name",)
    _table: dict[str, Symbol] = {}

    def __new__(cls, name: str):
        try:
            return cls._table[name]
        except KeyError:
            sym = object.__new__(cls)
            object.__setattr__(sym, "name", name)
            return cls._table.setdefault(name, sym)

    def __setattr__(self, *args):
        raise TypeError(f"'{type(self).__name__}' object is immutable")

    def __reduce__(self):
        return (Symbol, (self.name,))

    def __str__(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return f"Symbol({self.name!r})"


class Nil:
    __slots__ = ()
    _instance: Nil | None = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = object.__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NIL"


NIL = Nil()


@dataclass(frozen=True, slots=True)
class Var:
    id: int

    def __repr__(self) -> str:
        return f"Var({self.id})"


@dataclass(frozen=True, slots=True)
class Pair:
    head: Term
    tail: Term


Atom = Union[int, Symbol]
Term = Union[int, Symbol, Var, Pair, Nil]
Substitution = avl.Tree


@dataclass(frozen=True, slots=True)
class State:
    subst: Substitution = avl.EMPTY
    counter: int = 0

    @classmethod
    def initial(cls, nvars: int = 0) -> State:
        """Empty substitution with ``nvars`` query variables already allocated."""
        return cls(avl.EMPTY, nvars)

    def fresh(self) -> tuple[Var, State]:
        return Var(self.counter), State(self.subst, self.counter + 1)

    def __repr__(self) -> str:
        bindings = ", ".join(f"{k}↦{show(v)}" for k, v in avl.items(self.subst))
        return f"State({{{bindings}}}, counter={self.counter})"


def is_atom(t: object) -> bool:
    return (isinstance(t, int) and not isinstance(t, bool)) or isinstance(t, Symbol)


def cons(head: Term, tail: Term) -> Pair:
    return Pair(head, tail)


def list_term(items: Iterable[Term], tail: Term = NIL) -> Term:
    result = tail
    for item in reversed(list(items)):
        result = Pair(item, result)
    return result


def as_term(value) -> Term:
    """Convert plain Python data: lists/tuples become lists, str becomes Symbol."""
    if isinstance(value, (list, tuple)):
        return list_term(as_term(v) for v in value)
    if isinstance(value, str):
        return Symbol(value)
    if isinstance(value, (Var, Pair, Nil, Symbol)) or is_atom(value):
        return value
    raise TypeError(f"cannot convert {value!r} to a term")


def to_python(term: Term):
    """Inverse of ``as_term`` for proper lists; improper tails stay as terms."""
    if isinstance(term, Pair):
        items = []
        while isinstance(term, Pair):
            items.append(to_python(term.head))
            term = term.tail
        if term is not NIL:
            items.append(term)
        return items
    if term is NIL:
        return []
    if isinstance(term, Symbol):
        return term.name
    return term


def walk(t: Term, s: Substitution) -> Term:
    while isinstance(t, Var):
        bound = avl.lookup(s, t.id)
        if bound is None:
            return t
        t = bound
    return t


def _extend(var: Var, t: Term, s: Substitution) -> Substitution:
    # no occurs check: cyclic terms are possible through pathological queries
    return avl.insert(s, var.id, t)


def unify(u: Term, v: Term, s: Substitution) -> Substitution | None:
    """Extend ``s`` so that ``u`` and ``v`` are equal; ``None`` means failure."""
    stack = [(u, v)]
    while stack:
        u, v = stack.pop()
        u = walk(u, s)
        v = walk(v, s)
        if u is v:
            continue
        if isinstance(u, Var):
            if isinstance(v, Var) and u.id == v.id:
                continue
            s = _extend(u, v, s)
        elif isinstance(v, Var):
            s = _extend(v, u, s)
        elif isinstance(u, Pair) and isinstance(v, Pair):
            stack.append((u.tail, v.tail))
            stack.append((u.head, v.head))
        elif type(u) is type(v) and u == v:
            continue
        else:
            return None
    return s


def walk_all(t: Term, s: Substitution) -> Term:
    t = walk(t, s)
    if isinstance(t, Pair):
        return Pair(walk_all(t.head, s), walk_all(t.tail, s))
    return t


def _rename(t: Term, names: dict[int, Symbol]) -> Term:
    if isinstance(t, Var):
        if t.id not in names:
            names[t.id] = Symbol(f"_{len(names)}")
        return names[t.id]
    if isinstance(t, Pair):
        return Pair(_rename(t.head, names), _rename(t.tail, names))
    return t


def reify(st: State, query_vars: list[Var] | tuple[Var, ...]) -> Term:
    if len(query_vars) == 1:
        value = walk_all(query_vars[0], st.subst)
    else:
        value = walk_all(list_term(query_vars), st.subst)
    return _rename(value, {})


def show(term: Term) -> str:
    if term is NIL:
        return "()"
    if isinstance(term, Var):
        return f"_.{term.id}"
    if isinstance(term, Pair):
        parts = []
        while isinstance(term, Pair):
            parts.append(show(term.head))
            term = term.tail
        if term is not NIL:
            parts.extend([".", show(term)])
        return "(" + " ".join(parts) + ")"
    return str(term)
