"""Reader, printer and compiler for query scripts.

A script is any number of ``(define (name param ...) goal ...)`` forms
followed by exactly one ``(run N (var ...) goal ...)`` or
``(run* (var ...) goal ...)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Union

from src.exceptions import ParseError
from src.goals import Delay, Goal, RelationTable, call, conj, conj_sce, disj_conc, disj_plus, equalo, fresh
from src.rellib import DEFAULT_RELATIONS, build_num
from src.terms import NIL, Symbol, Term, Var, list_term

QUOTE = Symbol("quote")
QUASIQUOTE = Symbol("quasiquote")
UNQUOTE = Symbol("unquote")
OLEG = Symbol("#oleg")

_PREFIXES = {"'": QUOTE, "`": QUASIQUOTE, ",": UNQUOTE}
_SUGAR = {v: k for k, v in _PREFIXES.items()}
_DELIMITERS = "()'`,;"


class Dotted(NamedTuple):
    """An improper list ``(item ... . tail)`` as read."""

    items: list
    tail: object


Datum = Union[int, Symbol, list, Dotted]


def _skip_whitespace(s: str, i: int) -> int:
    while i < len(s):
        if s[i] == ";":
            while i < len(s) and s[i] != "\n":
                i += 1
        elif s[i].isspace():
            i += 1
        else:
            break
    return i


def _read_token(s: str, i: int) -> tuple[str, int]:
    start = i
    while i < len(s) and not s[i].isspace() and s[i] not in _DELIMITERS:
        i += 1
    return s[start:i], i


def _read_list(s: str, i: int) -> tuple[Datum, int]:
    start = i
    i += 1
    items: list = []
    while True:
        i = _skip_whitespace(s, i)
        if i == len(s):
            raise ParseError("list not closed", start)
        if s[i] == ")":
            return items, i + 1
        if s[i] == "." and (i + 1 == len(s) or s[i + 1].isspace() or s[i + 1] in "()"):
            if not items:
                raise ParseError("nothing before '.'", i)
            tail, i = _read(s, i + 1)
            i = _skip_whitespace(s, i)
            if i == len(s) or s[i] != ")":
                raise ParseError("expected ')' after dotted tail", i)
            return Dotted(items, tail), i + 1
        value, i = _read(s, i)
        items.append(value)


def _read(s: str, i: int) -> tuple[Datum, int]:
    i = _skip_whitespace(s, i)
    if i == len(s):
        raise ParseError("unexpected end of input", i)
    c = s[i]
    if c == "(":
        return _read_list(s, i)
    if c == ")":
        raise ParseError("unbalanced parentheses", i)
    if c in _PREFIXES:
        value, j = _read(s, i + 1)
        return [_PREFIXES[c], value], j
    start = i
    tok, i = _read_token(s, i)
    if tok == "#oleg":
        arg, i = _read(s, i)
        if not (isinstance(arg, list) and len(arg) == 1 and isinstance(arg[0], int) and arg[0] >= 0):
            raise ParseError("#oleg takes one non-negative integer", start)
        return [OLEG, arg[0]], i
    if tok.startswith("#"):
        raise ParseError(f"unknown reader syntax {tok!r}", start)
    try:
        return int(tok), i
    except ValueError:
        return Symbol(tok), i


def read_all(text: str) -> list[Datum]:
    data = []
    i = _skip_whitespace(text, 0)
    while i < len(text):
        value, i = _read(text, i)
        data.append(value)
        i = _skip_whitespace(text, i)
    return data


def read(text: str) -> Datum:
    value, i = _read(text, 0)
    i = _skip_whitespace(text, i)
    if i != len(text):
        raise ParseError("trailing input", i)
    return value


def show_datum(d: Datum) -> str:
    if isinstance(d, Dotted):
        return "(" + " ".join(show_datum(x) for x in d.items) + " . " + show_datum(d.tail) + ")"
    if isinstance(d, list):
        if len(d) == 2 and d[0] is OLEG:
            return f"#oleg({d[1]})"
        if len(d) == 2 and d[0] in _SUGAR:
            return _SUGAR[d[0]] + show_datum(d[1])
        return "(" + " ".join(show_datum(x) for x in d) + ")"
    return str(d)


@dataclass(frozen=True)
class Definition:
    name: str
    params: tuple[str, ...]
    body: tuple[Datum, ...]


@dataclass(frozen=True)
class Query:
    # None is run*
    limit: int | None
    variables: tuple[str, ...]
    goals: tuple[Datum, ...]


@dataclass(frozen=True)
class QueryScript:
    definitions: tuple[Definition, ...]
    query: Query


def _symbol_names(d: Datum, what: str) -> tuple[str, ...]:
    if not isinstance(d, list) or not all(isinstance(x, Symbol) for x in d):
        raise ParseError(f"{what} must be a list of symbols")
    return tuple(x.name for x in d)


def _form_name(d: Datum) -> str | None:
    if isinstance(d, list) and d and isinstance(d[0], Symbol):
        return d[0].name
    return None


def _parse_definition(d: list) -> Definition:
    if len(d) < 3 or not isinstance(d[1], list) or not d[1]:
        raise ParseError("define needs (define (name param ...) goal ...)")
    name, *params = _symbol_names(d[1], "define header")
    return Definition(name, tuple(params), tuple(d[2:]))


def _parse_query(d: list) -> Query:
    if d[0].name == "run*":
        rest = d[1:]
        limit = None
    else:
        if len(d) < 2 or not isinstance(d[1], int) or d[1] < 0:
            raise ParseError("run needs a non-negative answer count")
        rest = d[2:]
        limit = d[1]
    if len(rest) < 2:
        raise ParseError("a query needs variables and at least one goal")
    variables = _symbol_names(rest[0], "query variables")
    if not variables:
        raise ParseError("a query needs at least one variable")
    return Query(limit, variables, tuple(rest[1:]))


def parse(text: str) -> QueryScript:
    definitions: list[Definition] = []
    query = None
    for d in read_all(text):
        form = _form_name(d)
        if query is not None:
            raise ParseError("nothing may follow the query")
        if form == "define":
            definitions.append(_parse_definition(d))
        elif form in ("run", "run*"):
            query = _parse_query(d)
        else:
            raise ParseError(f"expected define or run, got {show_datum(d)}")
    if query is None:
        raise ParseError("script has no run query")
    return QueryScript(tuple(definitions), query)


def unparse(script: QueryScript) -> str:
    lines = []
    for defn in script.definitions:
        header = " ".join((defn.name,) + defn.params)
        lines.append(f"(define ({header}) " + " ".join(show_datum(g) for g in defn.body) + ")")
    q = script.query
    head = "run*" if q.limit is None else f"run {q.limit}"
    goals = " ".join(show_datum(g) for g in q.goals)
    lines.append(f"({head} ({' '.join(q.variables)}) {goals})")
    return "\n".join(lines) + "\n"


Env = dict[str, Term]


def _quoted(d: Datum) -> Term:
    if isinstance(d, Dotted):
        return list_term([_quoted(x) for x in d.items], _quoted(d.tail))
    if isinstance(d, list):
        if len(d) == 2 and d[0] is OLEG:
            return build_num(d[1])
        return list_term(_quoted(x) for x in d)
    return d


def _quasi(d: Datum, env: Env) -> Term:
    if isinstance(d, Dotted):
        return list_term([_quasi(x, env) for x in d.items], _quasi(d.tail, env))
    if isinstance(d, list):
        if len(d) == 2 and d[0] is UNQUOTE:
            return compile_term(d[1], env)
        if len(d) == 2 and d[0] is OLEG:
            return build_num(d[1])
        return list_term(_quasi(x, env) for x in d)
    return d


def compile_term(d: Datum, env: Env) -> Term:
    if isinstance(d, int):
        return d
    if isinstance(d, Symbol):
        try:
            return env[d.name]
        except KeyError:
            raise ParseError(f"unbound variable {d.name!r}") from None
    if isinstance(d, list):
        if not d:
            return NIL
        if len(d) == 2 and d[0] is QUOTE:
            return _quoted(d[1])
        if len(d) == 2 and d[0] is QUASIQUOTE:
            return _quasi(d[1], env)
        if len(d) == 2 and d[0] is OLEG:
            return build_num(d[1])
    raise ParseError(f"not a term: {show_datum(d)}")


def _goals(ds, env: Env) -> list[Goal]:
    return [compile_goal(d, env) for d in ds]


def _compile_equalo(args: list, env: Env) -> Goal:
    if len(args) != 2:
        raise ParseError(f"equalo takes 2 terms, got {len(args)}")
    return equalo(compile_term(args[0], env), compile_term(args[1], env))


def _compile_conj_sce(args: list, env: Env) -> Goal:
    if len(args) != 2:
        raise ParseError(f"conj-sce takes 2 goals, got {len(args)}")
    return conj_sce(*_goals(args, env))


def _compile_fresh(args: list, env: Env) -> Goal:
    if len(args) < 2:
        raise ParseError("fresh needs variables and at least one goal")
    names = _symbol_names(args[0], "fresh variables")

    def body(*vs: Var) -> Goal:
        return conj(*_goals(args[1:], {**env, **dict(zip(names, vs))}))

    if not names:
        return body()
    return fresh(len(names), body)


def _compile_delay(args: list, env: Env) -> Goal:
    if not args:
        raise ParseError("delay needs a goal")
    return Delay(lambda: conj(*_goals(args, env)))


# variadic forms taking one or more goals
_COMBINATORS: dict[str, Callable[[list[Goal]], Goal]] = {
    "conj": lambda gs: conj(*gs),
    "disj": disj_plus,
    "disj+": disj_plus,
    "disj+c": lambda gs: disj_conc(*gs),
}

_FORMS: dict[str, Callable[[list, Env], Goal]] = {
    "equalo": _compile_equalo,
    "conj-sce": _compile_conj_sce,
    "fresh": _compile_fresh,
    "delay": _compile_delay,
}


def compile_goal(d: Datum, env: Env) -> Goal:
    name = _form_name(d)
    if name is None:
        raise ParseError(f"not a goal: {show_datum(d)}")
    args = d[1:]
    if name in _COMBINATORS:
        if not args:
            raise ParseError(f"{name} needs at least one goal")
        return _COMBINATORS[name](_goals(args, env))
    if name in _FORMS:
        return _FORMS[name](args, env)
    return call(name, *(compile_term(a, env) for a in args))


@dataclass(frozen=True)
class CompiledQuery:
    table: RelationTable
    goal: Goal
    nvars: int
    limit: int | None


def _relation_body(defn: Definition) -> Callable[..., Goal]:
    def body(*args: Term) -> Goal:
        return conj(*_goals(defn.body, dict(zip(defn.params, args))))

    return body


def compile_script(script: QueryScript, table: RelationTable = DEFAULT_RELATIONS) -> CompiledQuery:
    """Build the relation table and the query goal; query variables are Var(0) .. Var(n-1)."""
    defined = RelationTable()
    for defn in script.definitions:
        defined = defined.define(defn.name, len(defn.params), _relation_body(defn))
    q = script.query
    env = {name: Var(i) for i, name in enumerate(q.variables)}
    goal = conj(*_goals(q.goals, env))
    return CompiledQuery(table.overlay(defined), goal, len(q.variables), q.limit)
