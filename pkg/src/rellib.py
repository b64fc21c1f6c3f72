"""Library relations: the small stream generators and relational addition.

Numbers are Oleg numerals, little-endian lists of bits with no trailing zero,
so 0 is ``()`` and 5 is ``(1 0 1)``. Every recursive call sits under a delay.
"""
from __future__ import annotations

from functools import partial
from typing import Callable, Iterable

from src.goals import Goal, RelationTable, call, conj, delay, disj_conc, disj_plus, equalo, fresh
from src.terms import NIL, Pair, Term, list_term


def build_num(n: int) -> Term:
    if n < 0:
        raise ValueError(f"numerals are non-negative, got {n}")
    bits = []
    while n:
        bits.append(n & 1)
        n >>= 1
    return list_term(bits)


def read_num(term: Term) -> int:
    """Inverse of ``build_num``; raises ValueError on anything that is not a ground numeral."""
    value, shift = 0, 0
    while isinstance(term, Pair):
        if term.head not in (0, 1) or isinstance(term.head, bool):
            raise ValueError(f"not a bit: {term.head!r}")
        value |= term.head << shift
        shift += 1
        term = term.tail
    if term is not NIL:
        raise ValueError(f"not a numeral tail: {term!r}")
    return value


# (b x y) -> (r c): one column of binary addition
_FULL_ADDER = [
    ((0, 0, 0), (0, 0)),
    ((1, 0, 0), (1, 0)),
    ((0, 1, 0), (1, 0)),
    ((1, 1, 0), (0, 1)),
    ((0, 0, 1), (1, 0)),
    ((1, 0, 1), (0, 1)),
    ((0, 1, 1), (0, 1)),
    ((1, 1, 1), (1, 1)),
]


def _failo() -> Goal:
    return equalo(1, 2)


def _nevero() -> Goal:
    return delay(lambda: call("nevero"))


def _repeat(value: int, name: str, x: Term) -> Goal:
    return disj_plus([equalo(x, value), delay(lambda: call(name, x))])


def _full_addero(choice: Callable[[Iterable[Goal]], Goal], b, x, y, r, c) -> Goal:
    return choice(
        conj(equalo(b, bb), equalo(x, xx), equalo(y, yy), equalo(r, rr), equalo(c, cc))
        for (bb, xx, yy), (rr, cc) in _FULL_ADDER
    )


def _poso(n) -> Goal:
    return fresh(2, lambda a, d: equalo(n, Pair(a, d)))


def _gt1o(n) -> Goal:
    return fresh(3, lambda a, ad, dd: equalo(n, Pair(a, Pair(ad, dd))))


def _addero(choice: Callable[[Iterable[Goal]], Goal], d, n, m, r) -> Goal:
    one = build_num(1)
    return choice([
        conj(equalo(d, 0), equalo(m, NIL), equalo(n, r)),
        conj(equalo(d, 0), equalo(n, NIL), equalo(m, r), call("poso", m)),
        conj(equalo(d, 1), equalo(m, NIL), delay(lambda: call("addero", 0, n, one, r))),
        conj(equalo(d, 1), equalo(n, NIL), call("poso", m), delay(lambda: call("addero", 0, one, m, r))),
        conj(
            equalo(n, one),
            equalo(m, one),
            fresh(2, lambda a, c: conj(equalo(r, list_term([a, c])), call("full-addero", d, 1, 1, a, c))),
        ),
        conj(equalo(n, one), delay(lambda: call("gen-addero", d, n, m, r))),
        conj(equalo(m, one), call(">1o", n), call(">1o", r), delay(lambda: call("addero", d, one, n, r))),
        conj(call(">1o", n), delay(lambda: call("gen-addero", d, n, m, r))),
    ])


def _gen_addero(d, n, m, r) -> Goal:
    return fresh(7, lambda a, b, c, e, x, y, z: conj(
        equalo(n, Pair(a, x)),
        equalo(m, Pair(b, y)),
        call("poso", y),
        equalo(r, Pair(c, z)),
        call("poso", z),
        call("full-addero", d, a, b, c, e),
        delay(lambda: call("addero", e, x, y, z)),
    ))


def _pluso(n, m, k) -> Goal:
    return call("addero", 0, n, m, k)


def _sums_to_n(q, n) -> Goal:
    return fresh(2, lambda x, y: conj(equalo(q, list_term([x, y])), call("pluso", x, y, n)))


def _disj_conc_of(goals: Iterable[Goal]) -> Goal:
    return disj_conc(*goals)


def relations(disj_conc: bool = False) -> RelationTable:
    """The library table; ``disj_conc`` turns every multi-way choice into a DisjConc node."""
    choice = _disj_conc_of if disj_conc else disj_plus
    table = RelationTable()
    table = table.define("failo", 0, _failo)
    table = table.define("nevero", 0, _nevero)
    table = table.define("fives", 1, partial(_repeat, 5, "fives"))
    table = table.define("sixes", 1, partial(_repeat, 6, "sixes"))
    table = table.define("sevens", 1, partial(_repeat, 7, "sevens"))
    table = table.define("full-addero", 5, partial(_full_addero, choice))
    table = table.define("poso", 1, _poso)
    table = table.define(">1o", 1, _gt1o)
    table = table.define("addero", 4, partial(_addero, choice))
    table = table.define("gen-addero", 4, _gen_addero)
    table = table.define("pluso", 3, _pluso)
    table = table.define("sums-to-n", 2, _sums_to_n)
    return table


DEFAULT_RELATIONS = relations()


def failo() -> Goal:
    return call("failo")


def nevero() -> Goal:
    """Never answers and never fails."""
    return call("nevero")


def fives(x) -> Goal:
    return call("fives", x)


def sixes(x) -> Goal:
    return call("sixes", x)


def sevens(x) -> Goal:
    return call("sevens", x)


def pluso(a, b, c) -> Goal:
    return call("pluso", a, b, c)


def sums_to_n(q, n: int) -> Goal:
    return call("sums-to-n", q, build_num(n))


def answer_pair(term: Term) -> tuple[int, int]:
    """Decode a reified sums-to-n answer ``(x y)`` into integers."""
    if not isinstance(term, Pair) or not isinstance(term.tail, Pair) or term.tail.tail is not NIL:
        raise ValueError(f"not a pair answer: {term!r}")
    return read_num(term.head), read_num(term.tail.head)
