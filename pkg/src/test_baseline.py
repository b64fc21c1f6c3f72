from __future__ import annotations

import threading

import pytest  # type: ignore

from src.baseline import EMPTY, BaselineEngine, Cons, Thunk, bind, mplus, take
from src.exceptions import QueryCancelled
from src.goals import conj, equalo
from src.rellib import DEFAULT_RELATIONS, failo, fives
from src.terms import State


def states(*counters):
    return [State(counter=c) for c in counters]


def stream_of(*counters):
    s = EMPTY
    for st in reversed(states(*counters)):
        s = Cons(st, s)
    return s


class TestStreams:
    def test_mplus_keeps_mature_prefix(self):
        """
        Test that a mature stream is drained before the other one.
        """
        merged = mplus(stream_of(1, 2), stream_of(3))
        assert [st.counter for st in take(None, merged)] == [1, 2, 3]

    def test_mplus_swaps_at_thunk(self):
        left = Cons(State(counter=1), Thunk(lambda: stream_of(2)))
        merged = mplus(left, stream_of(3))
        assert [st.counter for st in take(None, merged)] == [1, 3, 2]

    def test_mplus_empty(self):
        s = stream_of(1)
        assert mplus(EMPTY, s) is s

    def test_bind(self):
        result = bind(stream_of(1, 2), lambda st: stream_of(st.counter * 10, st.counter * 10 + 1))
        assert [st.counter for st in take(None, result)] == [10, 11, 20, 21]

    def test_bind_long_prefix(self):
        """
        Test that bind over a long mature prefix needs no deep recursion.
        """
        result = bind(stream_of(*range(5000)), lambda st: stream_of(st.counter))
        assert len(take(None, result)) == 5000

    def test_take_limits(self):
        assert len(take(1, stream_of(1, 2, 3))) == 1
        assert take(0, stream_of(1)) == []

    def test_take_cancelled(self):
        cancel = threading.Event()
        cancel.set()
        with pytest.raises(QueryCancelled):
            take(None, stream_of(1), cancel)


class TestBaselineEngine:
    def test_equalo(self):
        with BaselineEngine(DEFAULT_RELATIONS) as engine:
            answers = engine.solve(equalo(5, 5), State(), None)
        assert len(answers) == 1

    def test_failo_first_terminates(self):
        engine = BaselineEngine(DEFAULT_RELATIONS)
        q = State.initial(1)
        assert engine.solve(conj(failo(), fives(0)), q, None) == []

    def test_cancel(self):
        """
        Test that cancel stops a diverging query from another thread.
        """
        engine = BaselineEngine(DEFAULT_RELATIONS)
        timer = threading.Timer(0.2, engine.cancel)
        timer.start()
        with pytest.raises(QueryCancelled):
            engine.solve(conj(fives(0), failo()), State.initial(1), None)
        timer.join()
