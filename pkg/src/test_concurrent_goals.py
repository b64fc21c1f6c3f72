from __future__ import annotations

from collections import Counter

from src.config import MplusPolicy
from src.goals import conj, conj_sce, delay, disj, disj_conc, equalo
from src.rellib import failo, fives, nevero, sevens, sixes
from src.testdata import run_checked


class TestDisjConc:
    def test_round_robin_over_infinite_children(self, run_concurrent):
        """
        Test that every child contributes one answer per round, in child order.
        """
        answers = run_concurrent(9, lambda x: disj_conc(fives(x), sixes(x), sevens(x)))
        assert answers == [5, 6, 7, 5, 6, 7, 5, 6, 7]

    def test_finite_children(self, run_concurrent):
        answers = run_concurrent(
            None,
            lambda x: disj_conc(equalo(x, 1), disj(equalo(x, 2), equalo(x, 3)), equalo(x, 4)),
        )
        assert answers == [1, 2, 4, 3]

    def test_failing_children(self, run_concurrent):
        answers = run_concurrent(None, lambda x: disj_conc(failo(), equalo(x, 1), failo()))
        assert answers == [1]

    def test_all_children_fail(self, run_concurrent):
        assert run_concurrent(None, lambda x: disj_conc(failo(), conj(equalo(x, 1), equalo(x, 2)))) == []

    def test_single_child(self, run_concurrent):
        assert run_concurrent(3, lambda x: disj_conc(sixes(x))) == [6, 6, 6]

    def test_same_multiset_as_disj(self, run_concurrent):
        concurrent = run_concurrent(
            None, lambda x: disj_conc(delay(lambda: equalo(x, 1)), equalo(x, 2), disj(equalo(x, 3), equalo(x, 1)))
        )
        plain = run_concurrent(
            None, lambda x: disj(delay(lambda: equalo(x, 1)), disj(equalo(x, 2), disj(equalo(x, 3), equalo(x, 1))))
        )
        assert Counter(concurrent) == Counter(plain) == Counter([1, 1, 2, 3])

    def test_partial_take_releases_children(self, run_concurrent):
        # run_checked asserts that every node has stopped
        assert run_concurrent(2, lambda x: disj_conc(fives(x), sixes(x), sevens(x))) == [5, 6]


class TestConjSce:
    def test_acts_as_conj_when_second_goal_succeeds(self, run_concurrent):
        answers = run_concurrent(
            None,
            lambda x: conj_sce(disj(equalo(x, 1), equalo(x, 2)), disj(equalo(x, 2), equalo(x, 3))),
        )
        assert answers == [2]

    def test_infinite_first_goal(self, run_concurrent):
        assert run_concurrent(3, lambda x: conj_sce(equalo(x, 5), fives(x))) == [5, 5, 5]

    def test_delayed_failure(self, run_concurrent):
        """
        Test that a second goal failing only after a delay still stops the query.
        """
        assert run_concurrent(None, lambda x: conj_sce(fives(x), delay(lambda: failo()))) == []

    def test_first_goal_fails(self, run_concurrent):
        assert run_concurrent(None, lambda x: conj_sce(failo(), fives(x))) == []

    def test_nested(self, run_concurrent):
        answers = run_concurrent(None, lambda x: conj_sce(conj_sce(sixes(x), failo()), sevens(x)))
        assert answers == []

    def test_nested_second_goal_never_answers(self, run_concurrent):
        """
        Test that a failing outer second goal stops an inner conj-sce whose
        own second goal never answers; every node must still terminate.
        """
        answers = run_concurrent(None, lambda x: conj_sce(conj_sce(fives(x), nevero()), failo()))
        assert answers == []

    def test_first_goal_never_answers(self, run_concurrent):
        assert run_concurrent(None, lambda x: conj_sce(conj(nevero(), fives(x)), failo())) == []

    def test_answer_while_second_goal_never_answers(self, run_concurrent):
        """
        Test that the second goal is stopped once the conjunction has answered.
        """
        answers = run_concurrent(1, lambda x: conj_sce(equalo(x, 5), disj(nevero(), equalo(x, 5))))
        assert answers == [5]


class TestCancelledRequest:
    """A parent giving up on a request must stop the whole subtree below it."""

    def test_local_delay_retry_loop(self, concurrent_settings):
        settings = concurrent_settings.model_copy(update={"mplus_policy": MplusPolicy.LOCAL_DELAY})
        answers = run_checked(settings, None, lambda x: conj_sce(disj(nevero(), nevero()), failo()))
        assert answers == []

    def test_disj_conc_round(self, run_concurrent):
        answers = run_concurrent(None, lambda x: conj_sce(disj_conc(nevero(), conj_sce(fives(x), nevero())), failo()))
        assert answers == []

    def test_through_bind_and_mplus(self, run_concurrent):
        answers = run_concurrent(
            None,
            lambda x: conj_sce(conj(disj(conj_sce(sixes(x), nevero()), nevero()), fives(x)), failo()),
        )
        assert answers == []
