import random
from collections import Counter

from src import avl
from src.config import EngineName, EngineSettings
from src.goals import Goal, RelationTable, conj, conj_sce, delay, disj, disj_conc, disj_plus, equalo, fresh
from src.harness import make_engine
from src.models import RECORD_TYPES, BenchSweep
from src.rellib import DEFAULT_RELATIONS, build_num
from src.terms import NIL, Pair, State, Term, Var, list_term, reify


def create_sweep(session, repeats=5, disj_conc=False) -> BenchSweep:
    sweep = BenchSweep(repeats=repeats, disj_conc=disj_conc)
    session.add(sweep)
    session.commit()
    return sweep


def create_record(session, sweep, engine="pool", workers=1, num=16, run=0, seconds=0.5, answers=None):
    record = RECORD_TYPES[engine](
        workers=workers,
        num=num,
        run=run,
        seconds=seconds,
        answers=num + 1 if answers is None else answers,
    )
    sweep.records.append(record)
    session.commit()
    return record


def create_cell(session, sweep, engine="pool", workers=1, num=16, seconds=(0.1, 0.2, 0.3)):
    return [
        create_record(session, sweep, engine=engine, workers=workers, num=num, run=i, seconds=s)
        for i, s in enumerate(seconds)
    ]


###############################################################################
# Running goals
###############################################################################


def run_checked(settings: EngineSettings, n, body, nvars=1, table: RelationTable = DEFAULT_RELATIONS):
    """Run ``body`` and, on the concurrent engines, check the message trace and quiescence."""
    query_vars = [Var(i) for i in range(nvars)]
    st = State.initial(nvars)
    if settings.engine is not EngineName.BASELINE:
        settings = settings.model_copy(update={"check_protocol": True})
    rt = make_engine(table, settings)
    try:
        states = rt.solve(body(*query_vars), st, n)
        if settings.engine is not EngineName.BASELINE:
            assert rt.wait_quiescent(10), f"{rt.live} nodes still running"
            assert rt.recorder.violations == []
    finally:
        rt.close()
    return [reify(s, query_vars) for s in states]


###############################################################################
# Random programs
###############################################################################

# A program is plain data so that it can be compiled with disj+ or disj+c and
# with conj or conj-sce:
#   ("==", term, term) | ("conj", p, p) | ("disj", p, p) | ("disj+", [p, ...])
#   | ("fresh", p) | ("delay", p)
# and a term is ("int", n) | ("var", k) | ("nil",) | ("pair", term, term),
# ``k`` counting variables in scope, the query variable being 0.
# Pairs never hold variables: unification has no occurs check, so a variable
# inside a pair could end up bound to a term containing itself.


def random_ground_term(rng: random.Random, depth: int = 1):
    r = rng.random()
    if r < 0.7 or depth == 0:
        return ("int", rng.randrange(4))
    if r < 0.8:
        return ("nil",)
    return ("pair", random_ground_term(rng, depth - 1), random_ground_term(rng, depth - 1))


def random_term(rng: random.Random, scope: int):
    if rng.random() < 0.45:
        return ("var", rng.randrange(scope))
    return random_ground_term(rng)


def term_vars(term) -> set[int]:
    match term:
        case ("var", k):
            return {k}
        case ("pair", a, b):
            return term_vars(a) | term_vars(b)
    return set()


def random_program(rng: random.Random, depth: int = 5, scope: int = 1):
    if depth == 0 or rng.random() < 0.25:
        return ("==", random_term(rng, scope), random_term(rng, scope))
    kind = rng.choice(["conj", "disj", "disj+", "fresh", "delay"])
    if kind in ("conj", "disj"):
        return (kind, random_program(rng, depth - 1, scope), random_program(rng, depth - 1, scope))
    if kind == "disj+":
        return (kind, [random_program(rng, depth - 1, scope) for _ in range(rng.randint(2, 3))])
    if kind == "fresh":
        return (kind, random_program(rng, depth - 1, scope + 1))
    return (kind, random_program(rng, depth - 1, scope))


def compile_term(term, scope: list[Var]) -> Term:
    match term:
        case ("int", n):
            return n
        case ("var", k):
            return scope[k]
        case ("nil",):
            return NIL
        case ("pair", a, b):
            return Pair(compile_term(a, scope), compile_term(b, scope))


def compile_program(program, scope: list[Var], concurrent: bool = False, short_circuit: bool = False) -> Goal:
    """Build the goal; ``concurrent`` turns disj+ into disj+c and ``short_circuit`` conj into conj-sce."""

    def sub(p, vars_=scope):
        return compile_program(p, vars_, concurrent, short_circuit)

    match program:
        case ("==", a, b):
            return equalo(compile_term(a, scope), compile_term(b, scope))
        case ("conj", a, b):
            return conj_sce(sub(a), sub(b)) if short_circuit else conj(sub(a), sub(b))
        case ("disj", a, b):
            return disj(sub(a), sub(b))
        case ("disj+", branches):
            goals = [sub(p) for p in branches]
            return disj_conc(*goals) if concurrent else disj_plus(goals)
        case ("fresh", body):
            return fresh(1, lambda v: sub(body, scope + [v]))
        case ("delay", body):
            return delay(lambda: sub(body))


def program_body(program, concurrent: bool = False, short_circuit: bool = False):
    return lambda q: compile_program(program, [q], concurrent, short_circuit)


###############################################################################
# AVL and numeral helpers
###############################################################################


def assert_avl(root: avl.Tree, lo=None, hi=None) -> int:
    """Check ordering, stored heights and balance; returns the height."""
    if root is avl.EMPTY:
        return 0
    assert lo is None or root.key > lo
    assert hi is None or root.key < hi
    left = assert_avl(root.left, lo, root.key)
    right = assert_avl(root.right, root.key, hi)
    assert abs(left - right) <= 1
    assert root.height == max(left, right) + 1
    return root.height


def new_node_count(old: avl.Tree, new: avl.Tree) -> int:
    shared = {id(n) for n in avl.nodes(old)}
    return sum(1 for n in avl.nodes(new) if id(n) not in shared)


def oracle_pairs(num: int) -> Counter:
    return Counter(
        (list_term([build_num(x), build_num(num - x)])) for x in range(num + 1)
    )

