"""The two combinators that only make sense with concurrency.

``disj_conc`` asks every disjunct at once and answers from a buffer.
``conj_sce`` runs the second conjunct on its own next to the conjunction and
fails early when it has no answers.
"""
from __future__ import annotations

from collections import deque
from typing import TYPE_CHECKING, Generator

from src.exceptions import ProtocolError
from src.goals import Conj, Goal
from src.processes import cancel, drain
from src.protocol import Direction, Message, StreamHandle, Tag
from src.terms import State

if TYPE_CHECKING:
    from src.runtime import Behaviour, Runtime


def disj_conc(rt: Runtime, goals: tuple[Goal, ...], st: State) -> StreamHandle:
    children = {i: rt.apply(g, st) for i, g in enumerate(goals)}
    return rt.spawn(mplusplus, children)


def mplusplus(rt: Runtime, me: StreamHandle, active: dict[int, StreamHandle]) -> Behaviour:
    buffer: deque[State] = deque()
    while True:
        msg = yield Direction.REQUEST
        if msg.is_done:
            for child in active.values():
                rt.send_done(child, me)
            return
        parent = msg.sender
        if not buffer and active:
            cancelled = yield from refill_buffer(rt, me, parent, active, buffer)
            if cancelled:
                return
        if not buffer:
            if not active:
                rt.publish(me, parent, Tag.CLOSE)
                return
            rt.publish(me, parent, Tag.DELAY)
            continue
        st = buffer.popleft()
        if not buffer and not active:
            rt.publish(me, parent, Tag.STATE_AND_CLOSE, st=st)
            return
        rt.publish(me, parent, Tag.STATE, st=st)


def refill_buffer(
    rt: Runtime,
    me: StreamHandle,
    parent: StreamHandle,
    active: dict[int, StreamHandle],
    buffer: deque[State],
) -> Generator[Direction, Message, bool]:
    """One round: ask every active child once, buffer answers by child index.

    Returns True when ``parent`` cancelled the round.
    """
    pending: dict[int, int] = {}
    for i, child in active.items():
        rt.request(child, me)
        pending[child.id] = i
    found: list[tuple[int, State]] = []
    while pending:
        rep = yield Direction.RESULT
        if rep.is_done:
            asked = [c for c in active.values() if c.id in pending]
            rest = [c for c in active.values() if c.id not in pending]
            yield from cancel(rt, me, parent, asked, rest)
            return True
        i = pending.pop(rep.src.id)
        match rep.tag:
            case Tag.STATE:
                found.append((i, rep.st))
            case Tag.STATE_AND_CLOSE:
                found.append((i, rep.st))
                del active[i]
            case Tag.CLOSE:
                del active[i]
            case Tag.FORWARD:
                active[i] = rep.fwd
                rt.request(rep.fwd, me)
                pending[rep.fwd.id] = i
            case Tag.FORWARD_WITH_STATE:
                found.append((i, rep.st))
                active[i] = rep.fwd
            case Tag.DELAY:
                pass
            case _:
                raise ProtocolError(f"disj_conc node {me.id} got {rep.tag} as a reply")
    found.sort(key=lambda pair: pair[0])
    buffer.extend(st for _, st in found)
    return False


def conj_sce(rt: Runtime, g1: Goal, g2: Goal, st: State) -> StreamHandle:
    str1 = rt.apply(Conj(g1, g2), st)
    str2 = rt.apply(g2, st)
    return rt.spawn(short_circuit, str1, str2)


def discard(rt: Runtime, me: StreamHandle, rep: Message) -> None:
    """Release whatever stream is still alive behind an unwanted reply."""
    match rep.tag:
        case Tag.STATE | Tag.DELAY:
            rt.send_done(rep.src, me)
        case Tag.FORWARD | Tag.FORWARD_WITH_STATE:
            rt.send_done(rep.fwd, me)


def short_circuit(rt: Runtime, me: StreamHandle, str1: StreamHandle, str2: StreamHandle) -> Behaviour:
    msg = yield Direction.REQUEST
    if msg.is_done:
        rt.send_done(str1, me)
        rt.send_done(str2, me)
        return
    parent = msg.sender
    rt.request(str1, me)
    rt.request(str2, me)
    # str1 owes a reply for as long as the loop runs, str2 while probing
    probing = True
    while True:
        rep = yield Direction.RESULT
        if rep.is_done:
            yield from cancel(rt, me, parent, (str1, str2) if probing else (str1,))
            return
        if probing and rep.src.id == str2.id:
            match rep.tag:
                case Tag.CLOSE:
                    rt.publish(me, parent, Tag.CLOSE)
                    rt.send_done(str1, me)
                    yield from drain(rt, me, 1)
                    return
                case Tag.FORWARD:
                    str2 = rep.fwd
                    rt.request(str2, me)
                case Tag.DELAY:
                    rt.request(str2, me)
                case _:
                    discard(rt, me, rep)
                    probing = False
            continue
        match rep.tag:
            case Tag.STATE:
                rt.publish(me, parent, Tag.FORWARD_WITH_STATE, st=rep.st, fwd=str1)
            case Tag.FORWARD_WITH_STATE | Tag.STATE_AND_CLOSE | Tag.CLOSE:
                rt.publish(me, parent, rep.tag, st=rep.st, fwd=rep.fwd)
            case Tag.FORWARD if probing:
                str1 = rep.fwd
                rt.request(str1, me)
                continue
            case Tag.DELAY if probing:
                rt.request(str1, me)
                continue
            case Tag.FORWARD:
                rt.publish(me, parent, Tag.FORWARD, fwd=rep.fwd)
            case Tag.DELAY:
                rt.publish(me, parent, Tag.FORWARD, fwd=str1)
            case _:
                raise ProtocolError(f"conj_sce node {me.id} got {rep.tag} as a reply")
        if probing:
            rt.send_done(str2, me)
            yield from drain(rt, me, 1)
        return
