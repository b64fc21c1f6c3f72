"""Node behaviours for equalo, disj, conj and delay streams.

Each behaviour takes the runtime and its own handle, yields the mailbox it
wants to read next and gets the message back. Returning ends the node.

A node waiting for a child's reply can get a Done instead: its parent gave up
on the request the node is serving (see ``cancel``).
"""
from __future__ import annotations

from typing import TYPE_CHECKING, Callable, Sequence

from src.exceptions import ProtocolError
from src.goals import Goal
from src.protocol import Direction, StreamHandle, Tag
from src.terms import State, Term, unify

if TYPE_CHECKING:
    from src.runtime import Behaviour, Runtime


def drain(rt: Runtime, me: StreamHandle, count: int) -> Behaviour:
    """Collect replies still owed to a node that has given up and release any stream they hand over."""
    while count:
        rep = yield Direction.RESULT
        if rep.is_done:
            # crossed our last reply
            continue
        count -= 1
        if rep.fwd is not None:
            rt.send_done(rep.fwd, me)


def cancel(
    rt: Runtime,
    me: StreamHandle,
    parent: StreamHandle,
    pending: Sequence[StreamHandle],
    idle: Sequence[StreamHandle] = (),
) -> Behaviour:
    """Handle a Done that arrived while serving ``parent``'s request.

    ``pending`` children still owe a reply, ``idle`` ones do not. All of them
    get Done, ``parent`` gets the Close it is owed.
    """
    for child in (*pending, *idle):
        rt.send_done(child, me)
    rt.publish(me, parent, Tag.CLOSE)
    yield from drain(rt, me, len(pending))


def equalo_process(rt: Runtime, me: StreamHandle, u: Term, v: Term, st: State) -> Behaviour:
    msg = yield Direction.REQUEST
    if msg.is_done:
        return
    s = unify(u, v, st.subst)
    if s is None:
        rt.publish(me, msg.sender, Tag.CLOSE)
    else:
        rt.publish(me, msg.sender, Tag.STATE_AND_CLOSE, st=State(s, st.counter))


def delay_process(rt: Runtime, me: StreamHandle, thunk: Callable[[], Goal], st: State) -> Behaviour:
    msg = yield Direction.REQUEST
    if msg.is_done:
        return
    rt.publish(me, msg.sender, Tag.DELAY)
    msg = yield Direction.REQUEST
    if msg.is_done:
        # never forced
        return
    rt.publish(me, msg.sender, Tag.FORWARD, fwd=rt.apply(thunk(), st))


def mplus_process(
    rt: Runtime,
    me: StreamHandle,
    str1: StreamHandle,
    str2: StreamHandle,
    parent: StreamHandle | None = None,
) -> Behaviour:
    """Interleave two streams.

    ``parent`` is set when the node takes over a request that was already
    received, which is how a bind node turns into an mplus node.
    """
    local_delay = rt.local_delay
    while True:
        if parent is None:
            msg = yield Direction.REQUEST
            if msg.is_done:
                rt.send_done(str1, me)
                rt.send_done(str2, me)
                return
            parent = msg.sender
        while True:
            rt.request(str1, me)
            rep = yield Direction.RESULT
            match rep.tag:
                case Tag.DONE:
                    yield from cancel(rt, me, parent, (str1,), (str2,))
                    return
                case Tag.STATE:
                    rt.publish(me, parent, Tag.STATE, st=rep.st)
                    if local_delay:
                        str1, str2 = str2, str1
                    break
                case Tag.FORWARD_WITH_STATE:
                    rt.publish(me, parent, Tag.STATE, st=rep.st)
                    if local_delay:
                        str1, str2 = str2, rep.fwd
                    else:
                        str1 = rep.fwd
                    break
                case Tag.DELAY:
                    str1, str2 = str2, str1
                    if local_delay:
                        continue
                    rt.publish(me, parent, Tag.DELAY)
                    break
                case Tag.STATE_AND_CLOSE:
                    rt.publish(me, parent, Tag.FORWARD_WITH_STATE, st=rep.st, fwd=str2)
                    return
                case Tag.CLOSE:
                    rt.publish(me, parent, Tag.FORWARD, fwd=str2)
                    return
                case Tag.FORWARD:
                    str1 = rep.fwd
                case _:
                    raise ProtocolError(f"mplus node {me.id} got {rep.tag} as a reply")
        parent = None


def bind_process(rt: Runtime, me: StreamHandle, src: StreamHandle, g: Goal) -> Behaviour:
    while True:
        msg = yield Direction.REQUEST
        if msg.is_done:
            rt.send_done(src, me)
            return
        parent = msg.sender
        while True:
            rt.request(src, me)
            rep = yield Direction.RESULT
            match rep.tag:
                case Tag.DONE:
                    yield from cancel(rt, me, parent, (src,))
                    return
                case Tag.CLOSE:
                    rt.publish(me, parent, Tag.CLOSE)
                    return
                case Tag.STATE_AND_CLOSE:
                    rt.publish(me, parent, Tag.FORWARD, fwd=rt.apply(g, rep.st))
                    return
                case Tag.FORWARD:
                    src = rep.fwd
                case Tag.DELAY:
                    rt.publish(me, parent, Tag.DELAY)
                    break
                case Tag.STATE | Tag.FORWARD_WITH_STATE:
                    rest = rep.fwd if rep.fwd is not None else src
                    head = rt.apply(g, rep.st)
                    tail = rt.spawn(bind_process, rest, g)
                    yield from mplus_process(rt, me, head, tail, parent)
                    return
                case _:
                    raise ProtocolError(f"bind node {me.id} got {rep.tag} as a reply")
