"""Machinery shared by the actor and pool engines.

A node behaviour is a generator. It yields the ``Direction`` it wants to
receive from next and is resumed with the message that arrived. The actor
engine drives each generator on its own thread; the pool engine turns each
yield into a parked continuation.
"""
from __future__ import annotations

import itertools
import logging
import threading
from abc import ABC, abstractmethod
from typing import Callable, Generator

from src.concurrent_goals import conj_sce, disj_conc
from src.config import EngineSettings, MplusPolicy
from src.exceptions import ProtocolError, QueryCancelled
from src.goals import Call, Conj, ConjSce, Delay, Disj, DisjConc, Equalo, Fresh, Goal, RelationTable
from src.processes import bind_process, delay_process, equalo_process, mplus_process
from src.protocol import Direction, Message, ProtocolRecorder, StreamHandle, Tag, trace, trace_logger
from src.terms import State

logger = logging.getLogger(__name__)

Behaviour = Generator[Direction, Message, None]


def collect(rt: Runtime, me: StreamHandle, root: StreamHandle, n: int | None, answers: list[State]) -> Behaviour:
    """Ask ``root`` for answers until there are ``n`` of them or it closes."""
    live = True
    while n is None or len(answers) < n:
        rt.request(root, me)
        msg = yield Direction.RESULT
        match msg.tag:
            case Tag.STATE:
                answers.append(msg.st)
            case Tag.STATE_AND_CLOSE:
                answers.append(msg.st)
                live = False
                break
            case Tag.CLOSE:
                live = False
                break
            case Tag.FORWARD:
                root = msg.fwd
            case Tag.FORWARD_WITH_STATE:
                answers.append(msg.st)
                root = msg.fwd
            case Tag.DELAY:
                continue
            case _:
                raise ProtocolError(f"unexpected {msg.tag} at the query root")
    if live:
        rt.send_done(root, me)


class Runtime(ABC):
    name: str

    def __init__(
        self,
        table: RelationTable,
        settings: EngineSettings | None = None,
        recorder: ProtocolRecorder | None = None,
    ):
        self.table = table
        self.settings = settings or EngineSettings()
        self.local_delay = self.settings.mplus_policy is MplusPolicy.LOCAL_DELAY
        if recorder is None and self.settings.check_protocol:
            recorder = ProtocolRecorder()
        self.recorder = recorder
        self._ids = itertools.count()
        self._ticks = itertools.count()
        self._live = 0
        self._live_cond = threading.Condition()
        self._cancelled = threading.Event()
        self._failure: BaseException | None = None

    # -- message protocol -------------------------------------------------

    def new_stream(self) -> StreamHandle:
        return StreamHandle(next(self._ids))

    def request(self, child: StreamHandle, reply_to: StreamHandle) -> None:
        if child.done_sent:
            raise ProtocolError(f"request to {child.id} after Done")
        self._send(reply_to, child, Direction.REQUEST, Message(Tag.REQUEST, sender=reply_to, src=reply_to))

    def send_done(self, child: StreamHandle, sender: StreamHandle | None = None) -> None:
        child.done_sent = True
        self._send(sender, child, Direction.REQUEST, Message(Tag.DONE, src=sender))

    def publish(
        self,
        src: StreamHandle,
        dst: StreamHandle,
        tag: Tag,
        st: State | None = None,
        fwd: StreamHandle | None = None,
    ) -> None:
        self._send(src, dst, Direction.RESULT, Message(tag, st=st, fwd=fwd, src=src))

    def _send(self, src: StreamHandle | None, dst: StreamHandle, direction: Direction, msg: Message) -> None:
        tick = next(self._ticks)
        if trace_logger.isEnabledFor(logging.DEBUG):
            trace(tick, src, dst, msg.tag)
        if self.recorder is not None:
            self.recorder.observe(tick, src, dst, msg)
        self._deliver(dst, direction, msg)

    # -- goal application -------------------------------------------------

    def spawn(self, behaviour: Callable[..., Behaviour], *args) -> StreamHandle:
        handle = self.new_stream()
        with self._live_cond:
            self._live += 1
        self._start(handle, behaviour(self, handle, *args))
        return handle

    def apply(self, expr: Goal, st: State) -> StreamHandle:
        """Apply a goal to a state; the returned stream does no work until asked."""
        while True:
            match expr:
                case Fresh(body):
                    var, st = st.fresh()
                    expr = body(var)
                case Call(name, args):
                    expr = self.table.resolve(name, args)
                case Equalo(u, v):
                    return self.spawn(equalo_process, u, v, st)
                case Disj(g1, g2):
                    return self.spawn(mplus_process, self.apply(g1, st), self.apply(g2, st))
                case Conj(g1, g2):
                    return self.spawn(bind_process, self.apply(g1, st), g2)
                case Delay(thunk):
                    return self.spawn(delay_process, thunk, st)
                case DisjConc(goals):
                    return disj_conc(self, goals, st)
                case ConjSce(g1, g2):
                    return conj_sce(self, g1, g2, st)
                case _:
                    raise TypeError(f"not a goal: {expr!r}")

    def take(self, n: int | None, root: StreamHandle) -> list[State]:
        """Drive ``root`` from outside the node graph until ``n`` answers arrive."""
        client = self.new_stream()
        answers: list[State] = []
        driver = collect(self, client, root, n, answers)
        try:
            direction = next(driver)
            while True:
                direction = driver.send(self.receive(client, direction))
        except StopIteration:
            pass
        return answers

    def solve(self, expr: Goal, st: State, n: int | None) -> list[State]:
        logger.debug("%s query n=%s", self.name, n)
        if self.recorder is not None and self.recorder.root is None:
            self.recorder.root = st
        try:
            return self.take(n, self.apply(expr, st))
        except QueryCancelled:
            if self._failure is not None:
                raise self._failure
            raise

    # -- lifecycle --------------------------------------------------------

    @property
    def live(self) -> int:
        with self._live_cond:
            return self._live

    @property
    def cancelled(self) -> bool:
        return self._cancelled.is_set()

    def _finished(self) -> None:
        with self._live_cond:
            self._live -= 1
            if self._live == 0:
                self._live_cond.notify_all()

    def wait_quiescent(self, timeout: float = 5.0) -> bool:
        """Block until every node has terminated; False on timeout."""
        with self._live_cond:
            return self._live_cond.wait_for(lambda: self._live == 0, timeout)

    def fail(self, exc: BaseException) -> None:
        if self._failure is None:
            logger.error("%s node failed: %r", self.name, exc)
            self._failure = exc
        self.cancel()

    def cancel(self) -> None:
        self._cancelled.set()

    def check_cancelled(self) -> None:
        if self._cancelled.is_set():
            raise QueryCancelled(f"{self.name} query cancelled")

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    @abstractmethod
    def _start(self, handle: StreamHandle, behaviour: Behaviour) -> None:
        ...

    @abstractmethod
    def _deliver(self, handle: StreamHandle, direction: Direction, msg: Message) -> None:
        ...

    @abstractmethod
    def receive(self, handle: StreamHandle, direction: Direction) -> Message:
        """Blocking receive, used by the query driver outside the node graph."""
