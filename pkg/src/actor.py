"""One thread per stream node.

A node's thread is started by the first message that reaches its request
mailbox, so nodes that are never asked for anything cost nothing but a handle.
"""
from __future__ import annotations

import logging
import threading

from src.config import EngineName, EngineSettings
from src.exceptions import QueryCancelled
from src.goals import Goal, RelationTable
from src.protocol import Direction, Message, StreamHandle
from src.runtime import Behaviour, Runtime
from src.terms import State

logger = logging.getLogger(__name__)


class ActorStream(StreamHandle):
    __slots__ = ("monitor", "behaviour", "started")

    def __init__(self, id: int):
        super().__init__(id)
        self.monitor = threading.Condition()
        self.behaviour: Behaviour | None = None
        self.started = False


class ActorRuntime(Runtime):
    name = "actor"

    def new_stream(self) -> ActorStream:
        return ActorStream(next(self._ids))

    def _start(self, handle: ActorStream, behaviour: Behaviour) -> None:
        handle.behaviour = behaviour

    def _deliver(self, handle: ActorStream, direction: Direction, msg: Message) -> None:
        with handle.monitor:
            handle.box(direction).push(msg)
            handle.monitor.notify()
            start = direction is Direction.REQUEST and handle.behaviour is not None and not handle.started
            if start:
                handle.started = True
        if start:
            threading.Thread(target=self._drive, args=(handle,), name=f"node-{handle.id}", daemon=True).start()

    def receive(self, handle: ActorStream, direction: Direction) -> Message:
        with handle.monitor:
            while True:
                self.check_cancelled()
                msg = handle.take(direction)
                if msg is not None:
                    return msg
                handle.monitor.wait(self.settings.poll_interval)

    def _drive(self, handle: ActorStream) -> None:
        behaviour, handle.behaviour = handle.behaviour, None
        try:
            direction = next(behaviour)
            while True:
                direction = behaviour.send(self.receive(handle, direction))
        except StopIteration:
            pass
        except QueryCancelled:
            logger.debug("node %d stopped by cancellation", handle.id)
        except Exception as exc:
            self.fail(exc)
        finally:
            self._finished()

    def close(self) -> None:
        # blocked node threads notice the flag on their next poll
        self.cancel()


def run_actor(table: RelationTable, expr: Goal, st: State, n: int | None, **settings) -> list[State]:
    with ActorRuntime(table, EngineSettings(engine=EngineName.ACTOR, **settings)) as rt:
        return rt.solve(expr, st, n)
