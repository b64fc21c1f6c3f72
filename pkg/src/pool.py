"""A fixed set of worker threads running node continuations.

A node that waits for a message is parked under ``(handle id, direction)``.
Delivering to a parked key turns the continuation into a task on a FIFO queue;
delivering anywhere else just fills the mailbox, which the node drains the
next time it suspends. A Done for a node parked on its results wakes it too.

The query driver runs as a pool node as well, so answers and Delays reaching
the root never cross over to the calling thread.
"""
from __future__ import annotations

import logging
import random
import threading
import time
from collections import deque
from typing import NamedTuple

from src.config import EngineName, EngineSettings
from src.exceptions import ProtocolError
from src.goals import Goal, RelationTable
from src.protocol import Direction, Message, StreamHandle
from src.runtime import Behaviour, Runtime, collect
from src.terms import State

logger = logging.getLogger(__name__)


def _collect_then_set(
    rt: Runtime,
    me: StreamHandle,
    root: StreamHandle,
    n: int | None,
    answers: list[State],
    finished: threading.Event,
) -> Behaviour:
    yield from collect(rt, me, root, n, answers)
    finished.set()


class Task(NamedTuple):
    node: StreamHandle
    continuation: Behaviour
    message: Message


class WorkerPool:
    def __init__(self, workers: int, run_task, jitter: float = 0.0):
        self.lock = threading.Lock()
        self.work_ready = threading.Condition(self.lock)
        self.message_ready = threading.Condition(self.lock)
        self.parked: dict[tuple[int, Direction], tuple[StreamHandle, Behaviour]] = {}
        self.queue: deque[Task] = deque()
        self.jitter = jitter
        self._run_task = run_task
        self._stopping = False
        self._idle = 0
        self._threads = [
            threading.Thread(target=self._work, name=f"pool-worker-{i}", daemon=True)
            for i in range(workers)
        ]
        for thread in self._threads:
            thread.start()

    def suspend(self, node: StreamHandle, direction: Direction, continuation: Behaviour) -> None:
        with self.lock:
            msg = node.take(direction)
            if msg is None:
                if (node.id, direction) in self.parked:
                    raise ProtocolError(f"node {node.id} is already parked on {direction.value}")
                self.parked[(node.id, direction)] = (node, continuation)
            else:
                self._schedule(Task(node, continuation, msg))

    def suspend_on_request(self, node: StreamHandle, continuation: Behaviour) -> None:
        self.suspend(node, Direction.REQUEST, continuation)

    def suspend_on_result(self, node: StreamHandle, continuation: Behaviour) -> None:
        self.suspend(node, Direction.RESULT, continuation)

    def deliver(self, node: StreamHandle, direction: Direction, msg: Message) -> None:
        with self.lock:
            parked = self.parked.pop((node.id, direction), None)
            if parked is None and msg.is_done:
                parked = self.parked.pop((node.id, Direction.RESULT), None)
            if parked is None:
                node.box(direction).push(msg)
                self.message_ready.notify_all()
            else:
                self._schedule(Task(parked[0], parked[1], msg))

    def _schedule(self, task: Task) -> None:
        self.queue.append(task)
        if self._idle:
            self.work_ready.notify()

    def parked_count(self) -> int:
        with self.lock:
            return len(self.parked)

    def _work(self) -> None:
        while True:
            with self.lock:
                while not self.queue and not self._stopping:
                    self._idle += 1
                    self.work_ready.wait()
                    self._idle -= 1
                if self._stopping:
                    return
                task = self.queue.popleft()
            if self.jitter:
                time.sleep(random.uniform(0, self.jitter))
            self._run_task(task)

    def close(self) -> None:
        with self.lock:
            self._stopping = True
            self.work_ready.notify_all()
            self.message_ready.notify_all()
        for thread in self._threads:
            thread.join()


class PoolRuntime(Runtime):
    name = "pool"

    def __init__(self, table: RelationTable, settings: EngineSettings | None = None, recorder=None):
        super().__init__(table, settings, recorder)
        self.pool = WorkerPool(self.settings.workers, self._run_task, self.settings.jitter)
        logger.debug("pool started with %d workers", self.settings.workers)

    def _start(self, handle: StreamHandle, behaviour: Behaviour) -> None:
        try:
            direction = next(behaviour)
        except StopIteration:
            # a driver asked for no answers
            self._finished()
            return
        self.pool.suspend(handle, direction, behaviour)

    def _deliver(self, handle: StreamHandle, direction: Direction, msg: Message) -> None:
        self.pool.deliver(handle, direction, msg)

    def _run_task(self, task: Task) -> None:
        node, continuation, msg = task
        if self.cancelled:
            continuation.close()
            self._finished()
            return
        try:
            direction = continuation.send(msg)
        except StopIteration:
            self._finished()
        except Exception as exc:
            self.fail(exc)
            self._finished()
        else:
            self.pool.suspend(node, direction, continuation)

    def take(self, n: int | None, root: StreamHandle) -> list[State]:
        answers: list[State] = []
        finished = threading.Event()
        self.spawn(_collect_then_set, root, n, answers, finished)
        while not finished.wait(self.settings.poll_interval):
            self.check_cancelled()
        return answers

    def receive(self, handle: StreamHandle, direction: Direction) -> Message:
        with self.pool.lock:
            while True:
                self.check_cancelled()
                msg = handle.take(direction)
                if msg is not None:
                    return msg
                self.pool.message_ready.wait(self.settings.poll_interval)

    def close(self) -> None:
        self.cancel()
        self.pool.close()
        logger.debug("pool stopped, %d nodes still parked", self.pool.parked_count())


def run_pool(table: RelationTable, expr: Goal, st: State, n: int | None, workers: int | None = None, **settings) -> list[State]:
    if workers is not None:
        settings["workers"] = workers
    with PoolRuntime(table, EngineSettings(engine=EngineName.POOL, **settings)) as rt:
        return rt.solve(expr, st, n)
