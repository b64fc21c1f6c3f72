"""Messages, stream handles and mailboxes spoken by the concurrent engines.

Every stream node owns a handle with two mailboxes: ``request_box`` receives
Request/Done from whoever currently plays parent, ``inbox`` receives replies
from the children the node has asked for results. A Done can arrive while
the node is still serving a request; see ``StreamHandle.take``.
"""
from __future__ import annotations

import logging
import threading
from collections import defaultdict, deque
from dataclasses import dataclass
from enum import Enum

from src import avl
from src.exceptions import ProtocolError
from src.terms import State

trace_logger = logging.getLogger("src.protocol.trace")


class Tag(Enum):
    REQUEST = "Request"
    DONE = "Done"
    STATE = "State"
    STATE_AND_CLOSE = "StateAndClose"
    CLOSE = "Close"
    FORWARD = "Forward"
    FORWARD_WITH_STATE = "ForwardWithState"
    DELAY = "Delay"

    def __str__(self) -> str:
        return self.value


MEANINGS = {
    Tag.REQUEST: "Request a result",
    Tag.DONE: "Signal no more request will be coming",
    Tag.STATE: "Result found, more might be available",
    Tag.STATE_AND_CLOSE: "Result found, no more available",
    Tag.CLOSE: "No result, no more available",
    Tag.FORWARD: "Result may be found on other stream",
    Tag.FORWARD_WITH_STATE: "Result found, further results on other stream",
    Tag.DELAY: "Immature stream",
}

REQUEST_TAGS = frozenset({Tag.REQUEST, Tag.DONE})
# a node sends nothing after one of these
TERMINAL_TAGS = frozenset(
    {Tag.STATE_AND_CLOSE, Tag.CLOSE, Tag.FORWARD, Tag.FORWARD_WITH_STATE}
)
_WITH_STATE = frozenset({Tag.STATE, Tag.STATE_AND_CLOSE, Tag.FORWARD_WITH_STATE})
_WITH_FORWARD = frozenset({Tag.FORWARD, Tag.FORWARD_WITH_STATE})


class Direction(Enum):
    REQUEST = "request"
    RESULT = "result"


@dataclass(frozen=True, slots=True)
class Message:
    tag: Tag
    st: State | None = None
    fwd: StreamHandle | None = None
    sender: StreamHandle | None = None
    src: StreamHandle | None = None

    def __post_init__(self):
        if (self.st is not None) != (self.tag in _WITH_STATE):
            raise ProtocolError(f"{self.tag} message with wrong state payload")
        if (self.fwd is not None) != (self.tag in _WITH_FORWARD):
            raise ProtocolError(f"{self.tag} message with wrong forward payload")
        if (self.sender is not None) != (self.tag is Tag.REQUEST):
            raise ProtocolError(f"{self.tag} message with wrong sender")

    @property
    def is_done(self) -> bool:
        return self.tag is Tag.DONE

    def __repr__(self) -> str:
        extra = []
        if self.fwd is not None:
            extra.append(f"fwd={self.fwd.id}")
        if self.st is not None:
            extra.append(repr(self.st))
        return f"Message({self.tag}{', ' if extra else ''}{', '.join(extra)})"


class Mailbox:
    """FIFO of messages; ``capacity`` None means one slot per outstanding request.

    Synchronisation is the engine's business: the actor engine guards each
    handle with its own condition, the pool engine with the pool lock.
    """

    __slots__ = ("capacity", "_items")

    def __init__(self, capacity: int | None = 1):
        self.capacity = capacity
        self._items: deque[Message] = deque()

    def push(self, msg: Message) -> None:
        if self.capacity is not None and len(self._items) >= self.capacity:
            raise ProtocolError(f"mailbox full, cannot deliver {msg.tag}")
        self._items.append(msg)

    def pop(self) -> Message | None:
        return self._items.popleft() if self._items else None

    def peek(self) -> Message | None:
        return self._items[0] if self._items else None

    def __len__(self) -> int:
        return len(self._items)


class StreamHandle:
    __slots__ = ("id", "request_box", "inbox", "done_sent", "__weakref__")

    def __init__(self, id: int):
        self.id = id
        self.request_box = Mailbox(capacity=1)
        self.inbox = Mailbox(capacity=None)
        self.done_sent = False

    def box(self, direction: Direction) -> Mailbox:
        return self.request_box if direction is Direction.REQUEST else self.inbox

    def take(self, direction: Direction) -> Message | None:
        """Next message for a node reading ``direction``, or None.

        A node waiting for results also takes a Done, which cancels the
        request it is serving.
        """
        if direction is Direction.REQUEST:
            return self.request_box.pop()
        msg = self.inbox.pop()
        if msg is None:
            waiting = self.request_box.peek()
            if waiting is not None and waiting.is_done:
                msg = self.request_box.pop()
        return msg

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(id={self.id})"


@dataclass(frozen=True, slots=True)
class TraceEvent:
    tick: int
    src: int | None
    dst: int
    tag: Tag


class ProtocolRecorder:
    """Records every message and checks the request/reply discipline.

    - per (requester, responder) pair, a Request is followed by exactly one
      reply before the next Request;
    - a handle sends no result after a terminal one (Close, StateAndClose,
      Forward, ForwardWithState), so a forwarded node leaves the message path;
    - nothing is requested from a handle after it was sent Done. A Done may
      reach a handle that still owes a reply; the reply is still expected;
    - every carried state extends the query's root state.
    """

    def __init__(self, root: State | None = None):
        self.root = root
        self.events: list[TraceEvent] = []
        self.violations: list[str] = []
        self._pending: dict[tuple[int, int], bool] = defaultdict(bool)
        self._finished: set[int] = set()
        self._done: set[int] = set()
        self._lock = threading.Lock()

    def observe(self, tick: int, src: StreamHandle | None, dst: StreamHandle, msg: Message) -> None:
        with self._lock:
            self.events.append(TraceEvent(tick, None if src is None else src.id, dst.id, msg.tag))
            if msg.tag is Tag.REQUEST:
                key = (msg.sender.id, dst.id)
                if dst.id in self._done:
                    self.violations.append(f"{tick}: request to {dst.id} after Done")
                if self._pending[key]:
                    self.violations.append(f"{tick}: second request {key} without reply")
                self._pending[key] = True
            elif msg.tag is Tag.DONE:
                self._done.add(dst.id)
            else:
                key = (dst.id, src.id)
                if not self._pending[key]:
                    self.violations.append(f"{tick}: unrequested {msg.tag} {src.id} -> {dst.id}")
                self._pending[key] = False
                if src.id in self._finished:
                    self.violations.append(f"{tick}: {msg.tag} from finished handle {src.id}")
                if msg.tag in TERMINAL_TAGS:
                    self._finished.add(src.id)
                if msg.st is not None and self.root is not None and not _extends(msg.st, self.root):
                    self.violations.append(f"{tick}: state does not extend the root state")

    def sources(self) -> set[int]:
        return {e.src for e in self.events if e.src is not None and e.tag not in REQUEST_TAGS}

    def events_from(self, handle_id: int) -> list[TraceEvent]:
        return [e for e in self.events if e.src == handle_id]


def _extends(st: State, root: State) -> bool:
    if st.counter < root.counter:
        return False
    return all(avl.lookup(st.subst, k) == v for k, v in avl.items(root.subst))


def trace(tick: int, src: StreamHandle | None, dst: StreamHandle, tag: Tag) -> None:
    trace_logger.debug("%d %s -> %d %s", tick, "-" if src is None else src.id, dst.id, tag)
