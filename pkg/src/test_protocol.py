from __future__ import annotations

import logging

import pytest  # type: ignore

from src import avl
from src.exceptions import ProtocolError
from src.protocol import MEANINGS, Direction, Mailbox, Message, ProtocolRecorder, StreamHandle, Tag, trace
from src.terms import State


def request(sender):
    return Message(Tag.REQUEST, sender=sender, src=sender)


class TestMessage:
    def test_eight_tags(self):
        assert len(Tag) == 8
        assert set(MEANINGS) == set(Tag)

    def test_state_payload_required(self):
        with pytest.raises(ProtocolError):
            Message(Tag.STATE)

    def test_forward_needs_handle(self):
        with pytest.raises(ProtocolError):
            Message(Tag.FORWARD)

    def test_request_needs_sender(self):
        with pytest.raises(ProtocolError):
            Message(Tag.REQUEST)

    def test_close_takes_nothing(self):
        with pytest.raises(ProtocolError):
            Message(Tag.CLOSE, st=State())

    def test_forward_with_state(self):
        msg = Message(Tag.FORWARD_WITH_STATE, st=State(), fwd=StreamHandle(1))
        assert msg.fwd.id == 1
        assert not msg.is_done


class TestMailbox:
    def test_request_box_holds_one(self):
        """
        Test that a second request to a busy node is a protocol error.
        """
        handle = StreamHandle(0)
        handle.request_box.push(request(StreamHandle(1)))
        with pytest.raises(ProtocolError):
            handle.request_box.push(request(StreamHandle(1)))

    def test_inbox_is_fifo(self):
        box = Mailbox(capacity=None)
        box.push(Message(Tag.CLOSE, src=StreamHandle(1)))
        box.push(Message(Tag.DELAY, src=StreamHandle(2)))
        assert box.pop().tag is Tag.CLOSE
        assert box.pop().tag is Tag.DELAY
        assert box.pop() is None


    def test_waiting_for_results_takes_done(self):
        """
        Test that a node waiting for replies sees a Done from its parent.
        """
        handle = StreamHandle(0)
        handle.request_box.push(Message(Tag.DONE, src=StreamHandle(1)))
        assert handle.take(Direction.RESULT).is_done
        assert len(handle.request_box) == 0

    def test_replies_come_before_done(self):
        handle = StreamHandle(0)
        handle.request_box.push(Message(Tag.DONE, src=StreamHandle(1)))
        handle.inbox.push(Message(Tag.CLOSE, src=StreamHandle(2)))
        assert handle.take(Direction.RESULT).tag is Tag.CLOSE
        assert handle.take(Direction.RESULT).is_done
        assert handle.take(Direction.RESULT) is None

    def test_request_is_not_taken_as_result(self):
        handle = StreamHandle(0)
        handle.request_box.push(request(StreamHandle(1)))
        assert handle.take(Direction.RESULT) is None
        assert handle.take(Direction.REQUEST).tag is Tag.REQUEST

class TestRecorder:
    def test_clean_exchange(self):
        parent, child = StreamHandle(0), StreamHandle(1)
        recorder = ProtocolRecorder(State())
        recorder.observe(0, parent, child, request(parent))
        recorder.observe(1, child, parent, Message(Tag.STATE, st=State(), src=child))
        recorder.observe(2, parent, child, request(parent))
        recorder.observe(3, child, parent, Message(Tag.CLOSE, src=child))
        assert recorder.violations == []
        assert recorder.sources() == {1}
        assert [e.tag for e in recorder.events_from(1)] == [Tag.STATE, Tag.CLOSE]

    def test_double_request(self):
        parent, child = StreamHandle(0), StreamHandle(1)
        recorder = ProtocolRecorder()
        recorder.observe(0, parent, child, request(parent))
        recorder.observe(1, parent, child, request(parent))
        assert len(recorder.violations) == 1

    def test_unrequested_reply(self):
        parent, child = StreamHandle(0), StreamHandle(1)
        recorder = ProtocolRecorder()
        recorder.observe(0, child, parent, Message(Tag.DELAY, src=child))
        assert recorder.violations

    def test_reply_after_terminal(self):
        """
        Test that a forwarded node may not answer again.
        """
        parent, child, other = StreamHandle(0), StreamHandle(1), StreamHandle(2)
        recorder = ProtocolRecorder()
        recorder.observe(0, parent, child, request(parent))
        recorder.observe(1, child, parent, Message(Tag.FORWARD, fwd=other, src=child))
        recorder.observe(2, parent, child, request(parent))
        recorder.observe(3, child, parent, Message(Tag.CLOSE, src=child))
        assert any("finished" in v for v in recorder.violations)

    def test_request_after_done(self):
        parent, child = StreamHandle(0), StreamHandle(1)
        recorder = ProtocolRecorder()
        recorder.observe(0, parent, child, Message(Tag.DONE, src=parent))
        recorder.observe(1, parent, child, request(parent))
        assert any("after Done" in v for v in recorder.violations)

    def test_done_while_reply_owed(self):
        """
        Test that a parent may give up on a request; the reply still owed
        afterwards is fine, a second one is not.
        """
        parent, child = StreamHandle(0), StreamHandle(1)
        recorder = ProtocolRecorder()
        recorder.observe(0, parent, child, request(parent))
        recorder.observe(1, parent, child, Message(Tag.DONE, src=parent))
        recorder.observe(2, child, parent, Message(Tag.CLOSE, src=child))
        assert recorder.violations == []
        recorder.observe(3, child, parent, Message(Tag.CLOSE, src=child))
        assert recorder.violations

    def test_state_must_extend_root(self):
        root = State(avl.insert(avl.EMPTY, 0, 5), 1)
        other = State(avl.insert(avl.EMPTY, 0, 6), 1)
        parent, child = StreamHandle(0), StreamHandle(1)
        recorder = ProtocolRecorder(root)
        recorder.observe(0, parent, child, request(parent))
        recorder.observe(1, child, parent, Message(Tag.STATE_AND_CLOSE, st=other, src=child))
        assert any("extend" in v for v in recorder.violations)


class TestTrace:
    def test_trace_line(self, caplog):
        with caplog.at_level(logging.DEBUG, logger="src.protocol.trace"):
            trace(7, StreamHandle(1), StreamHandle(2), Tag.FORWARD_WITH_STATE)
        assert caplog.messages == ["7 1 -> 2 ForwardWithState"]
