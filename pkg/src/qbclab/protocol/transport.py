"""Ideal ordered channels between the two endpoints.

``queue_transport`` passes message objects in-process (optionally through the
codec); ``socket_transport`` speaks wire frames over a connected socket pair.
"""
from __future__ import annotations

import socket
from collections import deque

from ..errors import DecodeError, ProtocolOrderError
from .codec import HEADER, decode, encode, read_header


class QueueEndpoint:
    def __init__(self, outbox: deque, inbox: deque, wire: bool):
        self._out = outbox
        self._in = inbox
        self._wire = wire

    def send(self, msg) -> None:
        self._out.append(encode(msg) if self._wire else msg)

    def recv(self):
        if not self._in:
            raise ProtocolOrderError("expected a message but the channel is empty")
        item = self._in.popleft()
        return decode(item) if self._wire else item

    def pending(self) -> int:
        return len(self._in)

    def close(self) -> None:
        pass


def queue_transport(wire: bool = False) -> tuple[QueueEndpoint, QueueEndpoint]:
    """(alice_end, bob_end); with ``wire=True`` every message is encoded and decoded."""
    a_to_b, b_to_a = deque(), deque()
    return QueueEndpoint(a_to_b, b_to_a, wire), QueueEndpoint(b_to_a, a_to_b, wire)


class SocketEndpoint:
    def __init__(self, sock: socket.socket):
        self.sock = sock

    def send(self, msg) -> None:
        self.sock.sendall(encode(msg))

    def _read_exact(self, n: int) -> bytes:
        buf = bytearray()
        while len(buf) < n:
            chunk = self.sock.recv(n - len(buf))
            if not chunk:
                raise DecodeError(f"stream closed after {len(buf)} of {n} bytes")
            buf += chunk
        return bytes(buf)

    def recv(self):
        header = self._read_exact(HEADER.size)
        _, length = read_header(header)
        return decode(header + self._read_exact(length))

    def pending(self) -> int:
        self.sock.setblocking(False)
        try:
            return len(self.sock.recv(1 << 16, socket.MSG_PEEK))
        except BlockingIOError:
            return 0
        finally:
            self.sock.setblocking(True)

    def close(self) -> None:
        self.sock.close()


def socket_transport() -> tuple[SocketEndpoint, SocketEndpoint]:
    a, b = socket.socketpair()
    return SocketEndpoint(a), SocketEndpoint(b)
