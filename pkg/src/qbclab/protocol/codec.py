"""Bit-exact wire frames.

Frame: ``b"QBC1" | version u8 (0x01) | tag u8 | payload length u32 LE | payload``.
All integers are little-endian; amplitudes are IEEE-754 doubles (re, im).
"""
from __future__ import annotations

import math
import struct

from ..errors import DecodeError, ParameterError
from .messages import CommitRegister, Message, QuantumPayload, UnveilOpen, Verdict

MAGIC = b"QBC1"
VERSION = 0x01
TAG_COMMIT = 0x01
TAG_UNVEIL = 0x02
TAG_VERDICT = 0x03

HEADER = struct.Struct("<4sBBI")
_COMMIT_HEAD = struct.Struct("<IQI")
_ENTRY = struct.Struct("<Qdd")
_UNVEIL_HEAD = struct.Struct("<BI")
_VERDICT = struct.Struct("<BBI")


def encode(msg: Message) -> bytes:
    if isinstance(msg, CommitRegister):
        reg = msg.register
        parts = [_COMMIT_HEAD.pack(msg.j, reg.dim, len(reg.entries))]
        for idx, amp in reg.entries:
            if not (math.isfinite(amp.real) and math.isfinite(amp.imag)):
                raise ValueError("non-finite amplitude")
            parts.append(_ENTRY.pack(idx, amp.real, amp.imag))
        tag, payload = TAG_COMMIT, b"".join(parts)
    elif isinstance(msg, UnveilOpen):
        tag = TAG_UNVEIL
        payload = _UNVEIL_HEAD.pack(msg.b, len(msg.indices)) + struct.pack(
            f"<{len(msg.indices)}Q", *msg.indices
        )
    elif isinstance(msg, Verdict):
        tag = TAG_VERDICT
        has = msg.first_failure is not None
        payload = _VERDICT.pack(int(msg.accept), int(has), msg.first_failure if has else 0)
    else:
        raise TypeError(f"cannot encode {type(msg).__name__}")
    return HEADER.pack(MAGIC, VERSION, tag, len(payload)) + payload


def read_header(header: bytes) -> tuple[int, int]:
    """Validate a frame header; returns (tag, payload length)."""
    if len(header) < HEADER.size:
        raise DecodeError(f"truncated header ({len(header)} bytes)")
    magic, version, tag, length = HEADER.unpack_from(header)
    if magic != MAGIC:
        raise DecodeError(f"bad magic {magic!r}")
    if version != VERSION:
        raise DecodeError(f"unsupported version {version:#04x}")
    if tag not in (TAG_COMMIT, TAG_UNVEIL, TAG_VERDICT):
        raise DecodeError(f"unknown message tag {tag:#04x}")
    return tag, length


def _bool(byte: int, what: str) -> bool:
    if byte not in (0, 1):
        raise DecodeError(f"{what} byte must be 0 or 1, got {byte}")
    return bool(byte)


def decode(frame: bytes) -> Message:
    tag, length = read_header(frame)
    payload = frame[HEADER.size:]
    if len(payload) != length:
        raise DecodeError(f"payload length {len(payload)} != declared {length}")
    try:
        return _decode_payload(tag, payload)
    except struct.error as exc:
        raise DecodeError(f"malformed payload: {exc}") from None
    except ParameterError as exc:
        raise DecodeError(str(exc)) from None


def _decode_payload(tag: int, payload: bytes) -> Message:
    if tag == TAG_COMMIT:
        j, dim, count = _COMMIT_HEAD.unpack_from(payload)
        expected = _COMMIT_HEAD.size + count * _ENTRY.size
        if len(payload) != expected:
            raise DecodeError(f"commit payload is {len(payload)} bytes, expected {expected}")
        entries = []
        for k in range(count):
            idx, re, im = _ENTRY.unpack_from(payload, _COMMIT_HEAD.size + k * _ENTRY.size)
            if not (math.isfinite(re) and math.isfinite(im)):
                raise DecodeError("non-finite amplitude")
            entries.append((idx, complex(re, im)))
        return CommitRegister(j, QuantumPayload(dim, tuple(entries)))
    if tag == TAG_UNVEIL:
        b, s = _UNVEIL_HEAD.unpack_from(payload)
        expected = _UNVEIL_HEAD.size + 8 * s
        if len(payload) != expected:
            raise DecodeError(f"unveil payload is {len(payload)} bytes, expected {expected}")
        indices = struct.unpack_from(f"<{s}Q", payload, _UNVEIL_HEAD.size)
        return UnveilOpen(b, indices)
    if len(payload) != _VERDICT.size:
        raise DecodeError(f"verdict payload is {len(payload)} bytes, expected {_VERDICT.size}")
    accept, has, idx = _VERDICT.unpack(payload)
    return Verdict(_bool(accept, "accept"), idx if _bool(has, "has_failure") else None)
