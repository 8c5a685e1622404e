"""Bit-exact frame codec with CRC-16 integrity and stop-and-wait retransmission.

Wire layout, big-endian throughout::

    [version=0x01][kind][seq][len][payload ...][crc_hi][crc_lo]

``kind`` is 0x01 for a command frame (payload: ASCII command token) and 0x02
for an ack frame (payload: ASCII decimal ack code). The trailing CRC-16 is
CCITT-FALSE (poly 0x1021, init 0xFFFF, no reflection, no final xor) over
every byte before it; its check value over ASCII "123456789" is 0x29B1.

Corruption always surfaces as a typed decode error: the CRC is verified
before the version and kind fields are interpreted, so a damaged frame can
never decode as a different valid frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Protocol

from .link import LinkConfig, airtime_ms
from .model import Command, encode_command

FRAME_VERSION = 0x01
KIND_CMD = 0x01
KIND_ACK = 0x02
MAX_PAYLOAD = 48
HEADER_LEN = 4
CRC_LEN = 2
MIN_FRAME = HEADER_LEN + CRC_LEN

DEFAULT_MAX_RETRIES = 3


class FrameError(ValueError):
    """Base class for frame decode failures."""


class Truncated(FrameError):
    """Fewer than 6 bytes, or the length field disagrees with the frame size."""


class BadVersion(FrameError):
    """CRC-valid frame with an unsupported version byte."""


class BadKind(FrameError):
    """CRC-valid frame with an unknown kind byte."""


class BadCrc(FrameError):
    """Checksum mismatch: corruption, not a protocol error."""


class PayloadTooLong(ValueError):
    """Payload exceeds the 48-byte frame limit."""


def _build_crc_table() -> tuple[int, ...]:
    table = []
    for byte in range(256):
        crc = byte << 8
        for _ in range(8):
            crc = ((crc << 1) ^ 0x1021) if crc & 0x8000 else (crc << 1)
            crc &= 0xFFFF
        table.append(crc)
    return tuple(table)


_CRC_TABLE = _build_crc_table()


def crc16(data: bytes) -> int:
    """CRC-16/CCITT-FALSE."""
    crc = 0xFFFF
    for b in data:
        crc = ((crc << 8) & 0xFFFF) ^ _CRC_TABLE[((crc >> 8) ^ b) & 0xFF]
    return crc


@dataclass(frozen=True)
class Frame:
    kind: int
    seq: int
    payload: bytes
    version: int = FRAME_VERSION


def encode_frame(frame: Frame) -> bytes:
    if len(frame.payload) > MAX_PAYLOAD:
        raise PayloadTooLong(f"{len(frame.payload)} bytes exceeds {MAX_PAYLOAD}")
    if not 0 <= frame.seq <= 0xFF:
        raise ValueError(f"seq must be a byte, got {frame.seq}")
    if frame.kind not in (KIND_CMD, KIND_ACK):
        raise ValueError(f"invalid frame kind {frame.kind:#x}")
    body = bytes((frame.version, frame.kind, frame.seq, len(frame.payload))) + frame.payload
    crc = crc16(body)
    return body + bytes(((crc >> 8) & 0xFF, crc & 0xFF))


def decode_frame(data: bytes) -> Frame:
    """Exact inverse of encode_frame on valid encodings; typed errors otherwise."""
    if len(data) < MIN_FRAME:
        raise Truncated(f"{len(data)} bytes is below the 6-byte minimum")
    if len(data) != MIN_FRAME + data[3]:
        raise Truncated(f"length field {data[3]} inconsistent with {len(data)}-byte frame")
    crc = (data[-2] << 8) | data[-1]
    if crc16(data[:-2]) != crc:
        raise BadCrc("checksum mismatch")
    if data[0] != FRAME_VERSION:
        raise BadVersion(f"unsupported version {data[0]:#04x}")
    if data[1] not in (KIND_CMD, KIND_ACK):
        raise BadKind(f"unknown kind {data[1]:#04x}")
    return Frame(kind=data[1], seq=data[2], payload=bytes(data[4:-2]))


@dataclass(frozen=True)
class ArqPolicy:
    ack_timeout_ms: float
    max_retries: int = DEFAULT_MAX_RETRIES

    def __post_init__(self):
        if self.ack_timeout_ms <= 0:
            raise ValueError("ack_timeout_ms must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be non-negative")

    @classmethod
    def for_link(cls, cfg: LinkConfig, max_retries: int = DEFAULT_MAX_RETRIES) -> "ArqPolicy":
        """Timeout covering a maximum-size frame each way, rounded up to whole ms."""
        worst = airtime_ms(cfg.max_payload_bytes, cfg)
        return cls(ack_timeout_ms=float(math.ceil(2 * worst + cfg.propagation_delay_ms)),
                   max_retries=max_retries)


@dataclass(frozen=True)
class Acked:
    code: int
    attempts: int


@dataclass(frozen=True)
class Failed:
    attempts: int


AckResult = Acked | Failed


class Transport(Protocol):
    """One blocking request/reply exchange; None means no reply before the timeout."""

    def exchange(self, wire: bytes, timeout_ms: float) -> bytes | None: ...


def arq_send(cmd: Command, seq: int, link: Transport, policy: ArqPolicy) -> AckResult:
    """Send one command with stop-and-wait retransmission.

    The same seq is re-sent after every timeout so the receiver can
    deduplicate; a reply only counts if it is a CRC-valid ACK frame carrying
    that seq. The attempts count includes the first transmission.
    """
    wire = encode_frame(Frame(kind=KIND_CMD, seq=seq, payload=encode_command(cmd).encode("ascii")))
    attempts = 1 + policy.max_retries
    for attempt in range(1, attempts + 1):
        reply = link.exchange(wire, policy.ack_timeout_ms)
        if reply is None:
            continue
        try:
            frame = decode_frame(reply)
            code = int(frame.payload.decode("ascii"))
        except (FrameError, UnicodeDecodeError, ValueError):
            continue  # corrupted reply counts as a timeout
        if frame.kind == KIND_ACK and frame.seq == seq:
            return Acked(code=code, attempts=attempt)
    return Failed(attempts=attempts)


class ReceiveAction(Enum):
    EXECUTE = "execute"
    DUPLICATE_REACK = "duplicate_reack"


def dedup_receive(frame: Frame, last_seq_executed: int | None) -> ReceiveAction:
    """Receiver-side duplicate filter for stop-and-wait.

    A repeat of the last executed seq means our ack was lost: re-ack it
    without executing again.
    """
    if last_seq_executed is not None and frame.seq == last_seq_executed:
        return ReceiveAction.DUPLICATE_REACK
    return ReceiveAction.EXECUTE
