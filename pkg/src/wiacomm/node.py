"""Receiver/application side: command frames in, device changes and ack frames out.

Every executed command appends exactly two receiver log lines: the device
echo ("LED1 1") followed by the ack code ("11").
"""

from __future__ import annotations

from dataclasses import dataclass

from .logs import LineLog
from .model import Action, Command, DeviceId, UnknownCommand, ack_code, decode_command
from .protocol import (
    KIND_ACK,
    KIND_CMD,
    Frame,
    FrameError,
    ReceiveAction,
    decode_frame,
    dedup_receive,
    encode_frame,
)

RECEIVER_LOG_LINES = 1000


@dataclass
class DeviceBank:
    """On/off state of the three end devices; everything starts Off."""

    led1: Action = Action.OFF
    led2: Action = Action.OFF
    motor: Action = Action.OFF

    def get(self, device: DeviceId) -> Action:
        return getattr(self, device.wire_name)

    def set(self, device: DeviceId, action: Action) -> None:
        setattr(self, device.wire_name, action)


def execute(cmd: Command, bank: DeviceBank, log: LineLog) -> int:
    """Apply one command (idempotent set), log the two lines, return the ack code."""
    bank.set(cmd.device, cmd.action)
    code = ack_code(cmd)
    log.append(f"{cmd.device.display_name} {int(cmd.action)}")
    log.append(str(code))
    return code


def query_states(bank: DeviceBank) -> dict[DeviceId, int]:
    """Snapshot of all three devices as state bits."""
    return {device: int(bank.get(device)) for device in DeviceId}


class AppNode:
    """One application node owning the device bank and the receive path."""

    def __init__(self, log: LineLog | None = None):
        self.bank = DeviceBank()
        self.log = log if log is not None else LineLog(maxlen=RECEIVER_LOG_LINES)
        self.executions = 0
        self._last_seq: int | None = None
        self._last_ack: bytes | None = None

    def on_frame(self, data: bytes) -> bytes | None:
        """Handle one delivered frame; return ack wire bytes, or None to stay silent.

        Corrupt or unintelligible frames are dropped without a reply — on a
        radio link, silence is what triggers the sender's retry. A duplicate
        of the last executed seq re-emits the previous ack without executing.
        """
        try:
            frame = decode_frame(data)
        except FrameError:
            return None
        if frame.kind != KIND_CMD:
            return None
        if dedup_receive(frame, self._last_seq) is ReceiveAction.DUPLICATE_REACK:
            return self._last_ack
        try:
            cmd = decode_command(frame.payload.decode("ascii"))
        except (UnicodeDecodeError, UnknownCommand):
            return None
        code = execute(cmd, self.bank, self.log)
        self.executions += 1
        ack = encode_frame(Frame(kind=KIND_ACK, seq=frame.seq, payload=str(code).encode("ascii")))
        self._last_seq = frame.seq
        self._last_ack = ack
        return ack
