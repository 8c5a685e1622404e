"""Shared domain vocabulary: MAC addresses, devices, commands and ack codes.

Everything here is an immutable value with a bit-exact textual encoding.
These encodings are the contract shared by the wire protocol, the
allowlist file, the audit log and the control API.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum, IntEnum


class MalformedMac(ValueError):
    """Input text is not a valid EUI-48 address."""


class UnknownCommand(ValueError):
    """Token is not one of the six known command tokens."""


_HEX_PAIR = re.compile(r"[0-9A-Fa-f]{2}$")


@dataclass(frozen=True, order=True)
class MacAddress:
    """48-bit hardware identifier, most significant octet first."""

    octets: bytes

    def __post_init__(self):
        if not isinstance(self.octets, bytes) or len(self.octets) != 6:
            raise MalformedMac("a MAC address is exactly 6 octets")

    @classmethod
    def parse(cls, text: str) -> "MacAddress":
        """Parse six hex pairs separated by ':' or '-', any letter case."""
        parts = re.split(r"[:-]", text.strip())
        if len(parts) != 6:
            raise MalformedMac(f"expected 6 groups, got {len(parts)}: {text!r}")
        for part in parts:
            if not _HEX_PAIR.match(part):
                raise MalformedMac(f"bad hex group {part!r} in {text!r}")
        return cls(bytes(int(part, 16) for part in parts))

    def __str__(self) -> str:
        return ":".join(f"{b:02X}" for b in self.octets)


def parse_mac(text: str) -> MacAddress:
    """Parse a textual MAC; raises MalformedMac on anything non-canonicalizable."""
    return MacAddress.parse(text)


def format_mac(mac: MacAddress) -> str:
    """Canonical 17-character uppercase colon-separated form."""
    return str(mac)


class DeviceId(Enum):
    """The three controllable devices with their fixed wire/display encodings."""

    LED1 = ("led1", 1, "LED1")
    LED2 = ("led2", 2, "LED2")
    MOTOR = ("motor", 3, "MOTOR")

    def __init__(self, wire_name: str, index: int, display_name: str):
        self.wire_name = wire_name
        self.index = index
        self.display_name = display_name


class Action(IntEnum):
    OFF = 0
    ON = 1

    @property
    def token(self) -> str:
        return "on" if self else "off"


@dataclass(frozen=True)
class Command:
    """An on/off instruction for one named device."""

    device: DeviceId
    action: Action


# AckCode is a plain int in 10..39: tens digit names the device, units the action.
AckCode = int

COMMANDS: tuple[Command, ...] = tuple(
    Command(device, action) for device in DeviceId for action in (Action.ON, Action.OFF)
)


def encode_command(cmd: Command) -> str:
    """Wire token for a command, e.g. "led1_on"."""
    return f"{cmd.device.wire_name}_{cmd.action.token}"


_TOKEN_TABLE = {encode_command(cmd): cmd for cmd in COMMANDS}


def decode_command(token: str) -> Command:
    """Exact inverse of encode_command over the six-token vocabulary."""
    try:
        return _TOKEN_TABLE[token]
    except KeyError:
        raise UnknownCommand(f"unknown command token {token!r}") from None


def ack_code(cmd: Command) -> AckCode:
    """Two-digit acknowledgment code: device index * 10 + action bit."""
    return cmd.device.index * 10 + int(cmd.action)
