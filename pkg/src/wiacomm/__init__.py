"""Authenticated device-control gateway over a simulated LoRa link."""

from .auth import Allowlist, AuthEngine
from .link import LinkConfig, Medium
from .model import Action, Command, DeviceId, MacAddress, ack_code, decode_command, encode_command
from .node import AppNode, DeviceBank
from .runtime import System, build_system

__version__ = "0.1.0"

__all__ = [
    "Action",
    "Allowlist",
    "AppNode",
    "AuthEngine",
    "Command",
    "DeviceBank",
    "DeviceId",
    "LinkConfig",
    "MacAddress",
    "Medium",
    "System",
    "ack_code",
    "build_system",
    "decode_command",
    "encode_command",
    "__version__",
]
