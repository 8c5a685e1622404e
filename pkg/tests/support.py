"""Shared test helpers: independent oracles and harnesses.

The oracles here deliberately do not reuse the implementation paths they
check: the CRC is a bit-by-bit shift register, the auth reference is a plain
dict simulation, and the lossless-ack transport isolates the command leg of
the ARQ exchange.
"""

from __future__ import annotations

import random

from wiacomm.auth import AuthEngine, Denied, DeniedLocked, Granted
from wiacomm.link import Delivered, Medium
from wiacomm.model import MacAddress


def crc16_oracle(data: bytes) -> int:
    """Bit-by-bit CRC-16/CCITT-FALSE shift register."""
    crc = 0xFFFF
    for byte in data:
        for bit in range(8):
            msb = (crc >> 15) & 1
            inbit = (byte >> (7 - bit)) & 1
            crc = (crc << 1) & 0xFFFF
            if msb ^ inbit:
                crc ^= 0x1021
    return crc


class LossyCommandLeg:
    """ARQ transport with the command leg on a real medium and a lossless ack leg.

    The responder sees exactly the delivered command bytes; its reply (if
    any) is handed back out-of-band, so only command-frame losses matter.
    """

    def __init__(self, medium: Medium, responder):
        self.medium = medium
        self._responder = responder
        self._reply = None

    def exchange(self, wire: bytes, timeout_ms: float) -> bytes | None:
        self._reply = None
        t0 = max(self.medium.now_ms, self.medium.free_at)
        outcome = self.medium.transmit(wire, t0, self._deliver)
        if isinstance(outcome, Delivered):
            self.medium.advance(outcome.at)
        else:
            self.medium.advance(t0 + timeout_ms)
        return self._reply

    def _deliver(self, data: bytes, at: float) -> None:
        self._reply = self._responder(data)


def reference_auth_run(schedule, allowlist, lock_seconds):
    """Hand simulation of the attempt ledger.

    schedule: list of (now, mac). Returns (decisions, alert_indices) where a
    decision is ("granted", None) | ("denied", failures) | ("locked", until).
    """
    fails: dict[MacAddress, int] = {}
    locked_until: dict[MacAddress, float] = {}
    decisions = []
    alerts = []
    for i, (now, mac) in enumerate(schedule):
        lu = locked_until.get(mac)
        if lu is not None:
            if now < lu:
                decisions.append(("locked", lu))
                continue
            del locked_until[mac]
            fails[mac] = 0
        if mac in allowlist:
            fails[mac] = 0
            decisions.append(("granted", None))
            continue
        fails[mac] = fails.get(mac, 0) + 1
        if fails[mac] == 3:
            alerts.append(i)
            locked_until[mac] = now + lock_seconds
        decisions.append(("denied", fails[mac]))
    return decisions, alerts


def engine_auth_run(schedule, allowlist, lock_seconds):
    """Run a fresh AuthEngine over the schedule in reference_auth_run's shape."""
    engine = AuthEngine(lock_duration=lock_seconds)
    decisions = []
    alerts = []
    for i, (now, mac) in enumerate(schedule):
        decision = engine.authenticate(mac, allowlist, now)
        if isinstance(decision, Granted):
            decisions.append(("granted", None))
        elif isinstance(decision, DeniedLocked):
            decisions.append(("locked", decision.locked_until))
        else:
            assert isinstance(decision, Denied)
            decisions.append(("denied", decision.failures_so_far))
            if decision.alert is not None:
                alerts.append(i)
    return decisions, alerts


def random_mac(rng: random.Random) -> MacAddress:
    return MacAddress(bytes(rng.randrange(256) for _ in range(6)))


def random_schedule(rng: random.Random, macs, lock_seconds, length):
    """Attempt schedule with time steps that sometimes cross lock expiry."""
    now = 0.0
    steps = (0.2, 1.0, 5.0, lock_seconds / 3.0, lock_seconds + 1.0)
    schedule = []
    for _ in range(length):
        now += rng.choice(steps)
        schedule.append((now, rng.choice(macs)))
    return schedule


class FakeClock:
    """Injected wall-clock stand-in for deterministic sessions and audit stamps."""

    def __init__(self, start: float = 1_700_000_000.0):
        self.now = start

    def __call__(self) -> float:
        return self.now

    def tick(self, seconds: float = 1.0) -> None:
        self.now += seconds
