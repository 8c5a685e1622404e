"""Half-duplex point-to-point radio medium with seeded loss and an affine airtime model.

Time is a simulated millisecond clock owned by whoever drives the medium;
nothing here reads wall-clock time. A single ``random.Random(seed)`` stream
decides frame loss — exactly one draw per non-rejected transmit — so a given
(seed, call sequence) replays bit-for-bit.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable

DEFAULT_BITRATE_BPS = 5470
DEFAULT_PREAMBLE_MS = 25.0
DEFAULT_MAX_PAYLOAD_BYTES = 48


class ClockRegression(ValueError):
    """advance() was asked to move simulated time backwards."""


@dataclass(frozen=True)
class LinkConfig:
    loss_probability: float = 0.0
    propagation_delay_ms: float = 0.5
    bitrate_bps: int = DEFAULT_BITRATE_BPS
    preamble_overhead_ms: float = DEFAULT_PREAMBLE_MS
    max_payload_bytes: int = DEFAULT_MAX_PAYLOAD_BYTES
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.loss_probability <= 1.0:
            raise ValueError(f"loss_probability must be within [0, 1], got {self.loss_probability}")
        if self.propagation_delay_ms < 0:
            raise ValueError("propagation_delay_ms must be non-negative")
        if self.bitrate_bps <= 0:
            raise ValueError("bitrate_bps must be positive")
        if self.preamble_overhead_ms < 0:
            raise ValueError("preamble_overhead_ms must be non-negative")
        if self.max_payload_bytes < 1:
            raise ValueError("max_payload_bytes must be positive")


@dataclass(frozen=True)
class Delivered:
    at: float


@dataclass(frozen=True)
class Lost:
    pass


@dataclass(frozen=True)
class Rejected:
    reason: str  # "busy" or "too_long"


DeliveryOutcome = Delivered | Lost | Rejected

# Called once per delivered frame: (frame bytes, delivery time in ms).
Receiver = Callable[[bytes, float], None]


def airtime_ms(frame_len_bytes: int, cfg: LinkConfig) -> float:
    """Milliseconds the medium is occupied by a frame of the given length."""
    return cfg.preamble_overhead_ms + frame_len_bytes * 8000.0 / cfg.bitrate_bps


@dataclass
class _Flight:
    frame: bytes
    deliver_at: float
    receiver: Receiver | None


class Medium:
    """Single shared radio channel between exactly two endpoints.

    At most one frame is in flight at any instant: a transmit while the
    previous frame is still on the air, or still propagating, is rejected
    as busy. Lost frames occupy the medium for their airtime all the same.
    """

    def __init__(self, cfg: LinkConfig):
        self.cfg = cfg
        self.now_ms = 0.0
        self.busy_until = 0.0
        self._rng = random.Random(cfg.rng_seed)
        self._flight: _Flight | None = None

    @property
    def free_at(self) -> float:
        """Earliest instant a new transmit will not be rejected as busy."""
        t = max(self.busy_until, self.now_ms)
        if self._flight is not None:
            t = max(t, self._flight.deliver_at)
        return t

    def transmit(self, frame_bytes: bytes, send_time: float,
                 receiver: Receiver | None = None) -> DeliveryOutcome:
        """Put one frame on the air at send_time.

        Draws exactly one loss sample unless the transmit is rejected. On
        Delivered, the frame reaches ``receiver`` when the simulation is
        advanced past the delivery instant.
        """
        if send_time >= self.now_ms:
            self.advance(send_time)
        if send_time < self.now_ms or self.busy_until > send_time or self._flight is not None:
            return Rejected("busy")
        if len(frame_bytes) > self.cfg.max_payload_bytes:
            return Rejected("too_long")
        self.busy_until = send_time + airtime_ms(len(frame_bytes), self.cfg)
        if self._rng.random() < self.cfg.loss_probability:
            return Lost()
        at = self.busy_until + self.cfg.propagation_delay_ms
        self._flight = _Flight(bytes(frame_bytes), at, receiver)
        return Delivered(at=at)

    def advance(self, to_time: float) -> None:
        """Move simulated time forward, completing any due delivery exactly once.

        A receiver callback may itself transmit (an ack, typically); chained
        flights coming due within the same window are completed too.
        """
        if to_time < self.now_ms:
            raise ClockRegression(f"cannot advance to {to_time}, already at {self.now_ms}")
        while self._flight is not None and self._flight.deliver_at <= to_time:
            flight, self._flight = self._flight, None
            self.now_ms = flight.deliver_at
            if flight.receiver is not None:
                flight.receiver(flight.frame, flight.deliver_at)
        self.now_ms = max(self.now_ms, to_time)
