"""Admission control: MAC allowlist check with per-MAC lockout and alerting.

Each MAC accumulates consecutive failures; the third failure of an episode
raises a single alert and locks that address out for ``lock_duration``
seconds. A success, a lock expiry or an admin reset starts a fresh episode.
The clock is always an injected timestamp, never read from the system.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from .model import MacAddress

# Alert and lock on the third consecutive failure.
FAILURE_THRESHOLD = 3

DEFAULT_LOCK_SECONDS = 300.0

# mac -> short human label (may be empty)
Allowlist = dict[MacAddress, str]


@dataclass
class MacAttempts:
    """Per-MAC ledger entry for the current episode."""

    consecutive_failures: int = 0
    locked_until: float | None = None
    alert_raised: bool = False


@dataclass(frozen=True)
class AlertEvent:
    mac: MacAddress
    timestamp: float


@dataclass(frozen=True)
class Granted:
    # Deterministic per-engine grant counter; callers mix in their own entropy
    # when minting session tokens.
    session_seed: int


@dataclass(frozen=True)
class Denied:
    failures_so_far: int
    alert: AlertEvent | None = None


@dataclass(frozen=True)
class DeniedLocked:
    locked_until: float


AuthDecision = Granted | Denied | DeniedLocked


class AuthEngine:
    """Serializes admission decisions over a shared attempt ledger.

    Decisions are a pure function of (mac, allowlist, ledger state, now);
    concurrent callers see some total order of calls.
    """

    def __init__(self, lock_duration: float = DEFAULT_LOCK_SECONDS):
        self.lock_duration = lock_duration
        self._attempts: dict[MacAddress, MacAttempts] = {}
        self._grants = 0
        self._lock = threading.Lock()

    def authenticate(self, mac: MacAddress, allowlist: Allowlist, now: float) -> AuthDecision:
        with self._lock:
            rec = self._attempts.setdefault(mac, MacAttempts())
            if rec.locked_until is not None:
                if now < rec.locked_until:
                    return DeniedLocked(locked_until=rec.locked_until)
                # Lock expired: the episode is over, start fresh.
                rec.consecutive_failures = 0
                rec.locked_until = None
                rec.alert_raised = False
            if mac in allowlist:
                rec.consecutive_failures = 0
                self._grants += 1
                return Granted(session_seed=self._grants)
            rec.consecutive_failures += 1
            alert = None
            if rec.consecutive_failures == FAILURE_THRESHOLD and not rec.alert_raised:
                rec.alert_raised = True
                rec.locked_until = now + self.lock_duration
                alert = AlertEvent(mac=mac, timestamp=now)
            return Denied(failures_so_far=rec.consecutive_failures, alert=alert)

    def record_success_reset(self, mac: MacAddress) -> None:
        """Zero the failure counter and clear any lock (idempotent; admin reset)."""
        with self._lock:
            self._attempts[mac] = MacAttempts()

    def is_locked(self, mac: MacAddress, now: float) -> bool:
        with self._lock:
            rec = self._attempts.get(mac)
            return rec is not None and rec.locked_until is not None and now < rec.locked_until
