"""Transmitter/control side: session admission, command serialization, ack correlation.

A single dispatch thread owns the link; everything else (API handlers, admin
tooling) posts work to it through a FIFO ticket queue, so at most one frame
exchange is in flight at any instant. Every security-relevant event becomes
one audit record, appended to the log file and fanned out to live
subscribers in the same order.
"""

from __future__ import annotations

import itertools
import queue
import secrets
import threading
import time
from dataclasses import dataclass, replace

from .auth import Allowlist, AuthEngine, Denied, DeniedLocked, Granted
from .link import Medium
from .logs import LineLog
from .model import Command, MacAddress, encode_command, format_mac
from .protocol import Acked, ArqPolicy, arq_send
from .store import AuditRecord, append_audit, audit_timestamp, save_allowlist

STARTUP_BANNER = "LoRa initialized successfully."
SESSION_LIFETIME_SECONDS = 3600.0

QUEUED = "queued"
SENT = "sent"
ACKED = "acked"
FAILED = "failed"


class AccessDenied(Exception):
    def __init__(self, failures_so_far: int):
        super().__init__(f"authentication failed ({failures_so_far} consecutive failures)")
        self.failures_so_far = failures_so_far


class AccessLocked(Exception):
    def __init__(self, locked_until: float):
        super().__init__(f"address locked until {locked_until}")
        self.locked_until = locked_until


class InvalidSession(Exception):
    pass


class UnknownTicket(KeyError):
    pass


@dataclass(frozen=True)
class Session:
    token: str
    mac: MacAddress
    created_at: float
    expires_at: float


@dataclass
class CommandTicket:
    ticket_id: int
    command: Command
    seq: int
    mac: MacAddress | None = None
    status: str = QUEUED
    code: int | None = None
    attempts: int = 0


class EventBus:
    """Fan-out of audit events to live subscribers with bounded buffers.

    A subscriber that falls more than ``maxsize`` events behind is dropped
    rather than allowed to block the publisher.
    """

    def __init__(self, maxsize: int = 256):
        self._maxsize = maxsize
        self._subscribers: list[queue.Queue] = []
        self._ids = itertools.count(1)
        self._lock = threading.Lock()

    def subscribe(self) -> "queue.Queue[dict]":
        q: queue.Queue = queue.Queue(maxsize=self._maxsize)
        with self._lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q) -> None:
        with self._lock:
            try:
                self._subscribers.remove(q)
            except ValueError:
                pass

    def publish(self, record: AuditRecord) -> dict:
        event = {
            "id": next(self._ids),
            "ts": record.ts,
            "kind": record.kind,
            "mac": record.mac,
            "detail": record.detail,
        }
        with self._lock:
            dead = []
            for q in self._subscribers:
                try:
                    q.put_nowait(event)
                except queue.Full:
                    dead.append(q)
            for q in dead:
                self._subscribers.remove(q)
        return event


class LoraExchange:
    """One command/ack exchange over the shared half-duplex medium.

    Owned by the gateway's dispatch loop — the single driver the link
    simulator requires. The node's ack (if any) rides the same medium and
    competes with the same loss process.
    """

    def __init__(self, medium: Medium, node_rx):
        self.medium = medium
        self._node_rx = node_rx  # bytes -> ack bytes | None
        self._reply: bytes | None = None

    def exchange(self, wire: bytes, timeout_ms: float) -> bytes | None:
        medium = self.medium
        self._reply = None
        t0 = max(medium.now_ms, medium.free_at)
        medium.transmit(wire, t0, self._deliver_to_node)
        medium.advance(t0 + timeout_ms)
        return self._reply

    def _deliver_to_node(self, data: bytes, at: float) -> None:
        ack = self._node_rx(data)
        if ack is not None:
            self.medium.transmit(ack, at, self._deliver_to_gateway)

    def _deliver_to_gateway(self, data: bytes, at: float) -> None:
        self._reply = data


class Gateway:
    """Control-side service: admits sessions, queues commands, owns the link."""

    def __init__(self, allowlist: Allowlist, medium: Medium, node, audit_path, *,
                 engine: AuthEngine | None = None,
                 policy: ArqPolicy | None = None,
                 bus: EventBus | None = None,
                 time_source=time.time,
                 session_lifetime: float = SESSION_LIFETIME_SECONDS,
                 log: LineLog | None = None,
                 allowlist_path=None):
        self.allowlist: Allowlist = dict(allowlist)
        self.medium = medium
        self.node = node
        self.audit_path = audit_path
        self.allowlist_path = allowlist_path
        self.engine = engine if engine is not None else AuthEngine()
        self.policy = policy if policy is not None else ArqPolicy.for_link(medium.cfg)
        self.bus = bus if bus is not None else EventBus()
        self.log = log if log is not None else LineLog()
        self._now = time_source
        self._session_lifetime = session_lifetime
        self._sessions: dict[str, Session] = {}
        self._tickets: dict[int, CommandTicket] = {}
        self._ticket_ids = itertools.count(1)
        self._next_seq = 0
        self._exchange = LoraExchange(medium, node.on_frame)
        self._queue: "queue.Queue[int | None]" = queue.Queue()
        self._lock = threading.Lock()
        self._audit_lock = threading.Lock()
        self._worker: threading.Thread | None = None

    # -- lifecycle ---------------------------------------------------------

    def startup_banner(self) -> str:
        self.log.append(STARTUP_BANNER)
        return STARTUP_BANNER

    def start(self) -> None:
        """Emit the banner and start the command-dispatch loop."""
        if self._worker is not None:
            raise RuntimeError("gateway already started")
        self.startup_banner()
        self._worker = threading.Thread(target=self._dispatch_loop,
                                        name="wiacomm-dispatch", daemon=True)
        self._worker.start()

    def close(self) -> None:
        if self._worker is None:
            return
        self._queue.put(None)
        self._worker.join()
        self._worker = None

    def drain(self) -> None:
        """Block until every queued ticket has been dispatched."""
        self._queue.join()

    # -- admission ---------------------------------------------------------

    def open_session(self, mac: MacAddress) -> Session:
        now = self._now()
        with self._lock:
            allowlist = dict(self.allowlist)
        decision = self.engine.authenticate(mac, allowlist, now)
        if isinstance(decision, Granted):
            session = Session(token=secrets.token_hex(16), mac=mac,
                              created_at=now, expires_at=now + self._session_lifetime)
            with self._lock:
                self._sessions[session.token] = session
            self._record("auth_granted", mac, allowlist.get(mac, ""))
            return session
        if isinstance(decision, DeniedLocked):
            self._record("auth_denied", mac, "locked")
            raise AccessLocked(decision.locked_until)
        assert isinstance(decision, Denied)
        self._record("auth_denied", mac, str(decision.failures_so_far))
        if decision.alert is not None:
            self._record("alert", mac, str(decision.failures_so_far))
        raise AccessDenied(decision.failures_so_far)

    # -- commands ----------------------------------------------------------

    def submit_command(self, token: str, cmd: Command) -> CommandTicket:
        now = self._now()
        with self._lock:
            session = self._sessions.get(token)
            if session is None or now >= session.expires_at:
                raise InvalidSession("unknown or expired session token")
            ticket = CommandTicket(ticket_id=next(self._ticket_ids), command=cmd,
                                   seq=self._next_seq, mac=session.mac)
            self._next_seq = (self._next_seq + 1) % 256
            self._tickets[ticket.ticket_id] = ticket
            snapshot = replace(ticket)
        self._queue.put(ticket.ticket_id)
        return snapshot

    def poll_ticket(self, ticket_id: int) -> CommandTicket:
        with self._lock:
            ticket = self._tickets.get(ticket_id)
            if ticket is None:
                raise UnknownTicket(ticket_id)
            return replace(ticket)

    def _dispatch_loop(self) -> None:
        while True:
            item = self._queue.get()
            try:
                if item is None:
                    return
                self._dispatch(self._tickets[item])
            finally:
                self._queue.task_done()

    def _dispatch(self, ticket: CommandTicket) -> None:
        token_text = encode_command(ticket.command)
        with self._lock:
            ticket.status = SENT
        self.log.append(f"Sending command: {token_text}")
        self._record("command_sent", ticket.mac, token_text)
        result = arq_send(ticket.command, ticket.seq, self._exchange, self.policy)
        with self._lock:
            ticket.attempts = result.attempts
            if isinstance(result, Acked):
                ticket.status = ACKED
                ticket.code = result.code
            else:
                ticket.status = FAILED
        if isinstance(result, Acked):
            self._record("command_acked", ticket.mac, str(result.code))
        else:
            self._record("command_failed", ticket.mac, str(result.attempts))

    # -- admin -------------------------------------------------------------

    def admin_add(self, mac: MacAddress, label: str) -> None:
        """Add or relabel an allowlist entry, persisting when a path is configured."""
        with self._lock:
            self.allowlist[mac] = label
            if self.allowlist_path is not None:
                save_allowlist(self.allowlist, self.allowlist_path)
        self._record("admin_add", mac, label)

    def admin_remove(self, mac: MacAddress) -> str:
        with self._lock:
            if mac not in self.allowlist:
                raise KeyError(format_mac(mac))
            label = self.allowlist.pop(mac)
            if self.allowlist_path is not None:
                save_allowlist(self.allowlist, self.allowlist_path)
        self._record("admin_remove", mac, label)
        return label

    # -- audit -------------------------------------------------------------

    def _record(self, kind: str, mac: MacAddress | None, detail: str) -> None:
        record = AuditRecord(ts=audit_timestamp(self._now()), kind=kind,
                             mac=format_mac(mac) if mac is not None else None,
                             detail=detail)
        with self._audit_lock:
            append_audit(record, self.audit_path)
            self.bus.publish(record)
