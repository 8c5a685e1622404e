"""Allowlist file and append-only audit log persistence.

Allowlist file format: one entry per line — canonical MAC, whitespace,
optional label. '#' starts a comment line, blank lines are ignored, and a
duplicate MAC is a load error. Saves are atomic (temp file + rename) with
entries sorted by MAC for stable diffs.

Audit log: one JSON object per line with keys ts/kind/mac/detail, appended
and flushed per record, never rewritten.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .auth import Allowlist
from .model import MacAddress, MalformedMac, format_mac, parse_mac

AUDIT_KINDS = frozenset({
    "auth_granted",
    "auth_denied",
    "alert",
    "command_sent",
    "command_acked",
    "command_failed",
    "admin_add",
    "admin_remove",
})


class FileMissing(FileNotFoundError):
    pass


class ParseError(ValueError):
    def __init__(self, line_number: int, reason: str):
        super().__init__(f"line {line_number}: {reason}")
        self.line_number = line_number
        self.reason = reason


def load_allowlist(path) -> Allowlist:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise FileMissing(str(path)) from exc
    entries: Allowlist = {}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(None, 1)
        try:
            mac = parse_mac(parts[0])
        except MalformedMac as exc:
            raise ParseError(line_number, f"malformed MAC: {exc}") from exc
        if mac in entries:
            raise ParseError(line_number, f"duplicate MAC {format_mac(mac)}")
        entries[mac] = parts[1].strip() if len(parts) > 1 else ""
    return entries


def save_allowlist(allowlist: Allowlist, path) -> None:
    """Atomic replace: write a temp file in the same directory, then rename."""
    path = Path(path)
    lines = [
        f"{format_mac(mac)} {allowlist[mac]}".rstrip()
        for mac in sorted(allowlist, key=lambda m: m.octets)
    ]
    data = "\n".join(lines) + ("\n" if lines else "")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def audit_timestamp(epoch_seconds: float) -> str:
    """ISO-8601 UTC with milliseconds, e.g. 2024-05-01T12:00:00.000Z."""
    dt = datetime.fromtimestamp(epoch_seconds, tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%S.") + f"{dt.microsecond // 1000:03d}Z"


@dataclass(frozen=True)
class AuditRecord:
    ts: str
    kind: str
    mac: str | None
    detail: str

    def to_json(self) -> str:
        return json.dumps(
            {"ts": self.ts, "kind": self.kind, "mac": self.mac, "detail": self.detail},
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, line: str) -> "AuditRecord":
        obj = json.loads(line)
        ts, kind = obj["ts"], obj["kind"]
        if not isinstance(ts, str) or not isinstance(kind, str):
            raise ValueError("ts and kind must be strings")
        if kind not in AUDIT_KINDS:
            raise ValueError(f"unknown audit kind {kind!r}")
        return cls(ts=ts, kind=kind, mac=obj.get("mac"), detail=obj.get("detail", ""))


def append_audit(record: AuditRecord, log_path) -> None:
    """Append one JSON line, flushed before return."""
    with open(log_path, "a", encoding="utf-8") as fh:
        fh.write(record.to_json() + "\n")
        fh.flush()


def read_audit(log_path, kind: str | None = None, mac: str | None = None,
               since: str | None = None, until: str | None = None) -> list[AuditRecord]:
    """Records in file order matching the optional filters.

    Timestamps are fixed-width ISO-8601 UTC strings, so the since/until
    bounds (inclusive) compare lexicographically. A malformed line raises
    ParseError with its line number rather than being skipped.
    """
    try:
        text = Path(log_path).read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise FileMissing(str(log_path)) from exc
    records = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = AuditRecord.from_json(line)
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise ParseError(line_number, f"bad audit line: {exc}") from exc
        if kind is not None and record.kind != kind:
            continue
        if mac is not None and record.mac != mac:
            continue
        if since is not None and record.ts < since:
            continue
        if until is not None and record.ts > until:
            continue
        records.append(record)
    return records
