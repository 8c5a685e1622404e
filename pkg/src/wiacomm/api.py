"""HTTP control plane: sessions, commands, device snapshot, live events, admin allowlist.

Admin endpoints require the shared secret from the WIA_ADMIN_TOKEN
environment variable in the X-Admin-Token header; with no token configured
they reject everything. The event stream is server-sent events, one audit
record per event, with a monotonically increasing id for client-side dedup.
"""

from __future__ import annotations

import asyncio
import json
import os
import queue
from dataclasses import dataclass, field

from fastapi import FastAPI, Header
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel

from .gateway import AccessDenied, AccessLocked, InvalidSession, UnknownTicket
from .model import (
    MalformedMac,
    UnknownCommand,
    decode_command,
    encode_command,
    format_mac,
    parse_mac,
)
from .node import query_states
from .runtime import System

ADMIN_TOKEN_ENV = "WIA_ADMIN_TOKEN"


@dataclass
class ApiConfig:
    admin_token: str | None = None  # None disables the admin endpoints
    cors_origins: list[str] = field(default_factory=lambda: ["*"])
    event_poll_seconds: float = 0.5  # keepalive granularity of /api/events


class SessionRequest(BaseModel):
    mac: str


class CommandRequest(BaseModel):
    token: str
    command: str


class LabelBody(BaseModel):
    label: str = ""


def config_from_env() -> ApiConfig:
    return ApiConfig(admin_token=os.environ.get(ADMIN_TOKEN_ENV))


def create_app(system: System, config: ApiConfig | None = None) -> FastAPI:
    config = config if config is not None else config_from_env()
    gw = system.gateway
    app = FastAPI(title="wiacomm control API")
    if config.cors_origins:
        app.add_middleware(CORSMiddleware, allow_origins=config.cors_origins,
                           allow_methods=["*"], allow_headers=["*"])

    def admin_rejection(header_token: str | None) -> JSONResponse | None:
        if config.admin_token is None or header_token != config.admin_token:
            return JSONResponse(status_code=401, content={"error": "admin token required"})
        return None

    @app.post("/api/session")
    def open_session(body: SessionRequest):
        try:
            mac = parse_mac(body.mac)
        except MalformedMac as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        try:
            session = gw.open_session(mac)
        except AccessLocked as exc:
            return JSONResponse(status_code=423, content={"locked_until": exc.locked_until})
        except AccessDenied as exc:
            return JSONResponse(status_code=401, content={"failures": exc.failures_so_far})
        return {"token": session.token, "expires_at": session.expires_at}

    @app.post("/api/command", status_code=202)
    def submit_command(body: CommandRequest):
        try:
            cmd = decode_command(body.command)
        except UnknownCommand as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        try:
            ticket = gw.submit_command(body.token, cmd)
        except InvalidSession:
            return JSONResponse(status_code=401, content={"error": "invalid session"})
        return {"ticket_id": ticket.ticket_id}

    @app.get("/api/command/{ticket_id}")
    def poll_ticket(ticket_id: int):
        try:
            ticket = gw.poll_ticket(ticket_id)
        except UnknownTicket:
            return JSONResponse(status_code=404, content={"error": "unknown ticket"})
        body = {
            "ticket_id": ticket.ticket_id,
            "command": encode_command(ticket.command),
            "status": ticket.status,
            "attempts": ticket.attempts,
        }
        if ticket.code is not None:
            body["code"] = ticket.code
        return body

    @app.get("/api/devices")
    def devices():
        return {device.wire_name: bit for device, bit in query_states(system.node.bank).items()}

    @app.get("/api/logs")
    def logs():
        return {"transmitter": gw.log.lines(), "receiver": system.node.log.lines()}

    @app.get("/api/events")
    async def events():
        subscription = gw.bus.subscribe()

        async def stream():
            try:
                while True:
                    try:
                        event = await asyncio.to_thread(
                            subscription.get, True, config.event_poll_seconds)
                    except queue.Empty:
                        yield ": keepalive\n\n"
                        continue
                    yield f"id: {event['id']}\ndata: {json.dumps(event)}\n\n"
            finally:
                gw.bus.unsubscribe(subscription)

        return StreamingResponse(stream(), media_type="text/event-stream")

    @app.get("/api/allowlist")
    def list_allowlist(x_admin_token: str | None = Header(default=None)):
        rejection = admin_rejection(x_admin_token)
        if rejection is not None:
            return rejection
        entries = [
            {"mac": format_mac(mac), "label": label}
            for mac, label in sorted(gw.allowlist.items(), key=lambda kv: kv[0].octets)
        ]
        return {"entries": entries}

    @app.put("/api/allowlist/{mac_text}")
    def put_allowlist(mac_text: str, body: LabelBody,
                      x_admin_token: str | None = Header(default=None)):
        rejection = admin_rejection(x_admin_token)
        if rejection is not None:
            return rejection
        try:
            mac = parse_mac(mac_text)
        except MalformedMac as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        gw.admin_add(mac, body.label)
        return {"mac": format_mac(mac), "label": body.label}

    @app.delete("/api/allowlist/{mac_text}")
    def delete_allowlist(mac_text: str, x_admin_token: str | None = Header(default=None)):
        rejection = admin_rejection(x_admin_token)
        if rejection is not None:
            return rejection
        try:
            mac = parse_mac(mac_text)
        except MalformedMac as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        try:
            gw.admin_remove(mac)
        except KeyError:
            return JSONResponse(status_code=404, content={"error": "MAC not in allowlist"})
        return {"removed": format_mac(mac)}

    return app
