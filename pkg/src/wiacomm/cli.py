"""Command-line entry points: serve, offline allowlist editing, and the demo."""

from __future__ import annotations

import sys
import tempfile
from pathlib import Path

import click
import uvicorn

from .api import config_from_env, create_app
from .auth import DEFAULT_LOCK_SECONDS
from .link import LinkConfig
from .model import MalformedMac, decode_command, format_mac, parse_mac
from .runtime import build_system
from .store import FileMissing, ParseError, load_allowlist, save_allowlist

DEMO_MAC = "AA:BB:CC:DD:EE:FF"
DEMO_COMMANDS = ("led1_on", "led2_on", "motor_on", "led1_off")

EXPECTED_TRANSMITTER = [
    "LoRa initialized successfully.",
    "Sending command: led1_on",
    "Sending command: led2_on",
    "Sending command: motor_on",
    "Sending command: led1_off",
]
EXPECTED_RECEIVER = ["LED1 1", "11", "LED2 1", "21", "MOTOR 1", "31", "LED1 0", "10"]


@click.group()
def main():
    """Authenticated device-control gateway over a simulated LoRa link."""


@main.command()
@click.option("--allowlist", "allowlist_path", required=True, type=click.Path(),
              help="Allowlist file of registered MACs.")
@click.option("--audit", "audit_path", required=True, type=click.Path(),
              help="Append-only audit log (JSON lines).")
@click.option("--loss", default=0.0, show_default=True,
              help="Frame loss probability on the simulated link.")
@click.option("--seed", default=0, show_default=True,
              help="PRNG seed for the link simulator.")
@click.option("--listen", default="127.0.0.1:8000", show_default=True,
              help="host:port for the control API.")
@click.option("--lock-secs", default=DEFAULT_LOCK_SECONDS, show_default=True,
              help="Lockout duration after the third failed attempt.")
@click.option("--ui", "ui_dir", default=None, type=click.Path(),
              help="Serve a built dashboard from this directory at /.")
def serve(allowlist_path, audit_path, loss, seed, listen, lock_secs, ui_dir):
    """Run gateway, link simulator and application node in one process."""
    if not 0.0 <= loss <= 1.0:
        raise click.ClickException(f"--loss must be within [0, 1], got {loss}")
    if lock_secs < 0:
        raise click.ClickException("--lock-secs must be non-negative")
    host, _, port_text = listen.rpartition(":")
    if not host or not port_text.isdigit():
        raise click.ClickException(f"--listen must be host:port, got {listen!r}")
    try:
        allowlist = load_allowlist(allowlist_path)
    except (FileMissing, ParseError) as exc:
        raise click.ClickException(f"allowlist: {exc}")
    system = build_system(
        allowlist, audit_path,
        link_cfg=LinkConfig(loss_probability=loss, rng_seed=seed),
        lock_seconds=lock_secs,
        allowlist_path=allowlist_path,
        echo=sys.stdout,
    )
    app = create_app(system, config_from_env())
    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles
        if not Path(ui_dir).is_dir():
            raise click.ClickException(f"--ui directory not found: {ui_dir}")
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    system.start()
    try:
        uvicorn.run(app, host=host, port=int(port_text), log_level="warning")
    finally:
        system.close()


@main.group()
def allowlist():
    """Edit an allowlist file offline (same validation as the server)."""


def _load_for_edit(path) -> dict:
    try:
        return load_allowlist(path)
    except ParseError as exc:
        raise click.ClickException(f"allowlist: {exc}")


@allowlist.command("add")
@click.option("--file", "path", required=True, type=click.Path())
@click.argument("mac")
@click.argument("label", required=False, default="")
def allowlist_add(path, mac, label):
    """Add or relabel MAC (creates the file if missing)."""
    try:
        parsed = parse_mac(mac)
    except MalformedMac as exc:
        raise click.ClickException(f"malformed MAC: {exc}")
    try:
        entries = _load_for_edit(path)
    except click.ClickException:
        raise
    except FileMissing:
        entries = {}
    entries[parsed] = label
    save_allowlist(entries, path)
    click.echo(f"added {format_mac(parsed)}")


@allowlist.command("rm")
@click.option("--file", "path", required=True, type=click.Path())
@click.argument("mac")
def allowlist_rm(path, mac):
    """Remove MAC from the file."""
    try:
        parsed = parse_mac(mac)
    except MalformedMac as exc:
        raise click.ClickException(f"malformed MAC: {exc}")
    try:
        entries = _load_for_edit(path)
    except FileMissing as exc:
        raise click.ClickException(f"allowlist: {exc}")
    if parsed not in entries:
        raise click.ClickException(f"{format_mac(parsed)} not in allowlist")
    del entries[parsed]
    save_allowlist(entries, path)
    click.echo(f"removed {format_mac(parsed)}")


@allowlist.command("list")
@click.option("--file", "path", required=True, type=click.Path())
def allowlist_list(path):
    """Print entries, one per line."""
    try:
        entries = _load_for_edit(path)
    except FileMissing as exc:
        raise click.ClickException(f"allowlist: {exc}")
    for mac in sorted(entries, key=lambda m: m.octets):
        click.echo(f"{format_mac(mac)} {entries[mac]}".rstrip())


@main.command()
def demo():
    """Lossless in-process run that must reproduce the reference transcripts."""
    mac = parse_mac(DEMO_MAC)
    with tempfile.TemporaryDirectory(prefix="wiacomm-demo-") as tmp:
        system = build_system(
            {mac: "demo-device"}, Path(tmp) / "audit.jsonl",
            link_cfg=LinkConfig(loss_probability=0.0, rng_seed=0),
        )
        system.start()
        try:
            session = system.gateway.open_session(mac)
            for token in DEMO_COMMANDS:
                system.gateway.submit_command(session.token, decode_command(token))
            system.gateway.drain()
        finally:
            system.close()
    transmitter = system.gateway.log.lines()
    receiver = system.node.log.lines()
    click.echo("--- transmitter ---")
    for line in transmitter:
        click.echo(line)
    click.echo("--- receiver ---")
    for line in receiver:
        click.echo(line)
    if transmitter != EXPECTED_TRANSMITTER or receiver != EXPECTED_RECEIVER:
        raise click.ClickException("transcript mismatch")
    click.echo("transcripts verified")


if __name__ == "__main__":
    main()
