"""One-process wiring of medium, application node and gateway."""

from __future__ import annotations

import time
from dataclasses import dataclass

from .auth import DEFAULT_LOCK_SECONDS, Allowlist, AuthEngine
from .gateway import Gateway
from .link import LinkConfig, Medium
from .logs import LineLog
from .node import RECEIVER_LOG_LINES, AppNode


@dataclass
class System:
    medium: Medium
    node: AppNode
    gateway: Gateway

    def start(self) -> None:
        self.gateway.start()

    def close(self) -> None:
        self.gateway.close()


def build_system(allowlist: Allowlist, audit_path, *,
                 link_cfg: LinkConfig | None = None,
                 lock_seconds: float = DEFAULT_LOCK_SECONDS,
                 time_source=time.time,
                 allowlist_path=None,
                 echo=None) -> System:
    """Assemble a complete gateway + link + node stack.

    ``echo`` is an optional text stream that receives both sides' log lines
    as they happen (the serve command points it at stdout).
    """
    cfg = link_cfg if link_cfg is not None else LinkConfig()
    medium = Medium(cfg)
    node = AppNode(log=LineLog(maxlen=RECEIVER_LOG_LINES, echo=echo))
    gateway = Gateway(
        allowlist, medium, node, audit_path,
        engine=AuthEngine(lock_duration=lock_seconds),
        time_source=time_source,
        allowlist_path=allowlist_path,
        log=LineLog(echo=echo),
    )
    return System(medium=medium, node=node, gateway=gateway)
