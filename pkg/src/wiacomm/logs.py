"""Line-oriented logs for the two radio sides."""

from __future__ import annotations

import threading
from collections import deque
from typing import IO


class LineLog:
    """Append-only log of text lines, optionally echoed to a stream and a file.

    With ``maxlen`` set it behaves as a ring buffer keeping the newest lines.
    """

    def __init__(self, maxlen: int | None = None, echo: IO[str] | None = None,
                 mirror_path=None):
        self._lines: deque[str] = deque(maxlen=maxlen)
        self._echo = echo
        self._mirror = open(mirror_path, "a", encoding="utf-8") if mirror_path else None
        self._lock = threading.Lock()

    def append(self, line: str) -> None:
        with self._lock:
            self._lines.append(line)
            if self._echo is not None:
                print(line, file=self._echo, flush=True)
            if self._mirror is not None:
                self._mirror.write(line + "\n")
                self._mirror.flush()

    def lines(self) -> list[str]:
        with self._lock:
            return list(self._lines)

    def close(self) -> None:
        with self._lock:
            if self._mirror is not None:
                self._mirror.close()
                self._mirror = None
