"""Append-only stores for reviewer verdicts and box annotations."""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import asdict, dataclass
from pathlib import Path


class CorruptStore(Exception):
    """An append-only log contains an unreadable line."""

    def __init__(self, path: Path, lineno: int):
        super().__init__(
            f"{path} is corrupt at line {lineno}; "
            f"drop the bad line (tail of the file) and restart")
        self.path = path
        self.lineno = lineno


@dataclass(frozen=True)
class Verdict:
    segment_ref: str
    visible_gunshot: bool
    reviewer: str
    timestamp: float
    notes: str = ""


_APPEND_LOCKS: dict[str, threading.Lock] = {}
_LOCKS_GUARD = threading.Lock()


def _lock_for(path: Path) -> threading.Lock:
    key = str(path)
    with _LOCKS_GUARD:
        return _APPEND_LOCKS.setdefault(key, threading.Lock())


class AppendLog:
    """JSONL log: appends are flushed to disk, replay rebuilds state.

    Writes are serialized per path so concurrent service handlers never
    interleave half-written lines.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def append(self, record: dict) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with _lock_for(self.path):
            with open(self.path, "a") as fh:
                fh.write(json.dumps(record) + "\n")
                fh.flush()
                os.fsync(fh.fileno())

    def records(self) -> list[dict]:
        if not self.path.exists():
            return []
        out = []
        with open(self.path) as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    out.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise CorruptStore(self.path, lineno) from exc
        return out


class VerdictStore:
    """History-preserving verdict log; the latest write per segment is live."""

    def __init__(self, path: str | Path):
        self.log = AppendLog(path)

    def record(self, segment_ref: str, visible_gunshot: bool, reviewer: str,
               notes: str = "") -> Verdict:
        verdict = Verdict(segment_ref=segment_ref,
                          visible_gunshot=visible_gunshot, reviewer=reviewer,
                          timestamp=time.time(), notes=notes)
        self.log.append(asdict(verdict))
        return verdict

    def history(self) -> list[Verdict]:
        return [Verdict(**rec) for rec in self.log.records()]

    def live(self) -> dict[str, Verdict]:
        state: dict[str, Verdict] = {}
        for verdict in self.history():
            state[verdict.segment_ref] = verdict
        return state


class AnnotationStore:
    """Reviewer-drawn boxes and attributes, one JSONL record per submission."""

    def __init__(self, path: str | Path):
        self.log = AppendLog(path)

    def record(self, payload: dict) -> None:
        self.log.append(dict(payload, timestamp=time.time()))

    def live(self) -> dict[str, dict]:
        state: dict[str, dict] = {}
        for rec in self.log.records():
            state[rec["segment_ref"]] = rec
        return state
