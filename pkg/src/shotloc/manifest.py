"""Run manifests: per-stage status persisted with crash-safe writes."""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

STAGES = ("audio", "score", "rerank", "threshold", "review", "flow", "smoke",
          "localize", "eval")

PENDING = "pending"
DONE = "done"
FAILED = "failed"


@dataclass
class StageState:
    status: str = PENDING
    completed_at: float | None = None
    error: str | None = None
    note: str | None = None


@dataclass
class RunManifest:
    run_id: str
    config: dict
    stages: dict[str, StageState] = field(default_factory=dict)
    artifacts: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for stage in STAGES:
            self.stages.setdefault(stage, StageState())

    def is_done(self, stage: str) -> bool:
        return self.stages[stage].status == DONE

    def mark_done(self, stage: str, note: str | None = None) -> None:
        self.stages[stage] = StageState(status=DONE, completed_at=time.time(),
                                        note=note)

    def mark_failed(self, stage: str, error: str) -> None:
        self.stages[stage] = StageState(status=FAILED, error=error)

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "config": self.config,
            "stages": {
                name: {"status": s.status, "completed_at": s.completed_at,
                       "error": s.error, "note": s.note}
                for name, s in self.stages.items()
            },
            "artifacts": self.artifacts,
        }

    @staticmethod
    def from_dict(doc: dict) -> "RunManifest":
        manifest = RunManifest(run_id=doc["run_id"], config=doc.get("config", {}),
                               artifacts=dict(doc.get("artifacts", {})))
        for name, s in doc.get("stages", {}).items():
            manifest.stages[name] = StageState(
                status=s.get("status", PENDING),
                completed_at=s.get("completed_at"),
                error=s.get("error"), note=s.get("note"))
        return manifest


def atomic_write_text(path: Path, text: str) -> None:
    """Write-temp-then-rename so a crash never leaves a half-written file."""
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w") as fh:
        fh.write(text)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def save_manifest(manifest: RunManifest, run_dir: Path) -> None:
    atomic_write_text(run_dir / "manifest.json",
                      json.dumps(manifest.to_dict(), indent=2) + "\n")


def load_manifest(run_dir: Path) -> RunManifest | None:
    path = run_dir / "manifest.json"
    if not path.exists():
        return None
    return RunManifest.from_dict(json.loads(path.read_text()))
