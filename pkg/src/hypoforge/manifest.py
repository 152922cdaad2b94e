"""Run manifests: one per CLI invocation, recording enough to reproduce it."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from .prompts import TEMPLATE_VERSION, template_hashes

MANIFEST_NAME = "manifest.json"


@dataclass
class RunManifest:
    command: str
    config_digest: str
    provider: str
    seed: int | None = None
    started_at: float = field(default_factory=time.time)
    finished_at: float | None = None
    status: str = "running"
    counts: dict = field(default_factory=dict)
    template_version: str = TEMPLATE_VERSION
    templates: dict = field(default_factory=template_hashes)

    def finish(self, status: str = "ok", counts: dict | None = None) -> None:
        self.finished_at = time.time()
        self.status = status
        if counts:
            self.counts.update(counts)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config_digest": self.config_digest,
            "provider": self.provider,
            "seed": self.seed,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "status": self.status,
            "counts": self.counts,
            "template_version": self.template_version,
            "templates": self.templates,
        }

    def write(self, run_dir: str | Path) -> Path:
        run_dir = Path(run_dir)
        run_dir.mkdir(parents=True, exist_ok=True)
        path = run_dir / MANIFEST_NAME
        path.write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        return path
