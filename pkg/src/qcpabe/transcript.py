"""JSON-lines record of inter-party messages and access-structure changes."""
from __future__ import annotations

import hashlib
import json
from importlib import resources
from pathlib import Path
from typing import Any


def digest(payload: Any) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def load_schema() -> dict:
    text = resources.files("qcpabe").joinpath("schemas/transcript.schema.json").read_text()
    return json.loads(text)


class Transcript:
    """Ordered event log driven by a monotone logical clock."""

    def __init__(self):
        self.events: list[dict] = []
        self._tick = 0

    @property
    def now(self) -> int:
        return self._tick

    def tick(self) -> int:
        self._tick += 1
        return self._tick

    def message(self, sender: str, receiver: str, kind: str, payload: Any = None) -> int:
        t = self.tick()
        self.events.append(
            {"tick": t, "from": sender, "to": receiver, "kind": kind, "payload_digest": digest(payload)}
        )
        return t

    def structure_change(self, attrs, old: str | None, new: str, stamp: int) -> int:
        t = self.tick()
        self.events.append(
            {
                "tick": t,
                "kind": "structure_change",
                "set": sorted(attrs),
                "old_status": old,
                "new_status": new,
                "stamp": stamp,
            }
        )
        return t

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e, sort_keys=True) + "\n" for e in self.events)

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")
