"""Cloud storage service: tagged cipher and share records, optionally on disk.

On-disk layout, one file per record::

    <root>/cipher/<do_id>@<bb84_time>.rec
    <root>/share/<do_id>@<bb84_time>.rec

Each file starts with the header line ``qcpabe-record v1`` followed by
``kind``, ``mt`` and either a ``policy`` line plus the ciphertext block
(cipher records) or an ``es`` line holding the wrapped bundle as hex
(share records).
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Union

from .conjugate import QubitCiphertext
from .errors import DuplicateTag, NotFound, RecordFormatError

RECORD_HEADER = "qcpabe-record v1"
_DO_ID = re.compile(r"^[A-Za-z0-9_-]+$")


@dataclass(frozen=True, order=True)
class MessageTag:
    do_id: str
    bb84_time: int

    def __post_init__(self):
        if not _DO_ID.match(self.do_id):
            raise ValueError(f"party id {self.do_id!r} must match [A-Za-z0-9_-]+")

    @property
    def key(self) -> str:
        return f"{self.do_id}@{self.bb84_time}"

    @classmethod
    def from_key(cls, key: str) -> "MessageTag":
        do_id, _, t = key.rpartition("@")
        return cls(do_id, int(t))

    def __str__(self):
        return self.key


@dataclass(frozen=True)
class CipherRecord:
    mt: MessageTag
    ciphertext: QubitCiphertext
    policy: str | None = None

    kind = "cipher"


@dataclass(frozen=True)
class ShareRecord:
    mt: MessageTag
    es: bytes

    kind = "share"


Record = Union[CipherRecord, ShareRecord]
KINDS = ("cipher", "share")


def serialize_record(record: Record) -> str:
    lines = [RECORD_HEADER, f"kind {record.kind}", f"mt {record.mt.do_id} {record.mt.bb84_time}"]
    if isinstance(record, CipherRecord):
        lines.append("policy -" if record.policy is None else f"policy {record.policy}")
        return "\n".join(lines) + "\n" + record.ciphertext.to_text()
    lines.append(f"es {record.es.hex()}")
    return "\n".join(lines) + "\n"


def parse_record(text: str) -> Record:
    lines = text.splitlines()
    try:
        if lines[0] != RECORD_HEADER:
            raise RecordFormatError(f"bad header {lines[0]!r}")
        kind_key, kind = lines[1].split(" ", 1)
        mt_key, do_id, t = lines[2].split()
        if kind_key != "kind" or mt_key != "mt":
            raise RecordFormatError("expected 'kind' and 'mt' lines")
        mt = MessageTag(do_id, int(t))
        if kind == "cipher":
            key, policy = lines[3].split(" ", 1)
            if key != "policy":
                raise RecordFormatError("expected a 'policy' line")
            ct = QubitCiphertext.from_text("\n".join(lines[4:]))
            return CipherRecord(mt, ct, None if policy == "-" else policy)
        if kind == "share":
            key, es = lines[3].split()
            if key != "es":
                raise RecordFormatError("expected an 'es' line")
            return ShareRecord(mt, bytes.fromhex(es))
        raise RecordFormatError(f"unknown record kind {kind!r}")
    except RecordFormatError:
        raise
    except (IndexError, ValueError) as exc:
        raise RecordFormatError(f"malformed record: {exc}") from exc


class CloudStore:
    """Keyed record store; in memory unless constructed with a directory."""

    def __init__(self, root: str | Path | None = None):
        self.root = Path(root) if root is not None else None
        self._mem: dict[tuple[str, MessageTag], Record] = {}
        if self.root is not None:
            for kind in KINDS:
                (self.root / kind).mkdir(parents=True, exist_ok=True)

    def _path(self, kind: str, mt: MessageTag) -> Path:
        return self.root / kind / f"{mt.key}.rec"

    def __contains__(self, item: tuple[str, MessageTag]) -> bool:
        kind, mt = item
        if self.root is not None:
            return self._path(kind, mt).exists()
        return item in self._mem

    def put(self, record: Record) -> None:
        if (record.kind, record.mt) in self:
            raise DuplicateTag(f"{record.kind} record for {record.mt} already stored")
        self._write(record)

    def replace(self, record: Record) -> None:
        """Overwrite an existing record (ciphertext re-randomization)."""
        if (record.kind, record.mt) not in self:
            raise NotFound(f"no {record.kind} record for {record.mt}")
        self._write(record)

    def _write(self, record: Record) -> None:
        if self.root is None:
            self._mem[(record.kind, record.mt)] = record
        else:
            self._path(record.kind, record.mt).write_text(serialize_record(record), encoding="utf-8")

    def get(self, mt: MessageTag, kind: str = "cipher") -> Record:
        if kind not in KINDS:
            raise ValueError(f"unknown record kind {kind!r}")
        if self.root is None:
            try:
                return self._mem[(kind, mt)]
            except KeyError:
                raise NotFound(f"no {kind} record for {mt}") from None
        path = self._path(kind, mt)
        if not path.exists():
            raise NotFound(f"no {kind} record for {mt}")
        return parse_record(path.read_text(encoding="utf-8"))

    def tags(self, kind: str = "cipher") -> list[MessageTag]:
        if self.root is None:
            return sorted(mt for k, mt in self._mem if k == kind)
        return sorted(MessageTag.from_key(p.stem) for p in (self.root / kind).glob("*.rec"))


@dataclass(frozen=True)
class IndexEntry:
    path: str
    kind: str | None
    mt: str | None
    size: int | None
    error: str | None = None


def inspect_store(root: str | Path) -> list[IndexEntry]:
    """Parse every record file under ``root``; bad files carry a diagnostic."""
    root = Path(root)
    entries = []
    for kind in KINDS:
        sub = root / kind
        if not sub.is_dir():
            continue
        for path in sorted(sub.glob("*.rec")):
            rel = str(path.relative_to(root))
            try:
                rec = parse_record(path.read_text(encoding="utf-8"))
            except (RecordFormatError, UnicodeDecodeError) as exc:
                entries.append(IndexEntry(rel, None, None, None, str(exc)))
                continue
            if rec.kind != kind or rec.mt.key != path.stem:
                entries.append(IndexEntry(rel, rec.kind, rec.mt.key, None, "record does not match its file location"))
                continue
            size = rec.ciphertext.length if isinstance(rec, CipherRecord) else len(rec.es)
            entries.append(IndexEntry(rel, rec.kind, rec.mt.key, size))
    return entries
