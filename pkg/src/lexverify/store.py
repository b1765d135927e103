"""Durable, human-auditable case persistence.

One directory per case:

    store/<case_id>/bundle.v<N>.json   materialized bundle snapshots
    store/<case_id>/log.jsonl          append-only event log

The log is the source of truth: every mutation appends one JSON line
{version, ts, actor, operation, payload} and bundle state at any version is
reconstructible by replaying it.  Bundle snapshots are written atomically
(tmp + fsync + rename) *before* the log line is appended, so a crash between
the two leaves the store at the last acknowledged version and the orphan
snapshot is simply overwritten later.  Writers are serialized per case by
the optimistic version check; readers always see a fully written version.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

from .bundle import ConstraintBundle, bundle_from_json, bundle_to_json, dump_bundle


class NotFound(KeyError):
    pass


class VersionConflict(RuntimeError):
    def __init__(self, case_id: str, expected: int | None, actual: int):
        super().__init__(
            f"case {case_id!r}: expected version {expected}, store is at {actual}")
        self.expected = expected
        self.actual = actual


@dataclass(frozen=True)
class HistoryEntry:
    version: int
    ts: float
    actor: str
    operation: str
    payload: Any


@dataclass(frozen=True)
class CaseRecord:
    case_id: str
    bundle: ConstraintBundle
    version: int
    history: tuple[HistoryEntry, ...]
    results: dict[str, Any]  # latest result per kind ("consistency", ...)


def _fsync_dir(path: Path):
    fd = os.open(path, os.O_RDONLY)
    try:
        os.fsync(fd)
    finally:
        os.close(fd)


class CaseStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    # -- paths --------------------------------------------------------------

    def _case_dir(self, case_id: str) -> Path:
        safe = case_id.replace("/", "_")
        return self.root / safe

    def _log_path(self, case_id: str) -> Path:
        return self._case_dir(case_id) / "log.jsonl"

    # -- log ------------------------------------------------------------------

    def _read_log(self, case_id: str) -> list[HistoryEntry]:
        path = self._log_path(case_id)
        if not path.exists():
            raise NotFound(case_id)
        entries = []
        with path.open() as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError:
                    break  # trailing partial write from a crash; ignore
                entries.append(HistoryEntry(
                    version=obj["version"], ts=obj["ts"], actor=obj.get("actor", ""),
                    operation=obj["operation"], payload=obj.get("payload")))
        if not entries:
            raise NotFound(case_id)
        return entries

    def _append_log(self, case_id: str, entry: HistoryEntry):
        path = self._log_path(case_id)
        line = json.dumps({
            "version": entry.version, "ts": entry.ts, "actor": entry.actor,
            "operation": entry.operation, "payload": entry.payload,
        }, ensure_ascii=False)
        with path.open("a") as fh:
            fh.write(line + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    # -- operations -----------------------------------------------------------

    def exists(self, case_id: str) -> bool:
        return self._log_path(case_id).exists()

    def put_case(self, bundle: ConstraintBundle, expected_version: int | None = None,
                 actor: str = "api") -> CaseRecord:
        """Create (expected_version None/0) or update (must match current)."""
        case_id = bundle.case_id
        case_dir = self._case_dir(case_id)
        if self.exists(case_id):
            current = self._read_log(case_id)[-1].version
            if expected_version != current:
                raise VersionConflict(case_id, expected_version, current)
        else:
            if expected_version not in (None, 0):
                raise VersionConflict(case_id, expected_version, 0)
            current = 0
        version = current + 1
        case_dir.mkdir(parents=True, exist_ok=True)

        snapshot = case_dir / f"bundle.v{version}.json"
        tmp = case_dir / f".bundle.v{version}.json.tmp"
        tmp.write_text(dump_bundle(bundle))
        with tmp.open() as fh:
            os.fsync(fh.fileno())
        tmp.rename(snapshot)
        _fsync_dir(case_dir)

        self._append_log(case_id, HistoryEntry(
            version=version, ts=time.time(), actor=actor, operation="put_case",
            payload={"bundle": bundle_to_json(bundle)}))
        return self.get_case(case_id)

    def record_result(self, case_id: str, kind: str, result: Any,
                      actor: str = "api") -> int:
        """Append a check/optimization result; returns the new version."""
        if not self.exists(case_id):
            raise NotFound(case_id)
        version = self._read_log(case_id)[-1].version + 1
        self._append_log(case_id, HistoryEntry(
            version=version, ts=time.time(), actor=actor, operation="record_result",
            payload={"kind": kind, "result": result}))
        return version

    def get_case(self, case_id: str) -> CaseRecord:
        entries = self._read_log(case_id)
        bundle_json = None
        results: dict[str, Any] = {}
        for e in entries:
            if e.operation == "put_case":
                bundle_json = e.payload["bundle"]
            elif e.operation == "record_result":
                results[e.payload["kind"]] = e.payload["result"]
        if bundle_json is None:
            raise NotFound(case_id)
        return CaseRecord(
            case_id=case_id,
            bundle=bundle_from_json(bundle_json),
            version=entries[-1].version,
            history=tuple(entries),
            results=results,
        )

    def replay_bundle(self, case_id: str, version: int) -> ConstraintBundle:
        """Bundle state as of `version`, reconstructed from the log alone."""
        entries = self._read_log(case_id)
        bundle_json = None
        for e in entries:
            if e.version > version:
                break
            if e.operation == "put_case":
                bundle_json = e.payload["bundle"]
        if bundle_json is None:
            raise NotFound(f"{case_id} has no bundle at version {version}")
        return bundle_from_json(bundle_json)

    def list_cases(self, predicate: Callable[[CaseRecord], bool] | None = None,
                   ) -> list[CaseRecord]:
        records = []
        for child in sorted(self.root.iterdir()) if self.root.exists() else ():
            if not (child / "log.jsonl").exists():
                continue
            try:
                rec = self.get_case(child.name)
            except NotFound:
                continue
            if predicate is None or predicate(rec):
                records.append(rec)
        return records
