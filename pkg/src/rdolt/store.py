"""Run-record persistence: one JSON object per line, crash- and race-safe."""

from __future__ import annotations

import fcntl
import json
import os
from datetime import date
from pathlib import Path

from .errors import IoFailureError
from .model import RunRecord, canonical_json


def default_store_path(base_dir: str | Path = "runs") -> Path:
    return Path(base_dir) / f"{date.today().isoformat()}.jsonl"


def append_run_record(store_path: str | Path, record: RunRecord) -> None:
    """Append one complete line under an exclusive advisory lock.

    The line is written with a single os.write so concurrent appenders can
    never interleave partial lines.
    """
    path = Path(store_path)
    line = canonical_json(record.to_dict()) + "\n"
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_APPEND, 0o644)
        try:
            fcntl.flock(fd, fcntl.LOCK_EX)
            os.write(fd, line.encode("utf-8"))
        finally:
            fcntl.flock(fd, fcntl.LOCK_UN)
            os.close(fd)
    except OSError as exc:
        raise IoFailureError(f"could not append to {path}: {exc}")


def read_run_records(store_path: str | Path) -> list[RunRecord]:
    path = Path(store_path)
    records = []
    try:
        with path.open(encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    records.append(RunRecord.from_dict(json.loads(line)))
    except OSError as exc:
        raise IoFailureError(f"could not read {path}: {exc}")
    return records
