"""Resumable run state, saved atomically as JSON."""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

CHECKPOINT_VERSION = 1


class CheckpointError(Exception):
    """Unreadable checkpoint, or one written by another version or config."""


@dataclass
class Checkpoint:
    version: int
    command: str
    config_digest: str
    stage: int  # index of the stage in progress
    next_chunk: int  # first chunk of that stage not yet written
    last_completed_n: int | None
    output_offset: int  # bytes of report output that are final
    violations: list = field(default_factory=list)
    wall_time_s: float = 0.0
    summary: dict = field(default_factory=dict)
    done: bool = False


def save_checkpoint(state: Checkpoint, path: str | Path) -> None:
    """Write to a temporary file in the same directory, then rename over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=path.name + ".", suffix=".tmp", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w") as f:
            json.dump(asdict(state), f, sort_keys=True)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def load_checkpoint(path: str | Path, digest: str | None = None) -> Checkpoint:
    try:
        data = json.loads(Path(path).read_text())
        state = Checkpoint(**data)
    except (OSError, ValueError, TypeError) as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
    if state.version != CHECKPOINT_VERSION:
        raise CheckpointError(f"checkpoint version {state.version}, expected {CHECKPOINT_VERSION}")
    if digest is not None and state.config_digest != digest:
        raise CheckpointError("checkpoint was written for a different configuration")
    return state
