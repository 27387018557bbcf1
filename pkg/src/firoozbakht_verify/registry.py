"""Catalog of range-scannable checks, keyed by check id.

A scanner maps an inclusive index range to (indices, verdict codes) where the
codes are 1 Holds, -1 Fails, 0 Unresolved.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

Scanner = Callable[[int, int], tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class ScanEntry:
    check_id: str
    scan: Scanner
    min_n: int  # smallest index where the check is evaluable
    stated_threshold: int | None  # stated validity threshold, None if the source gives none


SCANNERS: dict[str, ScanEntry] = {}


def register(check_id: str, min_n: int, stated_threshold: int | None):
    def deco(fn: Scanner) -> Scanner:
        SCANNERS[check_id] = ScanEntry(check_id, fn, min_n, stated_threshold)
        return fn

    return deco


def load_all() -> dict[str, ScanEntry]:
    # registration happens on import
    from . import classical, inequalities  # noqa: F401

    return SCANNERS
