"""Byte-budgeted LRU cache of patch grids with single-flight encoding."""
from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

from ..types import PatchGrid


class EntryTooLarge(Exception):
    """A single grid exceeds the whole cache budget."""


@dataclass
class GridCacheEntry:
    image_id: str  # hex digest of the uploaded bytes
    grid: PatchGrid
    width: int  # original upload dimensions
    height: int
    size_bytes: int


def grid_nbytes(grid: PatchGrid) -> int:
    n = grid.data.nbytes
    if grid.attention is not None:
        n += grid.attention.nbytes
    return n


class GridCache:
    """LRU over content-hash keys; total bytes never exceed the budget.

    ``get_or_create`` runs the factory at most once per key even under
    concurrent first requests (single-flight); later hits are lock-free
    reads under the shared mutex.
    """

    def __init__(self, budget_bytes: int):
        if budget_bytes < 1:
            raise ValueError("cache budget must be positive")
        self.budget = budget_bytes
        self._entries: "OrderedDict[str, GridCacheEntry]" = OrderedDict()
        self._total = 0
        self._lock = threading.Lock()
        self._inflight: Dict[str, threading.Lock] = {}

    @property
    def total_bytes(self) -> int:
        with self._lock:
            return self._total

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)

    def get(self, key: str) -> Optional[GridCacheEntry]:
        with self._lock:
            entry = self._entries.get(key)
            if entry is not None:
                self._entries.move_to_end(key)
            return entry

    def get_or_create(
        self, key: str, factory: Callable[[], GridCacheEntry]
    ) -> Tuple[GridCacheEntry, bool]:
        """Returns (entry, was_cached)."""
        entry = self.get(key)
        if entry is not None:
            return entry, True
        with self._lock:
            flight = self._inflight.setdefault(key, threading.Lock())
        with flight:
            entry = self.get(key)
            if entry is not None:
                return entry, True
            entry = factory()
            self._put(key, entry)
            return entry, False

    def _put(self, key: str, entry: GridCacheEntry) -> List[str]:
        if entry.size_bytes > self.budget:
            raise EntryTooLarge(
                f"grid of {entry.size_bytes} bytes exceeds cache budget {self.budget}"
            )
        evicted = []
        with self._lock:
            if key in self._entries:
                self._total -= self._entries.pop(key).size_bytes
            self._entries[key] = entry
            self._total += entry.size_bytes
            while self._total > self.budget:
                old_key, old = self._entries.popitem(last=False)
                self._total -= old.size_bytes
                evicted.append(old_key)
            self._inflight.pop(key, None)
        return evicted


class AdmissionGate:
    """Bounded worker pool admission: busy workers plus a finite queue."""

    def __init__(self, workers: int, queue: int):
        self.capacity = workers + queue
        self._sem = threading.Semaphore(workers)
        self._pending = 0
        self._lock = threading.Lock()

    def try_enter(self) -> bool:
        with self._lock:
            if self._pending >= self.capacity:
                return False
            self._pending += 1
        self._sem.acquire()
        return True

    def leave(self) -> None:
        self._sem.release()
        with self._lock:
            self._pending -= 1
