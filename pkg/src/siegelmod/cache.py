"""Persistent, append-only log of exact solution counts.

One record per line, ASCII::

    <form digest> <n> <p> <k> <count> <crc32 of the preceding fields, 8 hex digits>

Records are only ever appended, so rerunning an interrupted job is
idempotent.  Writes go through a file lock (single writer); readers parse the
whole log and skip lines whose checksum does not match.
"""

from __future__ import annotations

import os
import threading
import zlib
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from filelock import FileLock

from .errors import CorruptRecord
from .localdensity import DEFAULT_BUDGET, count_solutions
from .quadform import QuadraticForm

LOG_NAME = "densities.log"


def _encode(digest: str, n: int, p: int, k: int, count: int) -> bytes:
    body = f"{digest} {n} {p} {k} {count}"
    return f"{body} {zlib.crc32(body.encode()):08x}\n".encode()


def _decode(line: bytes):
    """Parsed ``(key, count)`` or ``None`` when the record is damaged."""
    try:
        text = line.decode("ascii").rstrip("\n")
        body, crc = text.rsplit(" ", 1)
        if f"{zlib.crc32(body.encode()):08x}" != crc:
            return None
        digest, n, p, k, count = body.split(" ")
        return (digest, int(n), int(p), int(k)), int(count)
    except (UnicodeDecodeError, ValueError):
        return None


@dataclass(frozen=True)
class VerifyResult:
    records: int
    bad_offsets: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return not self.bad_offsets


class DensityCache:
    """Count cache rooted at directory ``root``."""

    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.path = self.root / LOG_NAME
        self._lock = FileLock(str(self.path) + ".lock")
        self._mutex = threading.Lock()
        self._pending: list[bytes] = []
        self._store: dict[tuple[str, int, int, int], int] = {}
        self.hits = 0
        self.misses = 0
        self.reload()

    def _lines(self):
        if not self.path.exists():
            return
        offset = 0
        with open(self.path, "rb") as fh:
            for line in fh:
                yield offset, line
                offset += len(line)

    def reload(self) -> None:
        store = {}
        for _, line in self._lines():
            rec = _decode(line)
            if rec is not None:
                store[rec[0]] = rec[1]
        with self._mutex:
            self._store = store

    def get(self, form: QuadraticForm, n: int, p: int, k: int) -> int | None:
        return self._store.get((form.digest, n, p, k))

    def put(self, form: QuadraticForm, n: int, p: int, k: int, count: int) -> None:
        key = (form.digest, n, p, k)
        with self._mutex:
            if key in self._store:
                return
            self._store[key] = count
            self._pending.append(_encode(*key, count))

    def counter(self, form: QuadraticForm, budget: int = DEFAULT_BUDGET):
        """A ``counter(n, p, k)`` callable that consults the cache first."""

        def count(n: int, p: int, k: int) -> int:
            hit = self.get(form, n, p, k)
            if hit is not None:
                self.hits += 1
                return hit
            self.misses += 1
            value = count_solutions(form, n, p, k, budget)
            self.put(form, n, p, k, value)
            return value

        return count

    def flush(self) -> None:
        with self._mutex:
            pending, self._pending = self._pending, []
        if not pending:
            return
        with self._lock:
            with open(self.path, "ab") as fh:
                fh.write(b"".join(pending))
                fh.flush()
                os.fsync(fh.fileno())

    def stats(self) -> dict:
        by_pk = Counter(f"{p}^{k}" for (_, _, p, k) in self._store)
        return {
            "records": len(self._store),
            "forms": len({key[0] for key in self._store}),
            "by_prime_power": dict(sorted(by_pk.items())),
            "bytes": self.path.stat().st_size if self.path.exists() else 0,
        }

    def verify(self) -> VerifyResult:
        """Check every record's checksum; offsets of damaged lines are returned."""
        good = 0
        bad = []
        for offset, line in self._lines():
            if _decode(line) is None:
                bad.append(offset)
            else:
                good += 1
        return VerifyResult(records=good, bad_offsets=tuple(bad))

    def check(self) -> None:
        result = self.verify()
        if not result.ok:
            raise CorruptRecord(result.bad_offsets)

    def clear(self) -> None:
        with self._lock:
            if self.path.exists():
                self.path.unlink()
        with self._mutex:
            self._store = {}
            self._pending = []
