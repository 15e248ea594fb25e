"""File-backed metadata store with a rebuildable datestamp index.

One abs file per record under ``data-dir/<archive>/<yymm>/``, a flat
deleted-record table, and a datestamp table recording the day of the most
recent metadata change per record. Datestamps come from the ingest clock
rather than filesystem metadata so behaviour is deterministic.

The store may also run purely in memory (``data_dir=None``), which the
test suites use for large synthetic corpora.
"""

from __future__ import annotations

import threading
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from datetime import date, datetime
from pathlib import Path

from .absfile import AbsParseError, InternalMetadata, format_abs, parse_abs
from .ids import (
    EprintId,
    SetSpec,
    TaxonomyConfig,
    parse_datestamp,
    parse_internal_id,
    sets_for,
)

DATESTAMP_TABLE = "datestamps.tab"
DELETED_TABLE = "deleted.tab"


class DuplicateRecord(ValueError):
    """Re-ingest of an id with byte-identical metadata."""


class NotFound(KeyError):
    pass


@dataclass(frozen=True)
class StoredRecord:
    """A record as held by the store; deleted records carry no metadata."""

    id: EprintId
    datestamp: date
    deleted: bool = False
    meta: InternalMetadata | None = None
    deletion_reason: str | None = None


@dataclass(frozen=True, order=True)
class IndexEntry:
    datestamp: date
    identifier: str  # canonical internal id, no version suffix
    sets: frozenset[SetSpec] = frozenset()
    deleted: bool = False

    def __post_init__(self):
        # order=True must only consider (datestamp, identifier)
        object.__setattr__(self, "sets", frozenset(self.sets))


@dataclass(frozen=True)
class DatestampIndex:
    """Time-ordered index of (datestamp, identifier, sets)."""

    entries: tuple[IndexEntry, ...]
    built_at: datetime

    def __post_init__(self):
        keys = [(e.datestamp, e.identifier) for e in self.entries]
        assert keys == sorted(keys), "index entries must be sorted"


def _sort_key(e: IndexEntry):
    return (e.datestamp, e.identifier)


class Store:
    """Many concurrent readers, single writer. Scans see a consistent
    index snapshot: either fully pre- or fully post-update."""

    def __init__(self, taxonomy: TaxonomyConfig, data_dir: str | Path | None = None):
        self.taxonomy = taxonomy
        self.data_dir = Path(data_dir) if data_dir is not None else None
        self._lock = threading.Lock()
        self._records: dict[str, tuple[InternalMetadata, date]] = {}
        self._deleted: dict[str, tuple[date, str]] = {}
        self._snapshot: tuple[tuple[IndexEntry, ...], list[date]] = ((), [])
        self._dirty = False
        if self.data_dir is not None:
            self._load()

    # --- loading / persistence ---------------------------------------

    def _load(self) -> None:
        assert self.data_dir is not None
        if not self.data_dir.is_dir():
            raise FileNotFoundError(f"store directory not found: {self.data_dir}")
        stamps: dict[str, date] = {}
        stamp_file = self.data_dir / DATESTAMP_TABLE
        if stamp_file.exists():
            for line in stamp_file.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                ident, day = line.split("\t")
                stamps[ident] = parse_datestamp(day)
        deleted_file = self.data_dir / DELETED_TABLE
        if deleted_file.exists():
            for line in deleted_file.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                ident, day, reason = line.split("\t", 2)
                parse_internal_id(ident)
                self._deleted[ident] = (parse_datestamp(day), reason)
        for path in sorted(self.data_dir.glob("*/*/*.abs")):
            meta = parse_abs(path.read_bytes())
            key = meta.id.local()
            if key in self._records:
                raise AbsParseError(f"{path}: duplicate record {key}")
            datestamp = stamps.get(key, meta.submission_dates[-1][1])
            self._records[key] = (meta, datestamp)
        self._dirty = True

    def _abs_path(self, meta: InternalMetadata) -> Path:
        assert self.data_dir is not None
        eid = meta.id
        # filename is the canonical id with "/" -> ".", so subject-classed
        # ids stay unambiguous (e.g. math/9204/math.DS.9204240.abs)
        return (
            self.data_dir
            / eid.archive
            / f"{eid.yymm:04d}"
            / (eid.local().replace("/", ".") + ".abs")
        )

    def _write_tables(self) -> None:
        if self.data_dir is None:
            return
        stamp_lines = [
            f"{key}\t{stamp.isoformat()}"
            for key, (_, stamp) in sorted(self._records.items())
        ]
        stamp_lines += [
            f"{key}\t{day.isoformat()}"
            for key, (day, _) in sorted(self._deleted.items())
            if key not in self._records
        ]
        tmp = self.data_dir / (DATESTAMP_TABLE + ".tmp")
        tmp.write_text("\n".join(stamp_lines) + "\n", encoding="utf-8")
        tmp.replace(self.data_dir / DATESTAMP_TABLE)
        del_lines = [
            f"{key}\t{day.isoformat()}\t{reason}"
            for key, (day, reason) in sorted(self._deleted.items())
        ]
        tmp = self.data_dir / (DELETED_TABLE + ".tmp")
        tmp.write_text(
            ("\n".join(del_lines) + "\n") if del_lines else "", encoding="utf-8"
        )
        tmp.replace(self.data_dir / DELETED_TABLE)

    # --- mutation ------------------------------------------------------

    def ingest(self, data: bytes | str, received_at: datetime) -> StoredRecord:
        """Parse and persist one abs file; the record's datestamp is the
        calendar date of ``received_at``.

        Raises :class:`AbsParseError` (or an identifier error) on bad input
        and :class:`DuplicateRecord` when the same id is re-ingested with
        unchanged content. Changed content for an existing id is an update
        and advances the datestamp.
        """
        meta = parse_abs(data)
        key = meta.id.local()
        day = received_at.date()
        with self._lock:
            existing = self._records.get(key)
            if existing is not None and format_abs(existing[0]) == format_abs(meta):
                raise DuplicateRecord(f"record {key} already stored unchanged")
            # a record's datestamp never moves backward
            if existing is not None:
                day = max(day, existing[1])
            if key in self._deleted:
                day = max(day, self._deleted[key][0])
            self._records[key] = (meta, day)
            if self.data_dir is not None:
                path = self._abs_path(meta)
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(format_abs(meta), encoding="utf-8")
                self._write_tables()
            self._dirty = True
        return StoredRecord(id=meta.id, datestamp=day, meta=meta)

    def mark_deleted(self, eid: EprintId, reason: str, now: datetime) -> None:
        """Move a record to the deleted table. Its datestamp advances to
        today so harvesters re-fetch the deleted status."""
        key = eid.without_version().local()
        with self._lock:
            if key not in self._records and key not in self._deleted:
                raise NotFound(key)
            prior = self._records.get(key)
            day = now.date()
            if prior is not None:
                day = max(day, prior[1])
            self._deleted[key] = (day, reason)
            if self.data_dir is not None:
                self._write_tables()
            self._dirty = True

    # --- read paths ------------------------------------------------------

    def get(self, eid: EprintId) -> StoredRecord | None:
        """Latest record, a deleted marker, or None for a never-assigned id.
        Deleted ids never yield metadata."""
        key = eid.without_version().local()
        if key in self._deleted:
            day, reason = self._deleted[key]
            return StoredRecord(
                id=eid.without_version(),
                datestamp=day,
                deleted=True,
                deletion_reason=reason,
            )
        item = self._records.get(key)
        if item is None:
            return None
        meta, day = item
        return StoredRecord(id=meta.id, datestamp=day, meta=meta)

    def _entry_for(self, key: str) -> IndexEntry:
        if key in self._deleted:
            day, _ = self._deleted[key]
            meta = self._records.get(key, (None,))[0]
            if meta is not None:
                sets = sets_for(meta.id, meta.crosslists, self.taxonomy)
            else:
                sets = sets_for(parse_internal_id(key), [], self.taxonomy)
            return IndexEntry(day, key, sets, deleted=True)
        meta, day = self._records[key]
        return IndexEntry(day, key, sets_for(meta.id, meta.crosslists, self.taxonomy))

    def _current(self) -> tuple[tuple[IndexEntry, ...], list[date]]:
        if self._dirty:
            with self._lock:
                if self._dirty:
                    keys = set(self._records) | set(self._deleted)
                    entries = tuple(
                        sorted((self._entry_for(k) for k in keys), key=_sort_key)
                    )
                    self._snapshot = (entries, [e.datestamp for e in entries])
                    self._dirty = False
        return self._snapshot

    def scan(
        self,
        from_: date | None = None,
        until: date | None = None,
        set_: SetSpec | str | None = None,
    ) -> list[IndexEntry]:
        """Index entries with from <= datestamp <= until (both inclusive),
        optionally filtered by set, in (datestamp, identifier) order.
        Deleted records are included."""
        if from_ is not None and until is not None and from_ > until:
            raise ValueError(f"bad range: from {from_} > until {until}")
        entries, dates = self._current()
        lo = 0 if from_ is None else bisect_left(dates, from_)
        hi = len(dates) if until is None else bisect_right(dates, until)
        window = entries[lo:hi]
        if set_ is None:
            return list(window)
        if isinstance(set_, str):
            set_ = SetSpec(set_)
        return [e for e in window if set_ in e.sets]

    def rebuild_index(self, now: datetime) -> DatestampIndex:
        """Full rescan of the store. Must equal the incrementally
        maintained index at any point (tested as an invariant). When the
        store has a directory, files are re-read from disk."""
        if self.data_dir is not None:
            fresh = Store(self.taxonomy, self.data_dir)
            entries, _ = fresh._current()
        else:
            entries, _ = self._current()
        return DatestampIndex(entries=entries, built_at=now)

    def current_index(self, now: datetime) -> DatestampIndex:
        """The incrementally maintained index as a snapshot."""
        entries, _ = self._current()
        return DatestampIndex(entries=entries, built_at=now)

    def __len__(self) -> int:
        return len(set(self._records) | set(self._deleted))
