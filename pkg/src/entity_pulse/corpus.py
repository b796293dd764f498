"""Archive record model, CSV schema, and validated ingestion.

Row schema (RFC-4180 quoting)::

    text_id,user_id,timestamp,mentions,positive,negative[,text]

* ``timestamp`` is ISO-8601 UTC; sub-second precision is truncated. A
  trailing ``Z``, an explicit offset, or no offset (read as UTC) are accepted.
* ``mentions`` holds ``entity_id:confidence`` pairs joined by ``;``. Entity
  ids are percent-escaped so that ``%`` ``:`` ``;`` ``,`` and newlines never
  appear raw; identity is the exact decoded string (no case folding).
  Duplicate mentions of one entity collapse to the max confidence.
* ``positive`` is an integer in [1, 5], ``negative`` in [-5, -1].
* the optional seventh ``text`` column carries raw text for spam filtering;
  the archive format omits it by default.

Malformed rows never abort ingestion: each yields a :class:`Rejection` with
the row number and a stable reason string, accumulated on the corpus. NUL
characters are not representable in the row format; rows containing them
are rejected wholesale.
"""

from __future__ import annotations

import csv
import gzip
import io
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator
from urllib.parse import unquote

UTC = timezone.utc

# Stable rejection reason strings (machine-readable contract).
REASON_FIELD_COUNT = "wrong field count"
REASON_TIMESTAMP = "bad timestamp"
REASON_SENTIMENT = "sentiment out of range"
REASON_MENTIONS = "malformed mention list"
REASON_EMPTY_ID = "empty text or user id"
REASON_DUPLICATE_ID = "duplicate text id"


class IngestError(Exception):
    """Unreadable source (I/O or encoding failure) with positional context."""


@dataclass(frozen=True, slots=True)
class EntityMention:
    entity_id: str
    confidence: float


@dataclass(frozen=True, slots=True)
class SentimentScores:
    positive: int  # [1, 5]
    negative: int  # [-5, -1]


@dataclass(frozen=True, slots=True)
class AnnotatedText:
    text_id: str
    user_id: str
    timestamp: datetime
    mentions: tuple[EntityMention, ...]
    sentiment: SentimentScores
    text: str | None = None

    @property
    def attitude(self) -> int:
        """Predominant sentiment of the text: positive + negative, in [-4, 4]."""
        return self.sentiment.positive + self.sentiment.negative

    @property
    def sentimentality(self) -> int:
        """Magnitude of sentiment: positive - negative - 2, in [0, 8]."""
        return self.sentiment.positive - self.sentiment.negative - 2


@dataclass(frozen=True, slots=True)
class Rejection:
    row: int
    reason: str


@dataclass(frozen=True, slots=True)
class CorpusStats:
    record_count: int
    rejected_count: int
    distinct_users: int
    time_span: tuple[datetime, datetime] | None


def derive_attitude(text: AnnotatedText) -> int:
    return text.attitude


def derive_sentimentality(text: AnnotatedText) -> int:
    return text.sentimentality


def csv_line(fields: list) -> str:
    """One RFC-4180 row without the terminator.

    The writer must see a real line terminator, otherwise fields containing
    bare CR/LF would not get quoted; the terminator is sliced off after.
    """
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\r\n").writerow(fields)
    return buf.getvalue()[:-2]


def _escape_entity(entity_id: str) -> str:
    return (entity_id.replace("%", "%25").replace(":", "%3A")
            .replace(";", "%3B").replace(",", "%2C")
            .replace("\r", "%0D").replace("\n", "%0A"))


def _parse_timestamp(raw: str) -> datetime | None:
    s = raw.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(s)
    except ValueError:
        return None
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=UTC)
    else:
        ts = ts.astimezone(UTC)
    return ts.replace(microsecond=0)


def _parse_mentions(raw: str) -> tuple[EntityMention, ...] | None:
    if not raw:
        return ()
    best: dict[str, float] = {}
    order: list[str] = []
    for chunk in raw.split(";"):
        head, sep, tail = chunk.rpartition(":")
        if not sep:
            return None
        try:
            conf = float(tail)
        except ValueError:
            return None
        entity = unquote(head)
        if not entity:
            return None
        if entity in best:
            if conf > best[entity]:
                best[entity] = conf
        else:
            best[entity] = conf
            order.append(entity)
    return tuple(EntityMention(e, best[e]) for e in order)


def _convert(fields: list[str], row: int) -> AnnotatedText | Rejection:
    if len(fields) == 6:
        text = None
    elif len(fields) == 7:
        text = fields[6]
    else:
        return Rejection(row, REASON_FIELD_COUNT)
    text_id, user_id = fields[0], fields[1]
    if not text_id or not user_id:
        return Rejection(row, REASON_EMPTY_ID)
    ts = _parse_timestamp(fields[2])
    if ts is None:
        return Rejection(row, REASON_TIMESTAMP)
    mentions = _parse_mentions(fields[3])
    if mentions is None:
        return Rejection(row, REASON_MENTIONS)
    try:
        pos, neg = int(fields[4]), int(fields[5])
    except ValueError:
        return Rejection(row, REASON_SENTIMENT)
    if not (1 <= pos <= 5) or not (-5 <= neg <= -1):
        return Rejection(row, REASON_SENTIMENT)
    return AnnotatedText(text_id, user_id, ts, mentions,
                         SentimentScores(pos, neg), text)


def parse_record(line: str, row: int = 0) -> AnnotatedText | Rejection:
    """Parse one CSV row into a validated record, or a rejection.

    Never returns a partial record: any malformed field rejects the row.
    """
    try:
        fields = next(csv.reader([line]))
    except (csv.Error, StopIteration):
        return Rejection(row, REASON_FIELD_COUNT)
    return _convert(fields, row)


def serialize_record(record: AnnotatedText) -> str:
    """Canonical CSV form of a record (inverse of :func:`parse_record`)."""
    mentions = ";".join(f"{_escape_entity(m.entity_id)}:{m.confidence!r}"
                        for m in record.mentions)
    ts = record.timestamp.astimezone(UTC).strftime("%Y-%m-%dT%H:%M:%SZ")
    fields = [record.text_id, record.user_id, ts, mentions,
              str(record.sentiment.positive), str(record.sentiment.negative)]
    if record.text is not None:
        fields.append(record.text)
    return csv_line(fields)


# Internal compact row: ids interned to ints for fast aggregation.
# (text_id, user:int, ts, mentions:((entity:int, conf:float), ...), pos, neg,
#  attitude, sentimentality, text|None)
Row = tuple


class Corpus:
    """Immutable ingested archive, partitioned by calendar month.

    Records inside each partition are sorted by timestamp. The handle is
    safe for concurrent reads; all mutation happens during ingest.
    """

    def __init__(self) -> None:
        self.entities: list[str] = []
        self._entity_ids: dict[str, int] = {}
        self.users: list[str] = []
        self._user_ids: dict[str, int] = {}
        self._partitions: dict[tuple[int, int], list[Row]] = {}
        self.rejections: list[Rejection] = []
        self._size = 0
        self._min_ts: datetime | None = None
        self._max_ts: datetime | None = None
        self._text_ids: set[str] = set()
        self._sealed = False

    def _intern_entity(self, entity_id: str) -> int:
        i = self._entity_ids.get(entity_id)
        if i is None:
            i = len(self.entities)
            self._entity_ids[entity_id] = i
            self.entities.append(entity_id)
        return i

    def _intern_user(self, user_id: str) -> int:
        i = self._user_ids.get(user_id)
        if i is None:
            i = len(self.users)
            self._user_ids[user_id] = i
            self.users.append(user_id)
        return i

    def _add(self, rec: AnnotatedText, min_confidence: float | None) -> None:
        if rec.text_id in self._text_ids:
            raise KeyError
        self._text_ids.add(rec.text_id)
        if min_confidence is None:
            kept = rec.mentions
        else:
            kept = tuple(m for m in rec.mentions
                         if m.confidence >= min_confidence)
        mentions = tuple((self._intern_entity(m.entity_id), m.confidence)
                         for m in kept)
        uid = self._intern_user(rec.user_id)
        pos, neg = rec.sentiment.positive, rec.sentiment.negative
        row: Row = (rec.text_id, uid, rec.timestamp, mentions, pos, neg,
                    pos + neg, pos - neg - 2, rec.text)
        key = (rec.timestamp.year, rec.timestamp.month)
        self._partitions.setdefault(key, []).append(row)
        self._size += 1
        if self._min_ts is None or rec.timestamp < self._min_ts:
            self._min_ts = rec.timestamp
        if self._max_ts is None or rec.timestamp > self._max_ts:
            self._max_ts = rec.timestamp

    def _seal(self) -> None:
        for rows in self._partitions.values():
            rows.sort(key=lambda r: r[2])
        self._sealed = True

    def __len__(self) -> int:
        return self._size

    @property
    def stats(self) -> CorpusStats:
        span = None
        if self._min_ts is not None:
            span = (self._min_ts, self._max_ts)
        return CorpusStats(self._size, len(self.rejections),
                           len(self.users), span)

    @property
    def has_text(self) -> bool:
        return any(row[8] is not None
                   for rows in self._partitions.values() for row in rows)

    def partitions(self) -> Iterator[tuple[tuple[int, int], list[Row]]]:
        """Month partitions in chronological order."""
        for key in sorted(self._partitions):
            yield key, self._partitions[key]

    def _rows(self) -> Iterator[Row]:
        for _, rows in self.partitions():
            yield from rows

    def records(self) -> Iterator[AnnotatedText]:
        """All records as public objects, chronological within partitions."""
        for row in self._rows():
            yield AnnotatedText(
                row[0], self.users[row[1]], row[2],
                tuple(EntityMention(self.entities[e], c) for e, c in row[3]),
                SentimentScores(row[4], row[5]), row[8])


def _open_source(source) -> tuple[Iterable[str], bool]:
    if isinstance(source, (str, Path)):
        path = os.fspath(source)
        try:
            if path.endswith(".gz"):
                return gzip.open(path, "rt", encoding="utf-8", newline=""), True
            return open(path, "r", encoding="utf-8", newline=""), True
        except OSError as exc:
            raise IngestError(f"cannot open {path}: {exc}") from exc
    return source, False


def ingest(source, min_confidence: float | None = None
           ) -> tuple[Corpus, CorpusStats]:
    """Read rows from ``source`` into an immutable corpus handle.

    ``source`` is a path (``.gz`` decompressed transparently), an open text
    stream, or an iterable of lines. Mentions with confidence strictly below
    ``min_confidence`` are dropped while the record is kept. Malformed rows
    accumulate as rejections and never abort; an unreadable source raises
    :class:`IngestError` carrying the position reached.
    """
    stream, owned = _open_source(source)
    corpus = Corpus()
    row_no = 0
    try:
        reader = csv.reader(stream)
        try:
            for fields in reader:
                row_no += 1
                if not fields:
                    continue
                rec = _convert(fields, row_no)
                if isinstance(rec, Rejection):
                    corpus.rejections.append(rec)
                    continue
                try:
                    corpus._add(rec, min_confidence)
                except KeyError:
                    corpus.rejections.append(
                        Rejection(row_no, REASON_DUPLICATE_ID))
        except (OSError, UnicodeDecodeError, csv.Error) as exc:
            raise IngestError(f"unreadable source after row {row_no}: {exc}"
                              ) from exc
    finally:
        if owned:
            stream.close()
    corpus._seal()
    return corpus, corpus.stats


def write_rejections(rejections: Iterable[Rejection], path) -> None:
    """Side report CSV with one ``row,reason`` line per rejection."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for r in rejections:
            w.writerow([r.row, r.reason])
