"""Calendar period algebra: granularities, timestamp-to-period mapping, enumeration.

A period is a half-open UTC interval [start, end) spanning exactly one
calendar unit (day, ISO week, month, or year). Weeks start on Monday per
ISO-8601, so they are locale-free and deterministic. Periods that only
partially overlap a query window are included whole.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from enum import Enum

UTC = timezone.utc


class Granularity(Enum):
    DAY = "day"
    WEEK = "week"
    MONTH = "month"
    YEAR = "year"

    @classmethod
    def parse(cls, token: str) -> "Granularity":
        try:
            return cls(token.strip().lower())
        except ValueError:
            raise ValueError(f"unknown granularity {token!r}; expected one of "
                             f"{[g.value for g in cls]}") from None


def _start_date(d: date, g: Granularity) -> date:
    if g is Granularity.DAY:
        return d
    if g is Granularity.WEEK:
        return d - timedelta(days=d.weekday())
    if g is Granularity.MONTH:
        return d.replace(day=1)
    return date(d.year, 1, 1)


def _next_start(d: date, g: Granularity) -> date:
    if g is Granularity.DAY:
        return d + timedelta(days=1)
    if g is Granularity.WEEK:
        return d + timedelta(days=7)
    if g is Granularity.MONTH:
        return date(d.year + (d.month == 12), d.month % 12 + 1, 1)
    return date(d.year + 1, 1, 1)


@dataclass(frozen=True, slots=True)
class Period:
    """Half-open interval [start, end) covering one calendar unit."""

    start: datetime
    end: datetime
    granularity: Granularity

    def __post_init__(self) -> None:
        if self.start >= self.end:
            raise ValueError(f"degenerate period {self.start}..{self.end}")

    @property
    def start_date(self) -> date:
        return self.start.date()

    @property
    def end_date(self) -> date:
        return self.end.date()

    def contains(self, ts: datetime) -> bool:
        return self.start <= ts < self.end

    def render(self) -> str:
        """Canonical output form ``YYYY-MM-DD/YYYY-MM-DD``."""
        return f"{self.start_date.isoformat()}/{self.end_date.isoformat()}"

    def __str__(self) -> str:  # pragma: no cover - convenience
        return self.render()


def _from_start(sd: date, g: Granularity) -> Period:
    ed = _next_start(sd, g)
    return Period(datetime(sd.year, sd.month, sd.day, tzinfo=UTC),
                  datetime(ed.year, ed.month, ed.day, tzinfo=UTC), g)


def period_of(ts: datetime, g: Granularity) -> Period:
    """The unique period of granularity ``g`` containing ``ts``."""
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=UTC)
    return _from_start(_start_date(ts.astimezone(UTC).date(), g), g)


def enumerate_periods(window_start: datetime, window_end: datetime,
                      g: Granularity) -> list[Period]:
    """All periods of granularity ``g`` intersecting [window_start, window_end).

    Chronological and duplicate-free; empty for an empty window.
    """
    if window_start.tzinfo is None:
        window_start = window_start.replace(tzinfo=UTC)
    if window_end.tzinfo is None:
        window_end = window_end.replace(tzinfo=UTC)
    if window_start >= window_end:
        return []
    out: list[Period] = []
    sd = _start_date(window_start.astimezone(UTC).date(), g)
    end_limit = window_end.astimezone(UTC)
    while True:
        p = _from_start(sd, g)
        if p.start >= end_limit:
            break
        out.append(p)
        sd = _next_start(sd, g)
    return out


def parse_period_token(token: str, g: Granularity) -> Period:
    """Expand ``YYYY``, ``YYYY-MM`` or ``YYYY-MM-DD`` to a full period of ``g``.

    The token names an instant (start of the named day/month/year); the
    result is the period of the requested granularity containing it.
    """
    parts = token.strip().split("-")
    try:
        if len(parts) == 1:
            d = date(int(parts[0]), 1, 1)
        elif len(parts) == 2:
            d = date(int(parts[0]), int(parts[1]), 1)
        elif len(parts) == 3:
            d = date(int(parts[0]), int(parts[1]), int(parts[2]))
        else:
            raise ValueError
    except ValueError:
        raise ValueError(f"bad period token {token!r}; expected YYYY, YYYY-MM "
                         f"or YYYY-MM-DD") from None
    return period_of(datetime(d.year, d.month, d.day, tzinfo=UTC), g)


def parse_window(from_token: str, to_token: str,
                 g: Granularity) -> tuple[datetime, datetime]:
    """Expand two period tokens into a half-open window [from, to).

    ``from`` is the start of its token's instant; ``to`` is exclusive, so
    ``--from 2015-01 --to 2016-01`` covers all of 2015.
    """
    start = parse_period_token(from_token, Granularity.DAY).start
    end = parse_period_token(to_token, Granularity.DAY).start
    if start >= end:
        raise ValueError(f"empty window: {from_token!r} .. {to_token!r}")
    return start, end
