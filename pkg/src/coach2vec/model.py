"""Canonical event-stream data model, JSON-lines parsing and serialization.

Events are stored already oriented so that the acting team attacks toward
``x = 100``. Coordinates are percentages of pitch length (x) and width (y).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .errors import MalformedRecord, UnknownMatch, UnknownTeam

EVENT_TYPES = frozenset(
    {
        "pass",
        "shot",
        "duel",
        "free_kick",
        "throw_in",
        "goalkeeper",
        "clearance",
        "touch",
        "interruption",
    }
)
RECOGNIZED_TAGS = frozenset({"accurate", "goal", "own_goal"})

EVENT_FIELDS = (
    "match_id",
    "period",
    "t",
    "team_id",
    "event_type",
    "x",
    "y",
    "end_x",
    "end_y",
    "tags",
    "xg",
    "seq",
)
MATCH_FIELDS = (
    "match_id",
    "season",
    "home_team_id",
    "away_team_id",
    "home_coach_id",
    "away_coach_id",
)


@dataclass(frozen=True)
class Event:
    match_id: str
    period: int
    t: float
    team_id: str
    event_type: str
    x: float
    y: float
    end_x: float | None = None
    end_y: float | None = None
    tags: frozenset[str] = field(default_factory=frozenset)
    xg: float | None = None
    seq: int = 0

    def __post_init__(self):
        _check_event(self)

    @property
    def sort_key(self) -> tuple[int, float, int]:
        return (self.period, self.t, self.seq)

    def to_record(self) -> dict:
        return {
            "match_id": self.match_id,
            "period": self.period,
            "t": self.t,
            "team_id": self.team_id,
            "event_type": self.event_type,
            "x": self.x,
            "y": self.y,
            "end_x": self.end_x,
            "end_y": self.end_y,
            "tags": sorted(self.tags),
            "xg": self.xg,
            "seq": self.seq,
        }


@dataclass(frozen=True)
class MatchMeta:
    match_id: str
    season: str
    home_team_id: str
    away_team_id: str
    home_coach_id: str
    away_coach_id: str

    def __post_init__(self):
        for name in MATCH_FIELDS:
            value = getattr(self, name)
            if not isinstance(value, str) or (name != "season" and not value):
                raise MalformedRecord(f"match field {name!r} must be a non-empty string")
        if self.home_team_id == self.away_team_id:
            raise MalformedRecord(f"match {self.match_id}: home and away team are identical")

    def opponent(self, team_id: str) -> str:
        if team_id == self.home_team_id:
            return self.away_team_id
        if team_id == self.away_team_id:
            return self.home_team_id
        raise UnknownTeam(f"team {team_id!r} does not play match {self.match_id!r}")

    def coach_of(self, team_id: str) -> str:
        if team_id == self.home_team_id:
            return self.home_coach_id
        if team_id == self.away_team_id:
            return self.away_coach_id
        raise UnknownTeam(f"team {team_id!r} does not play match {self.match_id!r}")

    def to_record(self) -> dict:
        return {name: getattr(self, name) for name in MATCH_FIELDS}


def _check_coord(name: str, value, optional: bool = False) -> None:
    if value is None and optional:
        return
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MalformedRecord(f"{name} must be a number, got {value!r}")
    if not (0.0 <= value <= 100.0):
        raise MalformedRecord(f"{name}={value!r} outside [0, 100]")


def _check_event(ev: Event) -> None:
    if not isinstance(ev.match_id, str) or not ev.match_id:
        raise MalformedRecord("match_id must be a non-empty string")
    if not isinstance(ev.team_id, str) or not ev.team_id:
        raise MalformedRecord("team_id must be a non-empty string")
    if ev.period not in (1, 2) or isinstance(ev.period, bool):
        raise MalformedRecord(f"period must be 1 or 2, got {ev.period!r}")
    if isinstance(ev.t, bool) or not isinstance(ev.t, (int, float)) or not math.isfinite(ev.t) or ev.t < 0:
        raise MalformedRecord(f"t must be a non-negative number, got {ev.t!r}")
    if ev.event_type not in EVENT_TYPES:
        raise MalformedRecord(f"unknown event_type {ev.event_type!r}")
    _check_coord("x", ev.x)
    _check_coord("y", ev.y)
    _check_coord("end_x", ev.end_x, optional=True)
    _check_coord("end_y", ev.end_y, optional=True)
    if (ev.end_x is None) != (ev.end_y is None):
        raise MalformedRecord("end_x and end_y must be both present or both null")
    if ev.event_type in ("pass", "shot") and ev.end_x is None:
        raise MalformedRecord(f"{ev.event_type} event requires end_x/end_y")
    if ev.xg is not None:
        if isinstance(ev.xg, bool) or not isinstance(ev.xg, (int, float)) or not (0.0 <= ev.xg <= 1.0):
            raise MalformedRecord(f"xg must lie in [0, 1], got {ev.xg!r}")
    if isinstance(ev.seq, bool) or not isinstance(ev.seq, int):
        raise MalformedRecord(f"seq must be an integer, got {ev.seq!r}")
    if not isinstance(ev.tags, frozenset) or not all(isinstance(s, str) for s in ev.tags):
        raise MalformedRecord("tags must be a set of strings")


def event_from_record(rec: Mapping) -> Event:
    if not isinstance(rec, Mapping):
        raise MalformedRecord(f"event record must be an object, got {type(rec).__name__}")
    missing = [name for name in EVENT_FIELDS if name not in rec]
    if missing:
        raise MalformedRecord(f"missing field(s) {missing}")
    extra = set(rec) - set(EVENT_FIELDS)
    if extra:
        raise MalformedRecord(f"unexpected field(s) {sorted(extra)}")
    tags = rec["tags"]
    if not isinstance(tags, list):
        raise MalformedRecord("tags must be a list of strings")
    try:
        return Event(
            match_id=rec["match_id"],
            period=rec["period"],
            t=rec["t"],
            team_id=rec["team_id"],
            event_type=rec["event_type"],
            x=rec["x"],
            y=rec["y"],
            end_x=rec["end_x"],
            end_y=rec["end_y"],
            tags=frozenset(tags),
            xg=rec["xg"],
            seq=rec["seq"],
        )
    except TypeError as exc:
        raise MalformedRecord(str(exc)) from exc


def match_from_record(rec: Mapping) -> MatchMeta:
    if not isinstance(rec, Mapping):
        raise MalformedRecord("match record must be an object")
    missing = [name for name in MATCH_FIELDS if name not in rec]
    if missing:
        raise MalformedRecord(f"missing match field(s) {missing}")
    return MatchMeta(**{name: rec[name] for name in MATCH_FIELDS})


class EventStore:
    """Validated, immutable collection of matches and their time-ordered events."""

    def __init__(self, matches: Iterable[MatchMeta], events: Iterable[Event], skipped: int = 0):
        self._matches: dict[str, MatchMeta] = {}
        for m in matches:
            if m.match_id in self._matches:
                raise MalformedRecord(f"duplicate match {m.match_id!r}")
            self._matches[m.match_id] = m
        per_match: dict[str, list[Event]] = {mid: [] for mid in self._matches}
        for ev in events:
            _check_membership(ev, self._matches)
            per_match[ev.match_id].append(ev)
        self._events = {mid: tuple(sorted(evs, key=lambda e: e.sort_key)) for mid, evs in per_match.items()}
        self.skipped = skipped

    @property
    def match_ids(self) -> list[str]:
        return sorted(self._matches)

    @property
    def matches(self) -> list[MatchMeta]:
        return [self._matches[mid] for mid in self.match_ids]

    def match(self, match_id: str) -> MatchMeta:
        try:
            return self._matches[match_id]
        except KeyError:
            raise UnknownMatch(f"unknown match {match_id!r}") from None

    def events(self, match_id: str) -> tuple[Event, ...]:
        self.match(match_id)
        return self._events[match_id]

    def iter_events(self) -> Iterator[Event]:
        for mid in self.match_ids:
            yield from self._events[mid]

    def __len__(self) -> int:
        return sum(len(v) for v in self._events.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, EventStore):
            return NotImplemented
        return self._matches == other._matches and self._events == other._events


def _check_membership(ev: Event, matches: Mapping[str, MatchMeta]) -> None:
    meta = matches.get(ev.match_id)
    if meta is None:
        raise UnknownMatch(f"event seq={ev.seq} references unknown match {ev.match_id!r}")
    if ev.team_id not in (meta.home_team_id, meta.away_team_id):
        raise UnknownTeam(f"event seq={ev.seq}: team {ev.team_id!r} not in match {ev.match_id!r}")


def _decode_lines(lines: Iterable[str]) -> Iterator[tuple[int, object]]:
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            yield lineno, json.loads(line)
        except json.JSONDecodeError as exc:
            yield lineno, MalformedRecord(f"line {lineno}: invalid JSON ({exc.msg})")


def parse_matches(lines: Iterable[str]) -> list[MatchMeta]:
    out = []
    for lineno, rec in _decode_lines(lines):
        if isinstance(rec, Exception):
            raise rec
        try:
            out.append(match_from_record(rec))
        except MalformedRecord as exc:
            raise MalformedRecord(f"matches line {lineno}: {exc}") from exc
    return out


def parse_events(
    records: Iterable[str],
    matches: Iterable[MatchMeta] | Iterable[str],
    strict: bool = False,
) -> EventStore:
    """Parse newline-delimited event records into a validated :class:`EventStore`.

    ``matches`` may be already-built :class:`MatchMeta` objects or the raw lines of
    a matches file. In non-strict mode malformed or dangling records are skipped and
    counted in ``store.skipped``; in strict mode the first one is raised.
    """
    matches = list(matches)
    if matches and isinstance(matches[0], str):
        matches = parse_matches(matches)
    index = {m.match_id: m for m in matches}
    events: list[Event] = []
    skipped = 0
    for lineno, rec in _decode_lines(records):
        try:
            if isinstance(rec, Exception):
                raise rec
            ev = event_from_record(rec)
            _check_membership(ev, index)
        except (MalformedRecord, UnknownMatch, UnknownTeam) as exc:
            if strict:
                if isinstance(exc, MalformedRecord):
                    raise MalformedRecord(f"events line {lineno}: {exc}") from exc
                raise
            skipped += 1
            continue
        events.append(ev)
    return EventStore(matches, events, skipped=skipped)


def serialize_events(store: EventStore) -> Iterator[str]:
    for ev in store.iter_events():
        yield json.dumps(ev.to_record()) + "\n"


def serialize_matches(store: EventStore) -> Iterator[str]:
    for m in store.matches:
        yield json.dumps(m.to_record()) + "\n"


def write_store(store: EventStore, events_path, matches_path) -> None:
    with open(events_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(serialize_events(store))
    with open(matches_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(serialize_matches(store))


def read_store(events_path, matches_path, strict: bool = False) -> EventStore:
    with open(matches_path, encoding="utf-8") as fh:
        matches = parse_matches(fh)
    with open(events_path, encoding="utf-8") as fh:
        return parse_events(fh, matches, strict=strict)


def goal_timeline(store: EventStore, match_id: str) -> list[tuple[int, float, str]]:
    """Goals of a match in time order as ``(period, t, scoring_team_id)``.

    An ``own_goal`` tag credits the opposing team.
    """
    meta = store.match(match_id)
    out = []
    for ev in store.events(match_id):
        if "goal" in ev.tags:
            out.append((ev.period, ev.t, ev.team_id))
        elif "own_goal" in ev.tags:
            out.append((ev.period, ev.t, meta.opponent(ev.team_id)))
    return out
