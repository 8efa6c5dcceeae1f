"""Segmentation of a match's event sequence into ball possession phases."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import UnsortedInput
from .model import Event

POSSESSION_CSV_FIELDS = ("match_id", "team_id", "period", "start_t", "end_t", "n_events")


@dataclass(frozen=True)
class Possession:
    match_id: str
    team_id: str
    period: int
    events: tuple[Event, ...]

    def __post_init__(self):
        if not self.events:
            raise ValueError("possession needs at least one event")

    @property
    def start_t(self) -> float:
        return self.events[0].t

    @property
    def end_t(self) -> float:
        return self.events[-1].t

    @property
    def duration(self) -> float:
        return self.end_t - self.start_t

    def __len__(self) -> int:
        return len(self.events)


def segment(match_events: Sequence[Event], tolerate_single_touch: bool = False) -> list[Possession]:
    """Split sorted events into maximal same-team runs.

    A run ends at an opponent event, at any ``interruption`` (which joins no
    possession) or at a period change. With ``tolerate_single_touch`` a lone opponent
    event sandwiched between two events of the same team inside one period is
    dropped instead of breaking the run; the partition property then no longer holds.
    """
    for prev, cur in zip(match_events, match_events[1:]):
        if cur.sort_key < prev.sort_key:
            raise UnsortedInput(
                f"event seq={cur.seq} at {cur.sort_key[:2]} precedes seq={prev.seq} at {prev.sort_key[:2]}"
            )
        if cur.match_id != prev.match_id:
            raise UnsortedInput("segment() expects the events of a single match")

    out: list[Possession] = []
    run: list[Event] = []

    def close():
        if run:
            out.append(Possession(run[0].match_id, run[0].team_id, run[0].period, tuple(run)))
            run.clear()

    n = len(match_events)
    i = 0
    while i < n:
        ev = match_events[i]
        if ev.event_type == "interruption":
            close()
        elif run and (ev.team_id != run[-1].team_id or ev.period != run[-1].period):
            nxt = match_events[i + 1] if i + 1 < n else None
            if (
                tolerate_single_touch
                and ev.period == run[-1].period
                and nxt is not None
                and nxt.event_type != "interruption"
                and nxt.team_id == run[-1].team_id
                and nxt.period == ev.period
            ):
                i += 1
                continue
            close()
            run.append(ev)
        else:
            run.append(ev)
        i += 1
    close()
    return out


def filter_valid(possessions: Iterable[Possession], min_events: int = 2, min_duration: float = 0.0) -> list[Possession]:
    """Keep possessions with ``>= min_events`` events and duration strictly above ``min_duration``."""
    if min_events < 1 or min_duration < 0:
        raise ValueError("min_events must be >= 1 and min_duration >= 0")
    return [p for p in possessions if len(p) >= min_events and p.duration > min_duration]


def write_possessions_csv(path, possessions: Iterable[Possession]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(POSSESSION_CSV_FIELDS)
        for p in possessions:
            w.writerow([p.match_id, p.team_id, p.period, repr(p.start_t), repr(p.end_t), len(p)])
