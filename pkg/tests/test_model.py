import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coach2vec.errors import MalformedRecord, UnknownMatch, UnknownTeam
from coach2vec.model import (
    EventStore,
    goal_timeline,
    parse_events,
    parse_matches,
    serialize_events,
    serialize_matches,
)

from helpers import ev

MATCH_LINE = json.dumps(
    {"match_id": "m1", "season": "2019/2020", "home_team_id": "A", "away_team_id": "B",
     "home_coach_id": "cA", "away_coach_id": "cB"}
)


def record(**over):
    rec = {"match_id": "m1", "period": 1, "t": 0.0, "team_id": "A", "event_type": "pass",
           "x": 50.0, "y": 50.0, "end_x": 60.0, "end_y": 50.0, "tags": [], "xg": None, "seq": 0}
    rec.update(over)
    return json.dumps(rec)


def test_single_pass_record():
    store = parse_events([record()], [MATCH_LINE], strict=True)
    assert len(store.matches) == 1
    assert len(store) == 1
    e = store.events("m1")[0]
    assert (e.x, e.y, e.end_x, e.end_y) == (50.0, 50.0, 60.0, 50.0)


def test_out_of_range_strict_vs_lenient():
    lines = [record(), record(x=101, seq=1)]
    with pytest.raises(MalformedRecord):
        parse_events(lines, [MATCH_LINE], strict=True)
    store = parse_events(lines, [MATCH_LINE], strict=False)
    assert len(store) == 1 and store.skipped == 1


@pytest.mark.parametrize(
    "bad",
    [
        record(end_x=None, end_y=None),  # pass without end
        record(period=3),
        record(t=-1.0),
        record(xg=1.5),
        record(event_type="foul_throw"),
        record(y="50"),
        json.dumps({"match_id": "m1"}),
        "{not json",
    ],
)
def test_malformed_records(bad):
    with pytest.raises(MalformedRecord):
        parse_events([bad], [MATCH_LINE], strict=True)
    assert parse_events([bad], [MATCH_LINE]).skipped == 1


def test_unknown_match_and_team():
    with pytest.raises(UnknownMatch):
        parse_events([record(match_id="zz")], [MATCH_LINE], strict=True)
    with pytest.raises(UnknownTeam):
        parse_events([record(team_id="C")], [MATCH_LINE], strict=True)
    store = parse_events([record(match_id="zz"), record(team_id="C", seq=1)], [MATCH_LINE])
    assert store.skipped == 2


def test_unsorted_input_is_sorted_and_equal_times_keep_seq():
    lines = [record(t=5.0, seq=2), record(t=1.0, seq=0), record(t=1.0, seq=1, team_id="B")]
    store = parse_events(lines, [MATCH_LINE], strict=True)
    assert [e.seq for e in store.events("m1")] == [0, 1, 2]
    again = parse_events(list(serialize_events(store)), list(serialize_matches(store)), strict=True)
    assert again == store
    assert [e.seq for e in again.events("m1")] == [0, 1, 2]


coord = st.floats(0, 100, allow_nan=False)


@st.composite
def stores(draw):
    n = draw(st.integers(1, 15))
    events = []
    for i in range(n):
        etype = draw(st.sampled_from(["pass", "shot", "duel", "touch", "interruption", "clearance"]))
        end = (draw(coord), draw(coord)) if etype in ("pass", "shot") or draw(st.booleans()) else None
        events.append(ev(team=draw(st.sampled_from("AB")), t=draw(st.floats(0, 3000, allow_nan=False)),
                         etype=etype, x=draw(coord), y=draw(coord), end=end,
                         period=draw(st.sampled_from([1, 2])), seq=i,
                         tags=draw(st.sets(st.sampled_from(["accurate", "goal", "own_goal"]), max_size=2)),
                         xg=draw(st.none() | st.floats(0, 1))))
    return events


@settings(max_examples=60, deadline=None)
@given(stores())
def test_roundtrip_identity(events):
    store = EventStore(parse_matches([MATCH_LINE]), events)
    again = parse_events(list(serialize_events(store)), list(serialize_matches(store)), strict=True)
    assert again == store
    assert list(serialize_events(again)) == list(serialize_events(store))
    keys = [e.sort_key for e in again.events("m1")]
    assert keys == sorted(keys)
    timeline = goal_timeline(again, "m1")
    assert [(p, t) for p, t, _ in timeline] == sorted((p, t) for p, t, _ in timeline)


def test_goal_timeline(meta):
    store = EventStore([meta], [ev(t=10.0)])
    assert goal_timeline(store, "m1") == []
    store = EventStore([meta], [ev(t=600.0, etype="shot", tags={"goal"})])
    assert goal_timeline(store, "m1") == [(1, 600.0, "A")]
    store = EventStore([meta], [ev(t=100.0, period=2, etype="clearance", tags={"own_goal"})])
    assert goal_timeline(store, "m1") == [(2, 100.0, "B")]
    with pytest.raises(UnknownMatch):
        goal_timeline(store, "nope")


def test_match_meta_invariants():
    with pytest.raises(MalformedRecord):
        parse_matches([MATCH_LINE.replace('"away_team_id": "B"', '"away_team_id": "A"')])
    with pytest.raises(MalformedRecord):
        parse_matches([MATCH_LINE.replace('"home_coach_id": "cA"', '"home_coach_id": ""')])
