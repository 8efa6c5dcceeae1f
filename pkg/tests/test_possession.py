import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coach2vec.errors import UnsortedInput
from coach2vec.possession import Possession, filter_valid, segment, write_possessions_csv

from helpers import ev, seq_events


def test_two_runs_hand_trace():
    ps = segment(seq_events("AABB", [0, 2, 5, 6]))
    assert [(p.team_id, p.start_t, p.end_t, len(p)) for p in ps] == [("A", 0, 2, 2), ("B", 5, 6, 2)]


def test_interruption_splits_and_is_excluded():
    evs = [ev(t=0, seq=0), ev(t=1, etype="interruption", seq=1), ev(t=2, seq=2)]
    ps = segment(evs)
    assert [len(p) for p in ps] == [1, 1]
    assert all(e.event_type != "interruption" for p in ps for e in p.events)


def test_period_boundary_splits():
    evs = seq_events("AA", [10, 20]) + seq_events("A", [0], period=2, start_seq=2)
    ps = segment(evs)
    assert [(p.period, len(p)) for p in ps] == [(1, 2), (2, 1)]


def test_unsorted_rejected():
    with pytest.raises(UnsortedInput):
        segment(seq_events("AA", [5, 1]))


def test_single_touch_tolerance_is_opt_in():
    evs = seq_events("AABAA", [0, 1, 2, 3, 4])
    assert len(segment(evs)) == 3
    ps = segment(evs, tolerate_single_touch=True)
    assert len(ps) == 1 and len(ps[0]) == 4


def test_filter_valid():
    single = Possession("m1", "A", 1, (ev(t=3),))
    flat = Possession("m1", "A", 1, (ev(t=3), ev(t=3, seq=1)))
    good = Possession("m1", "A", 1, (ev(t=3), ev(t=4, seq=1)))
    assert filter_valid([single, good]) == [good]
    assert filter_valid([flat, good], min_events=2, min_duration=0) == [good]
    assert filter_valid([]) == []
    assert filter_valid([good, single], min_events=1, min_duration=0.5) == [good]


@st.composite
def event_lists(draw):
    n = draw(st.integers(0, 30))
    teams = draw(st.lists(st.sampled_from("AB"), min_size=n, max_size=n))
    kinds = draw(st.lists(st.sampled_from(["pass", "pass", "duel", "interruption"]), min_size=n, max_size=n))
    gaps = draw(st.lists(st.floats(0, 5), min_size=n, max_size=n))
    split = draw(st.integers(0, n))
    out, t = [], 0.0
    for i in range(n):
        if i == split:
            t = 0.0
        t += gaps[i]
        out.append(ev(team=teams[i], t=t, etype=kinds[i], period=1 if i < split else 2, seq=i))
    return out


@settings(max_examples=100, deadline=None)
@given(event_lists())
def test_partition_and_invariants(evs):
    ps = segment(evs)
    assert sum(len(p) for p in ps) == sum(e.event_type != "interruption" for e in evs)
    for p in ps:
        assert len({(e.team_id, e.period, e.match_id) for e in p.events}) == 1
        assert p.start_t <= p.end_t
    # re-sorting already sorted input changes nothing
    assert segment(sorted(evs, key=lambda e: e.sort_key)) == ps


@settings(max_examples=40, deadline=None)
@given(event_lists(), event_lists())
def test_no_cross_match_leakage(a, b):
    b = [ev(team=e.team_id, t=e.t, etype=e.event_type, period=e.period, seq=e.seq, match_id="m2") for e in b]
    per_match = segment(a) + segment(b)
    assert [len(p) for p in per_match] == [len(p) for p in segment(a)] + [len(p) for p in segment(b)]
    assert all(p.match_id == "m2" for p in segment(b))


def test_possession_csv(tmp_path):
    ps = segment(seq_events("AABB", [0, 2, 5, 6]))
    write_possessions_csv(tmp_path / "p.csv", ps)
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "match_id,team_id,period,start_t,end_t,n_events"
    assert lines[1] == "m1,A,1,0,2,2"
