from coach2vec.model import Event


def ev(team="A", t=0.0, etype="pass", x=50.0, y=50.0, end=None, period=1, seq=0,
       match_id="m1", tags=(), xg=None):
    if end is None and etype in ("pass", "shot"):
        end = (min(x + 5.0, 100.0), y)
    ex, ey = end if end is not None else (None, None)
    return Event(match_id, period, t, team, etype, x, y, ex, ey, frozenset(tags), xg, seq)


def seq_events(teams, times, period=1, start_seq=0, **kw):
    return [ev(team=tm, t=t, period=period, seq=start_seq + i, **kw) for i, (tm, t) in enumerate(zip(teams, times))]
